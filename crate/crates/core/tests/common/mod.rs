//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use fieldcover::field_graph::{Digraph, EdgeId, ExplicitGraph, NodeId};
use fieldcover::planner::costs_tie;
use fieldcover::Point;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const LAMBDAS: [f64; 3] = [0.0, 0.1, 10.0];

/// Random strongly connected digraph with 3..=`max_nodes` nodes. A random
/// Hamiltonian cycle guarantees strong connectivity; extra arcs are added
/// with probability `p`. A third of the graphs sit on a half-meter lattice
/// (exact right angles and collinear runs), and a third use integer weights
/// so that equal-cost routes are common.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, p: f64) -> ExplicitGraph {
    let n = rng.gen_range(3..=max_nodes);
    let style = rng.gen_range(0..3);
    let mut positions: Vec<Point> = Vec::with_capacity(n);
    while positions.len() < n {
        let q = if style == 0 {
            Point::new(rng.gen_range(0..8) as f64 * 0.5, rng.gen_range(0..8) as f64 * 0.5)
        } else {
            Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))
        };
        if positions.iter().all(|o| o.distance(q) > 1e-6) {
            positions.push(q);
        }
    }
    let weight = |rng: &mut ChaCha8Rng| {
        if style == 2 {
            rng.gen_range(1..=10) as f64
        } else {
            rng.gen_range(0.1..=10.0)
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut arcs = BTreeSet::new();
    for i in 0..n {
        arcs.insert((order[i], order[(i + 1) % n]));
    }
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(p) {
                arcs.insert((a, b));
            }
        }
    }
    let edges: Vec<(usize, usize, f64)> = arcs.into_iter().map(|(a, b)| (a, b, weight(rng))).collect();
    ExplicitGraph::new(positions, &edges)
}

/// Turn test by explicit angle, independent of the planner's cosine test.
pub fn angle_turn(prev: Point, mid: Point, next: Point, threshold_deg: f64) -> bool {
    let (d1, d2) = (mid.sub(prev), next.sub(mid));
    let angle = d1.cross(d2).atan2(d1.dot(d2)).abs().to_degrees();
    angle >= threshold_deg - 1e-7
}

pub fn angle_turn_count<G: Digraph>(g: &G, nodes: &[NodeId], threshold_deg: f64) -> usize {
    nodes
        .windows(3)
        .filter(|w| angle_turn(g.position(w[0]), g.position(w[1]), g.position(w[2]), threshold_deg))
        .count()
}

/// One simple path with its cost under each lambda in [`LAMBDAS`].
#[derive(Debug, Clone)]
pub struct SimplePath {
    pub nodes: Vec<NodeId>,
    pub costs: [f64; 3],
}

/// Every simple path leaving `source` (including the trivial one), by
/// depth-first enumeration. Costs accumulate edge by edge, adding the turn
/// penalty after the edge that completes the turn.
pub fn simple_paths<G: Digraph>(
    g: &G,
    source: NodeId,
    blocked: &BTreeSet<EdgeId>,
    threshold_deg: f64,
) -> Vec<SimplePath> {
    let mut out = Vec::new();
    let mut nodes = vec![source];
    let mut on_path = vec![false; g.node_count()];
    on_path[source.0] = true;
    dfs(g, blocked, threshold_deg, &mut nodes, &mut on_path, [0.0; 3], &mut out);
    out
}

fn dfs<G: Digraph>(
    g: &G,
    blocked: &BTreeSet<EdgeId>,
    threshold_deg: f64,
    nodes: &mut Vec<NodeId>,
    on_path: &mut Vec<bool>,
    costs: [f64; 3],
    out: &mut Vec<SimplePath>,
) {
    out.push(SimplePath {
        nodes: nodes.clone(),
        costs,
    });
    let here = *nodes.last().unwrap();
    for (v, w) in g
        .out_edges(here)
        .map(EdgeId)
        .filter(|e| !blocked.contains(e))
        .map(|e| (g.endpoints(e).1, g.weight(e)))
        .collect::<Vec<_>>()
    {
        if on_path[v.0] {
            continue;
        }
        let turn = nodes.len() >= 2
            && angle_turn(
                g.position(nodes[nodes.len() - 2]),
                g.position(here),
                g.position(v),
                threshold_deg,
            );
        let mut next = costs;
        for (c, lambda) in next.iter_mut().zip(LAMBDAS) {
            *c += w;
            if turn {
                *c += lambda;
            }
        }
        nodes.push(v);
        on_path[v.0] = true;
        dfs(g, blocked, threshold_deg, nodes, on_path, next, out);
        on_path[v.0] = false;
        nodes.pop();
    }
}

/// Minimum cost and the set of tied paths from `source` to every node.
pub struct PathOracle {
    /// `best[l][v]`: minimum cost for lambda index `l`, `+inf` if unreachable.
    pub best: Vec<Vec<f64>>,
    pub paths: Vec<SimplePath>,
}

impl PathOracle {
    pub fn new<G: Digraph>(g: &G, source: NodeId, blocked: &BTreeSet<EdgeId>, threshold_deg: f64) -> Self {
        let paths = simple_paths(g, source, blocked, threshold_deg);
        let mut best = vec![vec![f64::INFINITY; g.node_count()]; LAMBDAS.len()];
        for p in &paths {
            let v = p.nodes.last().unwrap().0;
            for (row, &c) in best.iter_mut().zip(&p.costs) {
                row[v] = row[v].min(c);
            }
        }
        Self { best, paths }
    }

    /// Paths to `target` within tie tolerance of the optimum for lambda `l`.
    pub fn tie_set(&self, target: NodeId, l: usize) -> Vec<&SimplePath> {
        let b = self.best[l][target.0];
        self.paths
            .iter()
            .filter(|p| *p.nodes.last().unwrap() == target && costs_tie(p.costs[l], b))
            .collect()
    }
}

/// Owner map by exhaustive comparison of all robots' exact costs; ties go
/// to the lowest robot index.
pub fn brute_owners(rows: &[Vec<f64>]) -> Vec<Option<usize>> {
    let n = rows[0].len();
    (0..n)
        .map(|v| {
            let mut owner: Option<usize> = None;
            for (k, row) in rows.iter().enumerate() {
                if row[v] == f64::INFINITY {
                    continue;
                }
                owner = match owner {
                    None => Some(k),
                    Some(o) if row[v] < rows[o][v] && !costs_tie(row[v], rows[o][v]) => Some(k),
                    keep => keep,
                };
            }
            owner
        })
        .collect()
}

/// Locational cost from explicit cost rows: every node counts toward its
/// owner except the node the owner stands on.
pub fn brute_cost(rows: &[Vec<f64>], positions: &[NodeId], phi: &[f64]) -> f64 {
    let owners = brute_owners(rows);
    let mut total = 0.0;
    for (v, o) in owners.iter().enumerate() {
        if let Some(k) = *o {
            if positions[k].0 != v {
                total += rows[k][v] * phi[v];
            }
        }
    }
    total
}

/// Sorted-corner numbering: ascending x, then descending y.
pub fn sorted_corners(corners: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::new();
    for &c in corners {
        if pts.iter().all(|p| p.distance(c) > 1e-9) {
            pts.push(c);
        }
    }
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(b.y.total_cmp(&a.y)));
    pts
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Greedy forward walk by exhaustive candidate scoring: at each head node
/// score every outgoing edge whose segment is not yet used, in either
/// direction, by alignment with `heading`. Keep the best strictly positive
/// score and break ties by the lower head index.
pub fn oracle_prediction<G: Digraph>(g: &G, start: EdgeId, heading: Point, count: usize) -> Vec<EdgeId> {
    let mut used = vec![start];
    let mut out = Vec::new();
    let mut head = g.endpoints(start).1;
    while out.len() < count {
        let mut scored: Vec<(f64, usize, EdgeId)> = g
            .out_edges(head)
            .map(EdgeId)
            .filter(|&e| {
                let (a, b) = g.endpoints(e);
                !used.iter().any(|&u| {
                    let (c, d) = g.endpoints(u);
                    (a, b) == (c, d) || (a, b) == (d, c)
                })
            })
            .map(|e| {
                let (a, b) = g.endpoints(e);
                let d = g.position(b).sub(g.position(a));
                (d.dot(heading) / d.norm(), b.0, e)
            })
            .filter(|(s, _, _)| *s > 1e-12)
            .collect();
        if scored.is_empty() {
            break;
        }
        let top = scored.iter().map(|s| s.0).fold(f64::MIN, f64::max);
        scored.retain(|s| s.0 >= top - 1e-12);
        scored.sort_by_key(|s| s.1);
        let e = scored[0].2;
        used.push(e);
        out.push(e);
        head = g.endpoints(e).1;
    }
    out
}

/// Hazard description for [`oracle_weights`]: occupied directed edge,
/// heading, speed.
pub struct OracleObstacle {
    pub edge: EdgeId,
    pub heading: Point,
    pub speed: f64,
}

/// Effective weights written straight from the penalty laws, plus the set of
/// hard-blocked edges.
pub fn oracle_weights(
    g: &fieldcover::FieldGraph,
    obstacles: &[OracleObstacle],
    patches: &[fieldcover::TerrainPatch],
    params: &fieldcover::HazardParams,
) -> (Vec<f64>, BTreeSet<EdgeId>) {
    let m = g.edge_count();
    let mut w: Vec<f64> = (0..m).map(|e| g.base_weight(EdgeId(e))).collect();
    let mut blocked = BTreeSet::new();
    for o in obstacles {
        let p = params.alpha * (o.speed * o.speed / (params.v0 * params.v0)).exp();
        let (a, b) = g.endpoints(o.edge);
        for e in [g.find_edge(a, b), g.find_edge(b, a)].into_iter().flatten() {
            w[e.0] += p;
            blocked.insert(e);
        }
        let mut d = g.base_weight(o.edge);
        for e in oracle_prediction(g, o.edge, o.heading, params.propagation_count) {
            d += g.base_weight(e);
            w[e.0] += p * (-d / params.d0).exp();
        }
    }
    for patch in patches {
        for (e, we) in w.iter_mut().enumerate() {
            let (a, b) = g.endpoints(EdgeId(e));
            let (pa, pb) = (g.position(a), g.position(b));
            let touches = patch.polygon.contains(pa)
                || patch.polygon.contains(pb)
                || patch
                    .polygon
                    .edges()
                    .any(|(q1, q2)| fieldcover::geometry::segments_intersect(pa, pb, q1, q2));
            if touches {
                *we += params.beta * patch.severity.exp();
            }
        }
    }
    (w, blocked)
}

/// Turn-penalized costs from `source` by Bellman-Ford relaxation over
/// (node, incoming edge) states until nothing changes.
pub fn bellman_ford_costs<G: Digraph>(
    g: &G,
    weights: &[f64],
    source: NodeId,
    lambda: f64,
    threshold_deg: f64,
    blocked: &BTreeSet<EdgeId>,
) -> Vec<f64> {
    let m = g.edge_count();
    // State m is the source with no heading.
    let mut cost = vec![f64::INFINITY; m + 1];
    cost[m] = 0.0;
    loop {
        let mut changed = false;
        for s in 0..=m {
            if cost[s] == f64::INFINITY {
                continue;
            }
            let (node, prev) = if s == m {
                (source, None)
            } else {
                let (a, b) = g.endpoints(EdgeId(s));
                (b, Some(a))
            };
            for f in g.out_edges(node) {
                if blocked.contains(&EdgeId(f)) {
                    continue;
                }
                let next = g.endpoints(EdgeId(f)).1;
                let mut c = cost[s] + weights[f];
                if let Some(p) = prev {
                    if angle_turn(g.position(p), g.position(node), g.position(next), threshold_deg) {
                        c += lambda;
                    }
                }
                if c < cost[f] {
                    cost[f] = c;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = vec![f64::INFINITY; g.node_count()];
    out[source.0] = 0.0;
    for (e, &c) in cost[..m].iter().enumerate() {
        let v = g.endpoints(EdgeId(e)).1;
        if v != source {
            out[v.0] = out[v.0].min(c);
        }
    }
    out
}

/// Reachability avoiding `avoid`, by breadth-first search.
pub fn reachable_avoiding<G: Digraph>(g: &G, from: NodeId, to: NodeId, avoid: &BTreeSet<EdgeId>) -> bool {
    let mut seen = vec![false; g.node_count()];
    let mut queue = std::collections::VecDeque::from([from]);
    seen[from.0] = true;
    while let Some(u) = queue.pop_front() {
        if u == to {
            return true;
        }
        for e in g.out_edges(u).map(EdgeId) {
            let v = g.endpoints(e).1;
            if !avoid.contains(&e) && !seen[v.0] {
                seen[v.0] = true;
                queue.push_back(v);
            }
        }
    }
    false
}
