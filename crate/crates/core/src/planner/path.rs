//! Turn-penalized path cost.
//!
//! A path costs the sum of its edge weights plus `lambda` for every interior
//! node where the heading changes by at least the turn threshold. Because the
//! turn term depends on how a node was entered, the search runs Dijkstra over
//! (node, incoming edge) states, which restores optimal substructure.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::field_graph::{Digraph, EdgeId, NodeId};
use crate::geometry::Point;
use crate::hazard::BlockedEdges;

const TIE_REL: f64 = 1e-9;
const TIE_ABS: f64 = 1e-12;
const ANGLE_EPS: f64 = 1e-12;

/// Two costs closer than the tie tolerance are treated as equal and resolved
/// by index, which keeps decisions stable under rounding and uniform scaling.
pub fn costs_tie(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    (a - b).abs() <= TIE_REL * a.abs().max(b.abs()) + TIE_ABS
}

/// `a < b` by more than the tie tolerance.
pub fn definitely_less(a: f64, b: f64) -> bool {
    a < b && !costs_tie(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    /// Turn penalty weight, meters.
    pub lambda: f64,
    /// Heading change counted as a turn, degrees.
    pub turn_threshold_deg: f64,
}

impl PlannerParams {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            turn_threshold_deg: 90.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lambda >= 0.0
            && self.lambda.is_finite()
            && self.turn_threshold_deg > 0.0
            && self.turn_threshold_deg <= 180.0
    }

    fn cos_threshold(&self) -> f64 {
        self.turn_threshold_deg.to_radians().cos()
    }
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self::new(0.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub cost: f64,
    pub nodes: Vec<NodeId>,
    pub turns: usize,
}

fn is_turn(prev: Point, mid: Point, next: Point, cos_threshold: f64) -> bool {
    let d1 = mid.sub(prev);
    let d2 = next.sub(mid);
    let denom = d1.norm() * d2.norm();
    if denom == 0.0 {
        return false;
    }
    let cos = (d1.dot(d2) / denom).clamp(-1.0, 1.0);
    cos <= cos_threshold + ANGLE_EPS
}

/// Number of interior nodes where the heading turns by at least
/// `threshold_deg` degrees.
pub fn turn_cost<G: Digraph>(nodes: &[NodeId], graph: &G, threshold_deg: f64) -> usize {
    let cos_threshold = threshold_deg.to_radians().cos();
    nodes
        .windows(3)
        .filter(|w| {
            is_turn(
                graph.position(w[0]),
                graph.position(w[1]),
                graph.position(w[2]),
                cos_threshold,
            )
        })
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry(f64, usize);

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

const NO_STATE: usize = usize::MAX;

/// Single-source turn-aware shortest paths to every node.
///
/// State `e < edge_count` means "arrived over edge `e`"; the extra state
/// `edge_count` is the source itself, which has no heading yet.
#[derive(Debug, Clone)]
pub struct SearchTree<'g, G: Digraph> {
    graph: &'g G,
    source: NodeId,
    state_cost: Vec<f64>,
    pred: Vec<usize>,
    best_state: Vec<usize>,
    node_cost: Vec<f64>,
}

impl<'g, G: Digraph> SearchTree<'g, G> {
    pub fn new(graph: &'g G, source: NodeId, params: &PlannerParams, blocked: &BlockedEdges) -> Self {
        Self::search(graph, source, params, blocked, true)
    }

    /// Labels are always the exact minimum over relaxations, so the cost
    /// arrays do not depend on `track_ties`. Tracking only decides which of
    /// several tied predecessors is kept for path reconstruction.
    fn search(graph: &'g G, source: NodeId, params: &PlannerParams, blocked: &BlockedEdges, track_ties: bool) -> Self {
        let m = graph.edge_count();
        let origin = m;
        let cos_threshold = params.cos_threshold();
        let mut tree = Self {
            graph,
            source,
            state_cost: vec![f64::INFINITY; m + 1],
            pred: vec![NO_STATE; m + 1],
            best_state: vec![NO_STATE; graph.node_count()],
            node_cost: vec![f64::INFINITY; graph.node_count()],
        };
        let mut settled = vec![false; m + 1];
        let mut heap = BinaryHeap::new();
        tree.state_cost[origin] = 0.0;
        heap.push(Reverse(HeapEntry(0.0, origin)));

        while let Some(Reverse(HeapEntry(cost, state))) = heap.pop() {
            if settled[state] || cost != tree.state_cost[state] {
                continue;
            }
            settled[state] = true;
            let (node, prev_pos) = if state == origin {
                (source, None)
            } else {
                let (tail, head) = graph.endpoints(EdgeId(state));
                (head, Some(graph.position(tail)))
            };
            let here = graph.position(node);
            for f in graph.out_edges(node) {
                if settled[f] || blocked.contains(&EdgeId(f)) {
                    continue;
                }
                let next = graph.endpoints(EdgeId(f)).1;
                let mut candidate = cost + graph.weight(EdgeId(f));
                if let Some(prev) = prev_pos {
                    if is_turn(prev, here, graph.position(next), cos_threshold) {
                        candidate += params.lambda;
                    }
                }
                let current = tree.state_cost[f];
                let take_pred = if current == f64::INFINITY || definitely_less(candidate, current) {
                    true
                } else if track_ties && costs_tie(candidate, current) {
                    let mut via_new = tree.state_nodes(state);
                    via_new.push(next);
                    let mut via_old = tree.state_nodes(tree.pred[f]);
                    via_old.push(next);
                    via_new < via_old
                } else {
                    false
                };
                if take_pred {
                    tree.pred[f] = state;
                }
                if candidate < current {
                    tree.state_cost[f] = candidate;
                    heap.push(Reverse(HeapEntry(candidate, f)));
                }
            }
        }

        tree.best_state[source.0] = origin;
        tree.node_cost[source.0] = 0.0;
        for e in 0..m {
            let cost = tree.state_cost[e];
            if cost == f64::INFINITY {
                continue;
            }
            let head = graph.endpoints(EdgeId(e)).1;
            if head == source {
                continue;
            }
            if cost < tree.node_cost[head.0] {
                tree.node_cost[head.0] = cost;
            }
            let incumbent = tree.best_state[head.0];
            let take = if incumbent == NO_STATE {
                true
            } else if !track_ties {
                false
            } else {
                let other = tree.state_cost[incumbent];
                definitely_less(cost, other)
                    || (costs_tie(cost, other) && tree.state_nodes(e) < tree.state_nodes(incumbent))
            };
            if take {
                tree.best_state[head.0] = e;
            }
        }
        tree
    }

    /// Node sequence of the search path ending in `state`.
    fn state_nodes(&self, state: usize) -> Vec<NodeId> {
        let origin = self.graph.edge_count();
        let mut nodes = Vec::new();
        let mut s = state;
        while s != origin {
            nodes.push(self.graph.endpoints(EdgeId(s)).1);
            s = self.pred[s];
        }
        nodes.push(self.source);
        nodes.reverse();
        nodes
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    /// Turn-penalized cost to `target`, `+inf` when unreachable.
    pub fn cost(&self, target: NodeId) -> f64 {
        self.node_cost[target.0]
    }

    pub fn costs(&self) -> &[f64] {
        &self.node_cost
    }

    pub fn into_costs(self) -> Vec<f64> {
        self.node_cost
    }

    pub fn path(&self, target: NodeId, params: &PlannerParams) -> Option<PathResult> {
        match self.best_state[target.0] {
            NO_STATE => None,
            s => {
                let nodes = self.state_nodes(s);
                let turns = turn_cost(&nodes, self.graph, params.turn_threshold_deg);
                Some(PathResult {
                    cost: self.node_cost[target.0],
                    nodes,
                    turns,
                })
            }
        }
    }
}

/// Turn-penalized cost from `source` to every node, `+inf` where
/// unreachable. Same values as [`SearchTree::costs`], without the
/// bookkeeping for equal-cost route selection.
pub fn cost_row<G: Digraph>(graph: &G, source: NodeId, params: &PlannerParams, blocked: &BlockedEdges) -> Vec<f64> {
    SearchTree::search(graph, source, params, blocked, false).into_costs()
}

/// Minimum turn-penalized cost from `source` to `target` avoiding `blocked`.
/// `None` means unreachable. Equal-cost routes resolve to the
/// lexicographically smallest node sequence.
pub fn path_cost<G: Digraph>(
    graph: &G,
    source: NodeId,
    target: NodeId,
    params: &PlannerParams,
    blocked: &BlockedEdges,
) -> Option<PathResult> {
    SearchTree::new(graph, source, params, blocked).path(target, params)
}
