//! Moving obstacles, terrain patches, and the edge re-weighting they induce.
//!
//! Effective weights are rebuilt from the base weights on every tick:
//!
//! - an occupied segment gets `alpha * exp(v^2 / v0^2)` in both directions,
//! - each of the next `N` edges on the obstacle's predicted path gets that
//!   penalty scaled by `exp(-d / d0)`, where `d` is the base length walked from
//!   the start of the occupied edge through the end of the penalized edge,
//! - every edge touching a terrain patch gets `beta * exp(T)` per patch.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::field_graph::{Digraph, EdgeId, FieldGraph, NodeId};
use crate::geometry::{Point, Polygon};

/// Minimum heading alignment treated as "forward" when predicting motion.
const ALIGNMENT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HazardParams {
    /// Obstacle penalty scale, meters.
    pub alpha: f64,
    /// Reference speed, m/s.
    pub v0: f64,
    /// Decay length of the propagated penalty, meters.
    pub d0: f64,
    /// Terrain penalty scale, meters.
    pub beta: f64,
    /// Number of predicted edges penalized ahead of each obstacle.
    pub propagation_count: usize,
}

impl HazardParams {
    pub fn is_valid(&self) -> bool {
        self.alpha >= 0.0
            && self.v0 > 0.0
            && self.d0 > 0.0
            && self.beta >= 0.0
            && self.propagation_count >= 1
            && [self.alpha, self.v0, self.d0, self.beta].iter().all(|v| v.is_finite())
    }
}

impl Default for HazardParams {
    fn default() -> Self {
        Self {
            alpha: 5.0,
            v0: 1.0,
            d0: 1.0,
            beta: 1.0,
            propagation_count: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub id: u32,
    /// Directed edge currently driven, `(from, to)`.
    pub edge: (NodeId, NodeId),
    /// Fraction of `edge` already covered, in `[0, 1]`.
    pub progress: f64,
    /// m/s.
    pub speed: f64,
    /// Unit direction of motion used for prediction.
    pub heading: Point,
    /// Iteration at which the obstacle is first detected.
    pub appears_at: usize,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainPatch {
    pub polygon: Polygon,
    /// Terrain severity `T`.
    pub severity: f64,
}

/// `alpha * exp(speed^2 / v0^2)`.
pub fn obstacle_edge_penalty(params: &HazardParams, speed: f64) -> f64 {
    params.alpha * (speed * speed / (params.v0 * params.v0)).exp()
}

/// `beta * exp(T)`.
pub fn terrain_penalty(params: &HazardParams, severity: f64) -> f64 {
    params.beta * severity.exp()
}

fn edge_direction(graph: &FieldGraph, edge: EdgeId) -> Option<Point> {
    let (a, b) = graph.segment(edge);
    b.sub(a).normalized()
}

fn same_segment(graph: &FieldGraph, a: EdgeId, b: EdgeId) -> bool {
    let (a0, a1) = graph.endpoints(a);
    let (b0, b1) = graph.endpoints(b);
    (a0 == b0 && a1 == b1) || (a0 == b1 && a1 == b0)
}

/// Greedy forward walk from `from` picking the best-aligned unused edge.
fn walk_forward(graph: &FieldGraph, from: NodeId, heading: Point, used: &mut Vec<EdgeId>, count: usize) -> Vec<EdgeId> {
    let mut path = Vec::with_capacity(count);
    let mut node = from;
    while path.len() < count {
        let mut best: Option<(EdgeId, f64)> = None;
        for e in graph.out_edges(node).map(EdgeId) {
            if used.iter().any(|&u| same_segment(graph, u, e)) {
                continue;
            }
            let Some(dir) = edge_direction(graph, e) else {
                continue;
            };
            let alignment = dir.dot(heading);
            if alignment <= ALIGNMENT_EPS {
                continue;
            }
            // Out-edges are sorted by head, so the first of tied candidates wins.
            if best.is_none_or(|(_, b)| alignment > b + ALIGNMENT_EPS) {
                best = Some((e, alignment));
            }
        }
        let Some((e, _)) = best else {
            break;
        };
        path.push(e);
        used.push(e);
        node = graph.endpoints(e).1;
    }
    path
}

/// Up to `count` edges the obstacle is expected to drive after its current one.
///
/// Returns an empty list when the current edge is not in the graph.
pub fn predict_obstacle_path(graph: &FieldGraph, obstacle: &Obstacle, count: usize) -> Vec<EdgeId> {
    let Some(current) = graph.find_edge(obstacle.edge.0, obstacle.edge.1) else {
        return Vec::new();
    };
    let mut used = vec![current];
    walk_forward(graph, obstacle.edge.1, obstacle.heading, &mut used, count)
}

/// Directed edges that robots may not drive this tick.
pub type BlockedEdges = BTreeSet<EdgeId>;

/// Rebuilds effective weights from base weights plus all hazard penalties and
/// returns the edges occupied by active obstacles (both directions).
pub fn recompute_effective_weights(
    graph: &mut FieldGraph,
    obstacles: &[Obstacle],
    patches: &[TerrainPatch],
    params: &HazardParams,
) -> BlockedEdges {
    graph.reset_effective_weights();
    let mut blocked = BlockedEdges::new();

    for obstacle in obstacles.iter().filter(|o| o.active) {
        let Some(occupied) = graph.find_edge(obstacle.edge.0, obstacle.edge.1) else {
            continue;
        };
        let penalty = obstacle_edge_penalty(params, obstacle.speed);
        let reverse = graph.reverse_edge(occupied);
        for e in std::iter::once(occupied).chain(reverse) {
            graph.add_penalty(e, penalty);
            blocked.insert(e);
        }

        let mut distance = graph.base_weight(occupied);
        for e in predict_obstacle_path(graph, obstacle, params.propagation_count) {
            distance += graph.base_weight(e);
            graph.add_penalty(e, penalty * (-distance / params.d0).exp());
        }
    }

    if !patches.is_empty() {
        for e in (0..graph.edge_count()).map(EdgeId) {
            let (a, b) = graph.segment(e);
            for patch in patches {
                if patch.polygon.intersects_segment(a, b) {
                    graph.add_penalty(e, terrain_penalty(params, patch.severity));
                }
            }
        }
    }
    blocked
}

/// Edges touching any patch.
pub fn patch_edges(graph: &FieldGraph, patches: &[TerrainPatch]) -> BTreeSet<EdgeId> {
    (0..graph.edge_count())
        .map(EdgeId)
        .filter(|&e| {
            let (a, b) = graph.segment(e);
            patches.iter().any(|p| p.polygon.intersects_segment(a, b))
        })
        .collect()
}

/// Activates obstacles due by `iteration`.
pub fn activate_obstacles(obstacles: &mut [Obstacle], iteration: usize) {
    for o in obstacles.iter_mut() {
        if !o.active && o.appears_at <= iteration {
            o.active = true;
        }
    }
}

fn advance_one(graph: &FieldGraph, obstacle: &mut Obstacle, dt: f64) {
    let mut remaining = obstacle.speed * dt;
    let Some(mut edge) = graph.find_edge(obstacle.edge.0, obstacle.edge.1) else {
        return;
    };
    while remaining > 0.0 {
        let length = graph.base_weight(edge);
        let left = (1.0 - obstacle.progress) * length;
        if remaining <= left {
            obstacle.progress += remaining / length;
            break;
        }
        remaining -= left;
        let head = graph.endpoints(edge).1;
        let mut used = vec![edge];
        let mut next = walk_forward(graph, head, obstacle.heading, &mut used, 1);
        if next.is_empty() {
            obstacle.heading = obstacle.heading.scale(-1.0);
            // Turning around may drive straight back along the same segment.
            let mut used = Vec::new();
            next = walk_forward(graph, head, obstacle.heading, &mut used, 1);
        }
        let Some(&successor) = next.first() else {
            obstacle.progress = 1.0;
            break;
        };
        edge = successor;
        obstacle.edge = graph.endpoints(edge);
        obstacle.progress = 0.0;
    }
    obstacle.progress = obstacle.progress.clamp(0.0, 1.0);
}

/// Moves every active obstacle by `speed * dt`, carrying leftover distance
/// onto the next predicted edge and reversing at dead ends. Obstacles due by
/// `iteration` are activated afterwards, so they appear at their start pose.
pub fn advance_obstacles(graph: &FieldGraph, obstacles: &mut [Obstacle], dt: f64, iteration: usize) {
    assert!(dt > 0.0, "dt must be positive");
    for o in obstacles.iter_mut().filter(|o| o.active) {
        advance_one(graph, o, dt);
    }
    activate_obstacles(obstacles, iteration);
}

/// Point location of an obstacle along its edge.
pub fn obstacle_position(graph: &FieldGraph, obstacle: &Obstacle) -> Point {
    let a = graph.position(obstacle.edge.0);
    let b = graph.position(obstacle.edge.1);
    a.add(b.sub(a).scale(obstacle.progress))
}

/// Per-tick obstacle state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSnapshot {
    pub id: u32,
    pub iteration: usize,
    pub edge_from: NodeId,
    pub edge_to: NodeId,
    pub progress: f64,
    pub speed: f64,
    pub active: bool,
}

impl ObstacleSnapshot {
    pub fn capture(obstacle: &Obstacle, iteration: usize) -> Self {
        Self {
            id: obstacle.id,
            iteration,
            edge_from: obstacle.edge.0,
            edge_to: obstacle.edge.1,
            progress: obstacle.progress,
            speed: obstacle.speed,
            active: obstacle.active,
        }
    }

    /// `id iter edge_from edge_to progress speed active`
    pub fn to_line(&self) -> String {
        format!(
            "{} {} {} {} {:.6} {:.6} {}",
            self.id,
            self.iteration,
            self.edge_from,
            self.edge_to,
            self.progress,
            self.speed,
            u8::from(self.active)
        )
    }
}

pub fn snapshot_text(snapshots: &[ObstacleSnapshot]) -> String {
    let mut out = String::new();
    for s in snapshots {
        let _ = writeln!(out, "{}", s.to_line());
    }
    out
}
