//! One iteration of the greedy deployment loop.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::partition::{locational_cost, CostBreakdown, PartitionMap};
use super::path::{cost_row, definitely_less, PlannerParams};
use crate::density::DensityField;
use crate::field_graph::{Digraph, EdgeId, NodeId};
use crate::hazard::BlockedEdges;

/// Robot positions plus every node each robot has occupied, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetState {
    pub positions: Vec<NodeId>,
    pub history: Vec<Vec<NodeId>>,
}

impl FleetState {
    pub fn new(positions: Vec<NodeId>) -> Self {
        assert!(!positions.is_empty(), "fleet must not be empty");
        let history = positions.iter().map(|&p| vec![p]).collect();
        Self { positions, history }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    fn relocate(&mut self, robot: usize, node: NodeId) {
        self.positions[robot] = node;
        self.history[robot].push(node);
    }
}

/// Route costs from arbitrary source nodes under one fixed set of weights
/// and blocked edges. Entries are computed on first use.
pub struct CostCache<'g, G: Digraph> {
    graph: &'g G,
    params: PlannerParams,
    blocked: &'g BlockedEdges,
    rows: HashMap<NodeId, Vec<f64>>,
}

impl<'g, G: Digraph> CostCache<'g, G> {
    pub fn new(graph: &'g G, params: PlannerParams, blocked: &'g BlockedEdges) -> Self {
        Self {
            graph,
            params,
            blocked,
            rows: HashMap::new(),
        }
    }

    pub fn costs_from(&mut self, source: NodeId) -> &[f64] {
        let (graph, params, blocked) = (self.graph, &self.params, self.blocked);
        self.rows
            .entry(source)
            .or_insert_with(|| cost_row(graph, source, params, blocked))
    }

    pub fn partition(&mut self, positions: &[NodeId]) -> PartitionMap {
        for &p in positions {
            self.costs_from(p);
        }
        let rows: Vec<&[f64]> = positions.iter().map(|p| self.rows[p].as_slice()).collect();
        PartitionMap::from_costs(&rows)
    }

    pub fn evaluate(&mut self, positions: &[NodeId], density: &DensityField) -> (PartitionMap, CostBreakdown) {
        let partition = self.partition(positions);
        let cost = locational_cost(positions, density, &partition);
        (partition, cost)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotMove {
    pub robot: usize,
    pub from: NodeId,
    pub to: NodeId,
    pub edge: EdgeId,
    /// Locational cost before and after the move.
    pub cost_before: f64,
    pub cost_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Partition and cost at the positions the iteration started from.
    pub start_partition: PartitionMap,
    pub start_cost: CostBreakdown,
    pub moves: Vec<RobotMove>,
    /// Nodes whose density was zeroed during the step.
    pub visited: Vec<NodeId>,
    /// Cost after all moves and visits, under the same weights.
    pub end_cost: CostBreakdown,
}

/// Candidate moves for `robot`: heads of unblocked outgoing edges that no
/// other robot stands on.
fn candidates<G: Digraph>(
    graph: &G,
    positions: &[NodeId],
    robot: usize,
    blocked: &BlockedEdges,
) -> Vec<(NodeId, EdgeId)> {
    let here = positions[robot];
    graph
        .out_edges(here)
        .map(EdgeId)
        .filter(|e| !blocked.contains(e))
        .map(|e| (graph.endpoints(e).1, e))
        .filter(|(u, _)| !positions.iter().enumerate().any(|(k, p)| k != robot && p == u))
        .collect()
}

/// Runs one pass of the greedy deployment over the fleet.
///
/// Robots act in index order and see the already-updated positions of
/// lower-indexed robots. Each robot tries every admissible neighbor, with
/// the partition recomputed for that hypothetical placement, and moves to
/// the cheapest one only if it lowers the locational cost. Whatever node a
/// robot ends on has its density zeroed.
pub fn algorithm1_step<G: Digraph>(
    graph: &G,
    fleet: &mut FleetState,
    density: &mut DensityField,
    blocked: &BlockedEdges,
    params: &PlannerParams,
) -> StepOutcome {
    let mut cache = CostCache::new(graph, *params, blocked);
    let (start_partition, start_cost) = cache.evaluate(&fleet.positions, density);
    let mut moves = Vec::new();
    let mut visited = Vec::new();

    for robot in 0..fleet.len() {
        let current = cache.evaluate(&fleet.positions, density).1.total;
        let mut best: Option<(NodeId, EdgeId, f64)> = None;
        let mut hypothetical = fleet.positions.clone();
        for (u, e) in candidates(graph, &fleet.positions, robot, blocked) {
            hypothetical[robot] = u;
            let h = cache.evaluate(&hypothetical, density).1.total;
            if best.is_none_or(|(_, _, b)| definitely_less(h, b)) {
                best = Some((u, e, h));
            }
        }
        if let Some((u, e, h)) = best {
            if definitely_less(h, current) {
                moves.push(RobotMove {
                    robot,
                    from: fleet.positions[robot],
                    to: u,
                    edge: e,
                    cost_before: current,
                    cost_after: h,
                });
                fleet.relocate(robot, u);
            }
        }
        let here = fleet.positions[robot];
        if density.visit(here) {
            visited.push(here);
        }
    }

    let (_, end_cost) = cache.evaluate(&fleet.positions, density);
    StepOutcome {
        start_partition,
        start_cost,
        moves,
        visited,
        end_cost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_graph::ExplicitGraph;
    use crate::geometry::Point;

    fn line(n: usize) -> ExplicitGraph {
        let pos = (0..n).map(|i| Point::new(i as f64, 0.0)).collect();
        let mut edges = Vec::new();
        for i in 0..n - 1 {
            edges.push((i, i + 1, 1.0));
            edges.push((i + 1, i, 1.0));
        }
        ExplicitGraph::new(pos, &edges)
    }

    #[test]
    fn robot_steps_onto_only_dense_neighbor() {
        let g = line(3);
        let mut fleet = FleetState::new(vec![NodeId(0)]);
        let mut d = DensityField::from_values(vec![0.0, 2.0, 0.0]);
        let out = algorithm1_step(&g, &mut fleet, &mut d, &BlockedEdges::new(), &PlannerParams::new(0.1));
        assert_eq!(fleet.positions, vec![NodeId(1)]);
        assert!(d.is_all_zero());
        assert_eq!(out.start_cost.total, 2.0);
        assert_eq!(out.end_cost.total, 0.0);
        assert_eq!(out.visited, vec![NodeId(1)]);
    }

    #[test]
    fn robot_stays_when_every_move_costs_more() {
        // Balanced density on both sides: stepping either way does not help.
        let g = line(3);
        let mut fleet = FleetState::new(vec![NodeId(1)]);
        let mut d = DensityField::from_values(vec![1.0, 0.0, 1.0]);
        let out = algorithm1_step(&g, &mut fleet, &mut d, &BlockedEdges::new(), &PlannerParams::new(0.0));
        assert!(out.moves.is_empty());
        assert_eq!(fleet.positions, vec![NodeId(1)]);
        assert_eq!(out.start_cost.total, out.end_cost.total);
    }

    #[test]
    fn blocked_edge_prevents_move() {
        let g = line(3);
        let mut blocked = BlockedEdges::new();
        blocked.insert(g.find_edge(NodeId(0), NodeId(1)).unwrap());
        let mut fleet = FleetState::new(vec![NodeId(0)]);
        let mut d = DensityField::from_values(vec![0.0, 2.0, 0.0]);
        let out = algorithm1_step(&g, &mut fleet, &mut d, &blocked, &PlannerParams::new(0.1));
        assert!(out.moves.is_empty());
        assert_eq!(d.values()[1], 2.0);
    }

    #[test]
    fn robots_do_not_stack() {
        let g = line(3);
        let mut fleet = FleetState::new(vec![NodeId(0), NodeId(1)]);
        let mut d = DensityField::from_values(vec![0.0, 0.0, 5.0]);
        algorithm1_step(&g, &mut fleet, &mut d, &BlockedEdges::new(), &PlannerParams::new(0.1));
        // Robot 0 cannot enter node 1 while robot 1 is there; robot 1 moves on.
        assert_eq!(fleet.positions, vec![NodeId(0), NodeId(2)]);
        assert_eq!(fleet.history[1], vec![NodeId(1), NodeId(2)]);
    }
}
