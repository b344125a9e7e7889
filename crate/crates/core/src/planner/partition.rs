//! Voronoi-like partition of the nodes among robots and the locational cost.

use serde::{Deserialize, Serialize};

use super::path::{cost_row, definitely_less, PlannerParams};
use crate::density::DensityField;
use crate::field_graph::{Digraph, NodeId};
use crate::hazard::BlockedEdges;

/// Node ownership. `owner[v] == None` only when no robot can reach `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionMap {
    pub owner: Vec<Option<usize>>,
    pub cost_to_owner: Vec<f64>,
}

impl PartitionMap {
    /// Assigns each node to the robot with the cheapest route; ties go to
    /// the lowest robot index. `costs[k][v]` is robot k's cost to node v.
    pub fn from_costs<C: AsRef<[f64]>>(costs: &[C]) -> Self {
        let n_nodes = costs.first().map_or(0, |c| c.as_ref().len());
        let mut owner = vec![None; n_nodes];
        let mut cost_to_owner = vec![f64::INFINITY; n_nodes];
        for v in 0..n_nodes {
            for (k, row) in costs.iter().enumerate() {
                let c = row.as_ref()[v];
                if c == f64::INFINITY {
                    continue;
                }
                let wins = match owner[v] {
                    None => true,
                    Some(_) => definitely_less(c, cost_to_owner[v]),
                };
                if wins {
                    owner[v] = Some(k);
                    cost_to_owner[v] = c;
                }
            }
        }
        Self { owner, cost_to_owner }
    }

    pub fn unassigned(&self) -> Vec<NodeId> {
        self.owner
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_none())
            .map(|(v, _)| NodeId(v))
            .collect()
    }

    pub fn cell(&self, robot: usize) -> Vec<NodeId> {
        self.owner
            .iter()
            .enumerate()
            .filter(|(_, o)| **o == Some(robot))
            .map(|(v, _)| NodeId(v))
            .collect()
    }
}

/// Cost-to-every-node for each robot position.
pub fn robot_costs<G: Digraph>(
    graph: &G,
    positions: &[NodeId],
    params: &PlannerParams,
    blocked: &BlockedEdges,
) -> Vec<Vec<f64>> {
    positions.iter().map(|&p| cost_row(graph, p, params, blocked)).collect()
}

/// Partition of the nodes among robots standing at `positions`.
pub fn compute_partition<G: Digraph>(
    graph: &G,
    positions: &[NodeId],
    params: &PlannerParams,
    blocked: &BlockedEdges,
) -> PartitionMap {
    assert!(!positions.is_empty(), "fleet must not be empty");
    PartitionMap::from_costs(&robot_costs(graph, positions, params, blocked))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub total: f64,
    pub per_robot: Vec<f64>,
    /// Unreachable nodes that still carry density.
    pub coverage_gaps: Vec<NodeId>,
}

/// Locational cost: density-weighted route cost from each robot to the nodes
/// of its own cell. A robot's own node contributes nothing. Unreachable
/// nodes are left out and listed as coverage gaps.
pub fn locational_cost(positions: &[NodeId], density: &DensityField, partition: &PartitionMap) -> CostBreakdown {
    let mut total = 0.0;
    let mut per_robot = vec![0.0; positions.len()];
    let mut coverage_gaps = Vec::new();
    for (v, owner) in partition.owner.iter().enumerate() {
        let phi = density.values()[v];
        match owner {
            None if phi > 0.0 => coverage_gaps.push(NodeId(v)),
            None => {}
            Some(k) => {
                if positions[*k] == NodeId(v) || phi == 0.0 {
                    continue;
                }
                let term = partition.cost_to_owner[v] * phi;
                total += term;
                per_robot[*k] += term;
            }
        }
    }
    CostBreakdown {
        total,
        per_robot,
        coverage_gaps,
    }
}
