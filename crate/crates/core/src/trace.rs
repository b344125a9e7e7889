//! Simulation trace records and audits over them.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::field_graph::NodeId;
use crate::hazard::ObstacleSnapshot;
use crate::planner::RobotMove;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    Covered,
    IterationCap,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Covered => "COVERED",
            Termination::IterationCap => "ITERATION_CAP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Positions when the iteration began.
    pub start_positions: Vec<NodeId>,
    /// Positions after the moves of this iteration.
    pub positions: Vec<NodeId>,
    pub moves: Vec<RobotMove>,
    /// Locational cost at the start positions (before any move).
    pub h_start: f64,
    pub h_start_per_robot: Vec<f64>,
    /// Locational cost after the moves and density visits.
    pub h_total: f64,
    pub h_per_robot: Vec<f64>,
    /// Sum of the density left after this iteration.
    pub phi_remaining: f64,
    /// Partition the robots planned against at the start of the iteration.
    pub owners: Vec<Option<usize>>,
    pub owner_digest: String,
    pub weights_digest: String,
    /// Directed edges occupied by obstacles during this iteration.
    pub blocked: Vec<(NodeId, NodeId)>,
    pub obstacles: Vec<ObstacleSnapshot>,
    /// Unreachable nodes that still carry density, after the moves.
    pub coverage_gaps: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub initial_positions: Vec<NodeId>,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    pub final_positions: Vec<NodeId>,
    /// Nodes still carrying density when the run stopped.
    pub unvisited: Vec<NodeId>,
    /// Subset of `unvisited` that no robot can reach.
    pub coverage_gaps: Vec<NodeId>,
    pub history: Vec<Vec<NodeId>>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SimTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn cost_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.h_total).collect()
    }

    pub fn robot_count(&self) -> usize {
        self.initial_positions.len()
    }

    /// Robot moves that drove an edge occupied by an obstacle during the same
    /// iteration, judged from the obstacle snapshots alone.
    pub fn collision_violations(&self) -> Vec<(usize, RobotMove)> {
        let mut out = Vec::new();
        for r in &self.records {
            for m in &r.moves {
                let hit = r.obstacles.iter().filter(|o| o.active).any(|o| {
                    (o.edge_from == m.from && o.edge_to == m.to) || (o.edge_from == m.to && o.edge_to == m.from)
                });
                if hit {
                    out.push((r.iteration, m.clone()));
                }
            }
        }
        out
    }
}

/// Short stable digest (first 16 hex chars of SHA-256).
pub fn short_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn owners_digest(owners: &[Option<usize>]) -> String {
    let mut bytes = Vec::with_capacity(owners.len() * 8);
    for o in owners {
        let v = o.map_or(u64::MAX, |k| k as u64);
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    short_digest(&bytes)
}

pub fn weights_digest(weights: &[f64]) -> String {
    let bytes: Vec<u8> = weights.iter().flat_map(|w| w.to_bits().to_le_bytes()).collect();
    short_digest(&bytes)
}
