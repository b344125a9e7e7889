use std::time::Instant;

use log::debug;

use super::partition::compute_partition;
use super::path::PlannerParams;
use super::step::{algorithm1_step, FleetState};
use crate::density::DensityField;
use crate::field_graph::{Digraph, FieldGraph};
use crate::hazard::{
    activate_obstacles, advance_obstacles, recompute_effective_weights, BlockedEdges, HazardParams, Obstacle,
    ObstacleSnapshot, TerrainPatch,
};
use crate::trace::{owners_digest, weights_digest, IterationRecord, SimTrace, Termination};

/// Complete simulation state: field, fleet, density, and scripted hazards.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub graph: FieldGraph,
    pub fleet: FleetState,
    pub density: DensityField,
    pub obstacles: Vec<Obstacle>,
    pub patches: Vec<TerrainPatch>,
    pub hazard_params: HazardParams,
    pub planner_params: PlannerParams,
    /// Seconds of obstacle motion per iteration.
    pub dt: f64,
}

impl Simulation {
    /// Repeats {advance obstacles, re-weight edges, greedy step} until the
    /// density is exhausted or `max_iterations` steps have run.
    ///
    /// The starting nodes count as visited before the first iteration.
    pub fn run_until_covered(&mut self, max_iterations: usize) -> SimTrace {
        let started = Instant::now();
        let initial_positions = self.fleet.positions.clone();
        for &p in &initial_positions {
            self.density.visit(p);
        }

        let mut records = Vec::new();
        let mut blocked = BlockedEdges::new();
        let termination = loop {
            let iteration = records.len();
            if self.density.is_all_zero() {
                break Termination::Covered;
            }
            if iteration >= max_iterations {
                break Termination::IterationCap;
            }
            if iteration == 0 {
                activate_obstacles(&mut self.obstacles, 0);
            } else {
                advance_obstacles(&self.graph, &mut self.obstacles, self.dt, iteration);
            }
            blocked = recompute_effective_weights(&mut self.graph, &self.obstacles, &self.patches, &self.hazard_params);
            let start_positions = self.fleet.positions.clone();
            let outcome = algorithm1_step(
                &self.graph,
                &mut self.fleet,
                &mut self.density,
                &blocked,
                &self.planner_params,
            );
            debug!(
                "iter {iteration}: H {:.6} -> {:.6}, {} move(s), phi left {:.6}",
                outcome.start_cost.total,
                outcome.end_cost.total,
                outcome.moves.len(),
                self.density.total()
            );
            records.push(IterationRecord {
                iteration,
                start_positions,
                positions: self.fleet.positions.clone(),
                h_start: outcome.start_cost.total,
                h_start_per_robot: outcome.start_cost.per_robot.clone(),
                h_total: outcome.end_cost.total,
                h_per_robot: outcome.end_cost.per_robot.clone(),
                phi_remaining: self.density.total(),
                owner_digest: owners_digest(&outcome.start_partition.owner),
                owners: outcome.start_partition.owner,
                weights_digest: weights_digest(self.graph.effective_weights()),
                blocked: blocked.iter().map(|&e| self.graph.endpoints(e)).collect(),
                obstacles: self
                    .obstacles
                    .iter()
                    .map(|o| ObstacleSnapshot::capture(o, iteration))
                    .collect(),
                coverage_gaps: outcome.end_cost.coverage_gaps,
                moves: outcome.moves,
            });
        };

        let unvisited = self.density.positive_nodes();
        let coverage_gaps = if unvisited.is_empty() {
            Vec::new()
        } else {
            let partition = compute_partition(&self.graph, &self.fleet.positions, &self.planner_params, &blocked);
            unvisited
                .iter()
                .copied()
                .filter(|v| partition.owner[v.0].is_none())
                .collect()
        };

        SimTrace {
            initial_positions,
            records,
            termination,
            final_positions: self.fleet.positions.clone(),
            unvisited,
            coverage_gaps,
            history: self.fleet.history.clone(),
            wall_time: started.elapsed(),
        }
    }
}
