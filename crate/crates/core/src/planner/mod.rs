//! Coverage planning: turn-aware route costs, partitioning, the locational
//! cost, and the greedy deployment loop.

mod partition;
mod path;
mod run;
mod step;

pub use partition::{compute_partition, locational_cost, robot_costs, CostBreakdown, PartitionMap};
pub use path::{cost_row, costs_tie, definitely_less, path_cost, turn_cost, PathResult, PlannerParams, SearchTree};
pub use run::Simulation;
pub use step::{algorithm1_step, CostCache, FleetState, RobotMove, StepOutcome};
