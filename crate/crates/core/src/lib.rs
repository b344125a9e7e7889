//! Adaptive multi-robot coverage on weighted field graphs.
//!
//! A field of plant rows becomes a directed graph whose edge weights react to
//! moving obstacles and muddy patches. Robots split the field into cells by
//! turn-penalized route cost and greedily step to whichever neighbor lowers
//! the density-weighted coverage cost, zeroing density where they pass.

pub mod density;
pub mod field_graph;
pub mod geometry;
pub mod hazard;
pub mod output;
pub mod planner;
pub mod scenario;
pub mod trace;

pub use density::{gaussian_density, DensityField, GaussianSpec};
pub use field_graph::{build_graph, BuildOutcome, Digraph, EdgeId, ExplicitGraph, FieldGraph, NodeId};
pub use geometry::{Point, Polygon, Rectangle};
pub use hazard::{BlockedEdges, HazardParams, Obstacle, TerrainPatch};
pub use planner::{FleetState, PlannerParams, Simulation};
pub use scenario::{load_scenario, Scenario};
pub use trace::{SimTrace, Termination};
