//! Versioned scenario documents: parsing, validation, and the bundled library.
//!
//! Documents are TOML. Field names carry their units (`sigma_m`,
//! `speed_mps`) so a document is unambiguous without the code at hand.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{gaussian_density, GaussianSpec};
use crate::field_graph::{build_graph, BuildOutcome, Digraph, GraphError, NodeId};
use crate::geometry::{Point, Polygon, Rectangle};
use crate::hazard::{HazardParams, Obstacle, TerrainPatch};
use crate::planner::{FleetState, PlannerParams, Simulation};
use crate::trace::SimTrace;

pub const SCHEMA_VERSION: u32 = 1;

/// Bundled scenarios as `(name, document)`.
pub const BUNDLED: [(&str, &str); 4] = [
    ("baseline", include_str!("../scenarios/baseline.toml")),
    ("obstacle_regular", include_str!("../scenarios/obstacle_regular.toml")),
    ("obstacle_sudden", include_str!("../scenarios/obstacle_sudden.toml")),
    ("mud", include_str!("../scenarios/mud.toml")),
];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Offending field of a validation error.
    pub fn field(&self) -> Option<&str> {
        match self {
            ScenarioError::Validation { field, .. } => Some(field),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectangleDoc {
    pub min_m: [f64; 2],
    pub max_m: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityDoc {
    pub center_m: [f64; 2],
    pub sigma_m: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleDoc {
    pub id: u32,
    /// Directed start edge `[from, to]` as node indices.
    pub edge: [usize; 2],
    #[serde(default)]
    pub progress: f64,
    pub speed_mps: f64,
    /// Direction of motion; defaults to the start edge's direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<[f64; 2]>,
    #[serde(default)]
    pub appears_at: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchDoc {
    pub vertices_m: Vec<[f64; 2]>,
    pub severity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HazardDoc {
    pub alpha_m: f64,
    pub v0_mps: f64,
    pub d0_m: f64,
    pub beta_m: f64,
    pub propagation_count: usize,
}

impl Default for HazardDoc {
    fn default() -> Self {
        let p = HazardParams::default();
        Self {
            alpha_m: p.alpha,
            v0_mps: p.v0,
            d0_m: p.d0,
            beta_m: p.beta,
            propagation_count: p.propagation_count,
        }
    }
}

fn default_threshold() -> f64 {
    90.0
}

fn default_dt() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerDoc {
    pub lambda_m: f64,
    #[serde(default = "default_threshold")]
    pub turn_threshold_deg: f64,
}

impl Default for PlannerDoc {
    fn default() -> Self {
        Self {
            lambda_m: PlannerParams::default().lambda,
            turn_threshold_deg: default_threshold(),
        }
    }
}

/// A complete, validated scenario. Optional document fields are filled with
/// their defaults, so serializing and reloading yields an equal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub connection_radius_m: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    pub max_iterations: usize,
    #[serde(default)]
    pub seed: u64,
    pub robots: Vec<usize>,
    pub rectangles: Vec<RectangleDoc>,
    pub density: DensityDoc,
    #[serde(default)]
    pub hazard: HazardDoc,
    #[serde(default)]
    pub planner: PlannerDoc,
    #[serde(default)]
    pub obstacles: Vec<ObstacleDoc>,
    #[serde(default)]
    pub patches: Vec<PatchDoc>,
}

fn point(p: [f64; 2]) -> Point {
    Point::new(p[0], p[1])
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parses and validates a scenario document.
pub fn load_scenario(document: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = toml::from_str(document).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(document, s.start));
        ScenarioError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario_file(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_scenario(&text)
}

/// Loads one of the bundled scenarios by name.
pub fn bundled(name: &str) -> Option<Scenario> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, doc)| load_scenario(doc).expect("bundled scenario is valid"))
}

fn check(ok: bool, field: impl Into<String>, message: &str) -> Result<(), ScenarioError> {
    if ok {
        Ok(())
    } else {
        Err(ScenarioError::invalid(field, message))
    }
}

impl Scenario {
    pub fn rectangles(&self) -> Vec<Rectangle> {
        self.rectangles
            .iter()
            .map(|r| Rectangle::new(point(r.min_m), point(r.max_m)))
            .collect()
    }

    pub fn hazard_params(&self) -> HazardParams {
        HazardParams {
            alpha: self.hazard.alpha_m,
            v0: self.hazard.v0_mps,
            d0: self.hazard.d0_m,
            beta: self.hazard.beta_m,
            propagation_count: self.hazard.propagation_count,
        }
    }

    pub fn planner_params(&self) -> PlannerParams {
        PlannerParams {
            lambda: self.planner.lambda_m,
            turn_threshold_deg: self.planner.turn_threshold_deg,
        }
    }

    pub fn density_spec(&self) -> GaussianSpec {
        GaussianSpec {
            center: point(self.density.center_m),
            sigma: self.density.sigma_m,
            amplitude: self.density.amplitude,
            floor: self.density.floor,
        }
    }

    pub fn patches(&self) -> Vec<TerrainPatch> {
        self.patches
            .iter()
            .map(|p| TerrainPatch {
                polygon: Polygon::new(p.vertices_m.iter().copied().map(point).collect()),
                severity: p.severity,
            })
            .collect()
    }

    pub fn build_graph(&self) -> Result<BuildOutcome, ScenarioError> {
        build_graph(&self.rectangles(), self.connection_radius_m).map_err(|e| match e {
            GraphError::EmptyField => ScenarioError::invalid("rectangles", e.to_string()),
            GraphError::InvalidRectangle { index } => {
                ScenarioError::invalid(format!("rectangles[{index}]"), e.to_string())
            }
            GraphError::OverlappingRectangles { second, .. } => {
                ScenarioError::invalid(format!("rectangles[{second}]"), e.to_string())
            }
            GraphError::InvalidRadius(_) => ScenarioError::invalid("connection_radius_m", e.to_string()),
        })
    }

    /// Checks every invariant and cross-reference. Errors name the first
    /// offending field.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        check(
            self.schema_version == SCHEMA_VERSION,
            "schema_version",
            "unsupported schema version",
        )?;
        check(
            self.dt_s > 0.0 && self.dt_s.is_finite(),
            "dt_s",
            "must be positive and finite",
        )?;
        check(self.max_iterations > 0, "max_iterations", "must be positive")?;
        // TOML integers are signed.
        check(
            i64::try_from(self.seed).is_ok(),
            "seed",
            "must fit in a signed 64-bit integer",
        )?;

        let h = &self.hazard;
        check(
            h.alpha_m >= 0.0 && h.alpha_m.is_finite(),
            "hazard.alpha_m",
            "must be >= 0",
        )?;
        check(h.v0_mps > 0.0 && h.v0_mps.is_finite(), "hazard.v0_mps", "must be > 0")?;
        check(h.d0_m > 0.0 && h.d0_m.is_finite(), "hazard.d0_m", "must be > 0")?;
        check(h.beta_m >= 0.0 && h.beta_m.is_finite(), "hazard.beta_m", "must be >= 0")?;
        check(h.propagation_count >= 1, "hazard.propagation_count", "must be >= 1")?;
        let p = &self.planner;
        check(
            p.lambda_m >= 0.0 && p.lambda_m.is_finite(),
            "planner.lambda_m",
            "must be >= 0",
        )?;
        check(
            p.turn_threshold_deg > 0.0 && p.turn_threshold_deg <= 180.0,
            "planner.turn_threshold_deg",
            "must lie in (0, 180]",
        )?;

        let d = &self.density;
        check(
            d.center_m.iter().all(|v| v.is_finite()),
            "density.center_m",
            "must be finite",
        )?;
        check(
            d.sigma_m > 0.0 && d.sigma_m.is_finite(),
            "density.sigma_m",
            "must be > 0",
        )?;
        check(
            d.amplitude >= 0.0 && d.amplitude.is_finite(),
            "density.amplitude",
            "must be >= 0",
        )?;
        check(d.floor >= 0.0 && d.floor.is_finite(), "density.floor", "must be >= 0")?;

        let graph = self.build_graph()?.graph;
        let n = graph.node_count();

        check(!self.robots.is_empty(), "robots", "at least one robot is required")?;
        let mut seen = BTreeSet::new();
        for (i, &r) in self.robots.iter().enumerate() {
            check(
                r < n,
                format!("robots[{i}]"),
                &format!("node {r} does not exist ({n} nodes)"),
            )?;
            check(
                seen.insert(r),
                format!("robots[{i}]"),
                &format!("node {r} is already taken"),
            )?;
        }

        let mut ids = BTreeSet::new();
        for (i, o) in self.obstacles.iter().enumerate() {
            let [a, b] = o.edge;
            check(
                a < n && b < n && graph.find_edge(NodeId(a), NodeId(b)).is_some(),
                format!("obstacles[{i}].edge"),
                &format!("edge {a}->{b} does not exist"),
            )?;
            check(ids.insert(o.id), format!("obstacles[{i}].id"), "duplicate obstacle id")?;
            check(
                (0.0..=1.0).contains(&o.progress),
                format!("obstacles[{i}].progress"),
                "must lie in [0, 1]",
            )?;
            check(
                o.speed_mps >= 0.0 && o.speed_mps.is_finite(),
                format!("obstacles[{i}].speed_mps"),
                "must be >= 0",
            )?;
            if let Some(hd) = o.heading {
                check(
                    point(hd).normalized().is_some(),
                    format!("obstacles[{i}].heading"),
                    "must be a nonzero finite vector",
                )?;
            }
        }

        for (i, patch) in self.patches.iter().enumerate() {
            check(
                patch.vertices_m.len() >= 3,
                format!("patches[{i}].vertices_m"),
                "needs at least 3 vertices",
            )?;
            check(
                patch.vertices_m.iter().flatten().all(|v| v.is_finite()),
                format!("patches[{i}].vertices_m"),
                "must be finite",
            )?;
            let polygon = Polygon::new(patch.vertices_m.iter().copied().map(point).collect());
            check(
                polygon.is_simple(),
                format!("patches[{i}].vertices_m"),
                "polygon is not simple",
            )?;
            check(
                patch.severity >= 0.0 && patch.severity.is_finite(),
                format!("patches[{i}].severity"),
                "must be >= 0",
            )?;
        }
        Ok(())
    }

    /// Serializes to a document that [`load_scenario`] accepts.
    pub fn to_toml(&self) -> Result<String, ScenarioError> {
        self.validate()?;
        toml::to_string(self).map_err(|e| ScenarioError::invalid("", e.to_string()))
    }

    /// Builds the initial simulation state.
    pub fn build(&self) -> Result<Simulation, ScenarioError> {
        self.validate()?;
        let graph = self.build_graph()?.graph;
        let density = gaussian_density(&graph, &self.density_spec());
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| {
                let (a, b) = (NodeId(o.edge[0]), NodeId(o.edge[1]));
                let heading = o
                    .heading
                    .map(point)
                    .unwrap_or_else(|| graph.position(b).sub(graph.position(a)))
                    .normalized()
                    .expect("validated heading");
                Obstacle {
                    id: o.id,
                    edge: (a, b),
                    progress: o.progress,
                    speed: o.speed_mps,
                    heading,
                    appears_at: o.appears_at,
                    active: false,
                }
            })
            .collect();
        Ok(Simulation {
            fleet: FleetState::new(self.robots.iter().map(|&r| NodeId(r)).collect()),
            graph,
            density,
            obstacles,
            patches: self.patches(),
            hazard_params: self.hazard_params(),
            planner_params: self.planner_params(),
            dt: self.dt_s,
        })
    }

    /// Runs the scenario to coverage or its iteration cap.
    pub fn run(&self) -> Result<SimTrace, ScenarioError> {
        Ok(self.build()?.run_until_covered(self.max_iterations))
    }

    /// Copy with every length scaled by `s`: coordinates, radius, density
    /// width, turn penalty, and the length-valued hazard scalars. Speeds
    /// scale too, so obstacles cover the same fraction of each edge per tick.
    pub fn scaled(&self, s: f64) -> Scenario {
        assert!(s > 0.0 && s.is_finite(), "scale must be positive");
        let sc = |p: [f64; 2]| [p[0] * s, p[1] * s];
        let mut out = self.clone();
        out.connection_radius_m *= s;
        for r in &mut out.rectangles {
            r.min_m = sc(r.min_m);
            r.max_m = sc(r.max_m);
        }
        out.density.center_m = sc(out.density.center_m);
        out.density.sigma_m *= s;
        out.hazard.alpha_m *= s;
        out.hazard.beta_m *= s;
        out.hazard.d0_m *= s;
        out.hazard.v0_mps *= s;
        out.planner.lambda_m *= s;
        for o in &mut out.obstacles {
            o.speed_mps *= s;
        }
        for p in &mut out.patches {
            for v in &mut p.vertices_m {
                *v = sc(*v);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
connection_radius_m = 2.5
max_iterations = 10
robots = [0]

[[rectangles]]
min_m = [0.0, 0.0]
max_m = [2.0, 1.0]

[density]
center_m = [1.0, 0.5]
sigma_m = 1.0
amplitude = 0.0
"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let s = load_scenario(MINIMAL).unwrap();
        assert_eq!(s.dt_s, 1.0);
        assert_eq!(s.density.floor, 0.0);
        assert_eq!(s.planner.turn_threshold_deg, 90.0);
        assert_eq!(s.hazard_params(), HazardParams::default());
        let trace = s.run().unwrap();
        assert_eq!(trace.iterations(), 0);
        assert_eq!(trace.termination, crate::trace::Termination::Covered);
    }

    #[test]
    fn missing_schema_version_is_a_parse_error() {
        let doc = MINIMAL.replace("schema_version = 1", "");
        assert!(matches!(load_scenario(&doc), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn malformed_document_reports_line() {
        let doc = MINIMAL.replace("sigma_m = 1.0", "sigma_m = = 1.0");
        match load_scenario(&doc) {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 13),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oversized_seed_is_rejected() {
        let mut s = load_scenario(MINIMAL).unwrap();
        s.seed = u64::MAX;
        assert_eq!(s.validate().unwrap_err().field(), Some("seed"));
        assert!(s.to_toml().is_err());
    }

    #[test]
    fn dangling_robot_names_field() {
        let doc = MINIMAL.replace("robots = [0]", "robots = [999]");
        let err = load_scenario(&doc).unwrap_err();
        assert_eq!(err.field(), Some("robots[0]"));
    }

    #[test]
    fn duplicate_robot_names_second_entry() {
        let doc = MINIMAL.replace("robots = [0]", "robots = [1, 1]");
        assert_eq!(load_scenario(&doc).unwrap_err().field(), Some("robots[1]"));
    }

    #[test]
    fn overlapping_rectangles_rejected() {
        let doc = format!("{MINIMAL}\n[[rectangles]]\nmin_m = [1.0, 0.5]\nmax_m = [3.0, 2.0]\n");
        assert_eq!(load_scenario(&doc).unwrap_err().field(), Some("rectangles[1]"));
    }

    #[test]
    fn bow_tie_patch_rejected() {
        let doc = format!(
            "{MINIMAL}\n[[patches]]\nvertices_m = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]\nseverity = 1.0\n"
        );
        assert_eq!(load_scenario(&doc).unwrap_err().field(), Some("patches[0].vertices_m"));
    }

    #[test]
    fn dangling_obstacle_edge_rejected() {
        // Nodes 0 and 3 are diagonal corners; radius 2.5 connects them, but
        // node 7 does not exist.
        let doc = format!("{MINIMAL}\n[[obstacles]]\nid = 1\nedge = [0, 7]\nspeed_mps = 1.0\n");
        assert_eq!(load_scenario(&doc).unwrap_err().field(), Some("obstacles[0].edge"));
    }

    #[test]
    fn round_trip_preserves_value() {
        for (name, doc) in BUNDLED {
            let s = load_scenario(doc).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(load_scenario(&s.to_toml().unwrap()).unwrap(), s, "{name}");
        }
    }

    #[test]
    fn baseline_carries_reference_scalars() {
        let s = bundled("baseline").unwrap();
        let h = s.hazard_params();
        assert_eq!(
            (h.alpha, h.beta, h.v0, h.d0, h.propagation_count),
            (5.0, 1.0, 1.0, 1.0, 3)
        );
        assert_eq!(s.planner.lambda_m, 0.1);
        assert_eq!(s.robots.len(), 2);
        assert!(s.obstacles.is_empty() && s.patches.is_empty());
    }
}
