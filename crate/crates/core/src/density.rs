//! Per-node importance values.

use serde::{Deserialize, Serialize};

use crate::field_graph::{Digraph, NodeId};
use crate::geometry::Point;

/// Nonnegative importance per node. Visiting a node zeroes it for good.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    values: Vec<f64>,
}

impl DensityField {
    /// Negative or non-finite inputs are clamped to zero.
    pub fn from_values(values: Vec<f64>) -> Self {
        let values = values
            .into_iter()
            .map(|v| if v.is_finite() && v > 0.0 { v } else { 0.0 })
            .collect();
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![0.0; len] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, node: NodeId) -> f64 {
        self.values[node.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Marks `node` as serviced. Returns whether it carried positive density.
    pub fn visit(&mut self, node: NodeId) -> bool {
        let was_positive = self.values[node.0] > 0.0;
        self.values[node.0] = 0.0;
        was_positive
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn positive_nodes(&self) -> Vec<NodeId> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, _)| NodeId(i))
            .collect()
    }
}

/// Parameters of a truncated Gaussian importance bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub center: Point,
    pub sigma: f64,
    pub amplitude: f64,
    pub floor: f64,
}

impl GaussianSpec {
    pub fn value_at(&self, p: Point) -> f64 {
        let d2 = p.sub(self.center).dot(p.sub(self.center));
        let v = self.amplitude * (-d2 / (2.0 * self.sigma * self.sigma)).exp();
        if v > self.floor {
            v
        } else {
            0.0
        }
    }
}

/// Samples `amplitude * exp(-|p - center|^2 / (2 sigma^2))` at every node,
/// zeroing values at or below `floor` so coverage can finish.
///
/// Panics on `sigma <= 0`, `amplitude < 0` or `floor < 0`; scenario loading
/// validates these first. A zero amplitude yields an all-zero field.
pub fn gaussian_density<G: Digraph>(graph: &G, spec: &GaussianSpec) -> DensityField {
    assert!(spec.sigma > 0.0, "sigma must be positive");
    assert!(spec.amplitude >= 0.0, "amplitude must be nonnegative");
    assert!(spec.floor >= 0.0, "floor must be nonnegative");
    let values = (0..graph.node_count())
        .map(|i| spec.value_at(graph.position(NodeId(i))))
        .collect();
    DensityField::from_values(values)
}
