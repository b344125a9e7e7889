//! Field graph construction from plant-row rectangles.
//!
//! Nodes are the deduplicated rectangle corners. They are numbered column by
//! column from the left, and top to bottom inside a column, so node 0 is the
//! top-left corner of the field. Directed edges join every pair of nodes that
//! lie within the connection radius, unless the straight segment between them
//! would drive through a plant row.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, Rectangle, GEOM_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("field has no rectangles")]
    EmptyField,
    #[error("rectangle {index} is degenerate or not finite")]
    InvalidRectangle { index: usize },
    #[error("rectangles {first} and {second} overlap")]
    OverlappingRectangles { first: usize, second: usize },
    #[error("connection radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
}

/// Non-fatal findings from [`build_graph`].
#[derive(Debug, Clone, PartialEq)]
pub enum BuildWarning {
    /// The graph is not strongly connected. Later hazards may sever regions
    /// anyway, so this is reported rather than rejected.
    DisconnectedGraph { components: usize },
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub graph: FieldGraph,
    pub warnings: Vec<BuildWarning>,
}

/// Read access to a directed graph with planar node positions and edge costs.
///
/// Edge ids are dense in `0..edge_count()`, and the outgoing edges of a node
/// form a contiguous id range sorted by head node.
pub trait Digraph {
    fn node_count(&self) -> usize;
    fn edge_count(&self) -> usize;
    fn position(&self, node: NodeId) -> Point;
    fn out_edges(&self, node: NodeId) -> Range<usize>;
    fn endpoints(&self, edge: EdgeId) -> (NodeId, NodeId);
    /// Cost used for planning.
    fn weight(&self, edge: EdgeId) -> f64;

    /// Heads of the outgoing edges of `node`, i.e. its neighbor set.
    fn neighbors(&self, node: NodeId) -> Vec<NodeId> {
        self.out_edges(node).map(|e| self.endpoints(EdgeId(e)).1).collect()
    }

    fn find_edge(&self, from: NodeId, to: NodeId) -> Option<EdgeId> {
        let range = self.out_edges(from);
        let start = range.start;
        let heads: Vec<NodeId> = range.map(|e| self.endpoints(EdgeId(e)).1).collect();
        heads.binary_search(&to).ok().map(|i| EdgeId(start + i))
    }
}

/// Compressed adjacency shared by [`FieldGraph`] and [`ExplicitGraph`].
#[derive(Debug, Clone, PartialEq)]
struct Adjacency {
    edges: Vec<(NodeId, NodeId)>,
    offsets: Vec<usize>,
}

impl Adjacency {
    fn new(node_count: usize, mut edges: Vec<(NodeId, NodeId)>) -> Self {
        edges.sort();
        edges.dedup();
        let mut offsets = vec![0; node_count + 1];
        for &(from, _) in &edges {
            offsets[from.0 + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        Self { edges, offsets }
    }

    fn range(&self, node: NodeId) -> Range<usize> {
        self.offsets[node.0]..self.offsets[node.0 + 1]
    }
}

/// The weighted directed field graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGraph {
    positions: Vec<Point>,
    adjacency: Adjacency,
    base_weight: Vec<f64>,
    effective_weight: Vec<f64>,
    rectangles: Vec<Rectangle>,
}

impl FieldGraph {
    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn rectangles(&self) -> &[Rectangle] {
        &self.rectangles
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.adjacency.edges
    }

    pub fn base_weight(&self, edge: EdgeId) -> f64 {
        self.base_weight[edge.0]
    }

    pub fn effective_weight(&self, edge: EdgeId) -> f64 {
        self.effective_weight[edge.0]
    }

    pub fn effective_weights(&self) -> &[f64] {
        &self.effective_weight
    }

    pub fn reset_effective_weights(&mut self) {
        self.effective_weight.copy_from_slice(&self.base_weight);
    }

    /// Adds a nonnegative penalty on top of the current effective weight.
    pub fn add_penalty(&mut self, edge: EdgeId, penalty: f64) {
        debug_assert!(penalty >= 0.0);
        self.effective_weight[edge.0] += penalty;
    }

    pub fn reverse_edge(&self, edge: EdgeId) -> Option<EdgeId> {
        let (from, to) = self.endpoints(edge);
        self.find_edge(to, from)
    }

    pub fn segment(&self, edge: EdgeId) -> (Point, Point) {
        let (a, b) = self.endpoints(edge);
        (self.positions[a.0], self.positions[b.0])
    }

    pub fn is_strongly_connected(&self) -> bool {
        strongly_connected_components(self) <= 1
    }

    /// One line per edge: `from to base effective`, weights with 6 decimals.
    pub fn adjacency_dump(&self) -> String {
        let mut out = String::new();
        for (e, &(from, to)) in self.adjacency.edges.iter().enumerate() {
            let _ = writeln!(
                out,
                "{} {} {:.6} {:.6}",
                from.0, to.0, self.base_weight[e], self.effective_weight[e]
            );
        }
        out
    }
}

impl Digraph for FieldGraph {
    fn node_count(&self) -> usize {
        self.positions.len()
    }

    fn edge_count(&self) -> usize {
        self.adjacency.edges.len()
    }

    fn position(&self, node: NodeId) -> Point {
        self.positions[node.0]
    }

    fn out_edges(&self, node: NodeId) -> Range<usize> {
        self.adjacency.range(node)
    }

    fn endpoints(&self, edge: EdgeId) -> (NodeId, NodeId) {
        self.adjacency.edges[edge.0]
    }

    fn weight(&self, edge: EdgeId) -> f64 {
        self.effective_weight[edge.0]
    }
}

/// A digraph with caller-supplied positions and weights. Weights need not be
/// Euclidean; useful for synthetic planner inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitGraph {
    positions: Vec<Point>,
    adjacency: Adjacency,
    weights: Vec<f64>,
}

impl ExplicitGraph {
    /// `edges` holds `(from, to, weight)`; duplicate pairs keep the first weight.
    pub fn new(positions: Vec<Point>, edges: &[(usize, usize, f64)]) -> Self {
        let mut list: Vec<(NodeId, NodeId, f64)> = edges.iter().map(|&(a, b, w)| (NodeId(a), NodeId(b), w)).collect();
        list.sort_by_key(|x| (x.0, x.1));
        list.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1);
        let adjacency = Adjacency::new(positions.len(), list.iter().map(|e| (e.0, e.1)).collect());
        let weights = list.iter().map(|e| e.2).collect();
        Self {
            positions,
            adjacency,
            weights,
        }
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.adjacency.edges
    }

    /// Copy with positions and weights multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            positions: self.positions.iter().map(|p| p.scale(s)).collect(),
            adjacency: self.adjacency.clone(),
            weights: self.weights.iter().map(|w| w * s).collect(),
        }
    }
}

impl Digraph for ExplicitGraph {
    fn node_count(&self) -> usize {
        self.positions.len()
    }

    fn edge_count(&self) -> usize {
        self.adjacency.edges.len()
    }

    fn position(&self, node: NodeId) -> Point {
        self.positions[node.0]
    }

    fn out_edges(&self, node: NodeId) -> Range<usize> {
        self.adjacency.range(node)
    }

    fn endpoints(&self, edge: EdgeId) -> (NodeId, NodeId) {
        self.adjacency.edges[edge.0]
    }

    fn weight(&self, edge: EdgeId) -> f64 {
        self.weights[edge.0]
    }
}

/// Number of strongly connected components (Kosaraju).
pub fn strongly_connected_components<G: Digraph>(graph: &G) -> usize {
    let n = graph.node_count();
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in 0..graph.edge_count() {
        let (a, b) = graph.endpoints(EdgeId(e));
        reverse[b.0].push(a.0);
    }

    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, graph.out_edges(NodeId(root)))];
        while let Some((node, mut it)) = stack.pop() {
            if let Some(e) = it.next() {
                stack.push((node, it));
                let head = graph.endpoints(EdgeId(e)).1 .0;
                if !seen[head] {
                    seen[head] = true;
                    stack.push((head, graph.out_edges(NodeId(head))));
                }
            } else {
                order.push(node);
            }
        }
    }

    let mut component = vec![usize::MAX; n];
    let mut count = 0;
    for &root in order.iter().rev() {
        if component[root] != usize::MAX {
            continue;
        }
        let mut queue = VecDeque::from([root]);
        component[root] = count;
        while let Some(node) = queue.pop_front() {
            for &prev in &reverse[node] {
                if component[prev] == usize::MAX {
                    component[prev] = count;
                    queue.push_back(prev);
                }
            }
        }
        count += 1;
    }
    count
}

fn dedup_corners(rectangles: &[Rectangle]) -> Vec<Point> {
    let mut corners: Vec<Point> = rectangles.iter().flat_map(|r| r.corners()).collect();
    corners.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));

    let mut unique: Vec<Point> = Vec::with_capacity(corners.len());
    for p in corners {
        let duplicate = unique
            .iter()
            .rev()
            .take_while(|q| p.x - q.x <= GEOM_EPS)
            .any(|q| (p.y - q.y).abs() <= GEOM_EPS);
        if !duplicate {
            unique.push(p);
        }
    }
    unique
}

/// Column-major numbering from the top-left corner.
fn number_nodes(mut points: Vec<Point>) -> Vec<Point> {
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut numbered = Vec::with_capacity(points.len());
    let mut start = 0;
    while start < points.len() {
        let column_x = points[start].x;
        let mut end = start;
        while end < points.len() && points[end].x - column_x <= GEOM_EPS {
            end += 1;
        }
        let mut column = points[start..end].to_vec();
        column.sort_by(|a, b| b.y.total_cmp(&a.y).then(a.x.total_cmp(&b.x)));
        numbered.extend(column);
        start = end;
    }
    numbered
}

/// Builds the field graph from plant-row rectangles.
pub fn build_graph(rectangles: &[Rectangle], connection_radius: f64) -> Result<BuildOutcome, GraphError> {
    if rectangles.is_empty() {
        return Err(GraphError::EmptyField);
    }
    if !(connection_radius > 0.0 && connection_radius.is_finite()) {
        return Err(GraphError::InvalidRadius(connection_radius));
    }
    if let Some(index) = rectangles.iter().position(|r| !r.is_valid()) {
        return Err(GraphError::InvalidRectangle { index });
    }
    for i in 0..rectangles.len() {
        for j in (i + 1)..rectangles.len() {
            if rectangles[i].interiors_overlap(&rectangles[j]) {
                return Err(GraphError::OverlappingRectangles { first: i, second: j });
            }
        }
    }

    let positions = number_nodes(dedup_corners(rectangles));
    let n = positions.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (positions[i], positions[j]);
            if a.distance(b) > connection_radius + GEOM_EPS {
                continue;
            }
            if rectangles.iter().any(|r| r.segment_crosses_interior(a, b)) {
                continue;
            }
            edges.push((NodeId(i), NodeId(j)));
            edges.push((NodeId(j), NodeId(i)));
        }
    }
    let adjacency = Adjacency::new(n, edges);
    let base_weight: Vec<f64> = adjacency
        .edges
        .iter()
        .map(|&(a, b)| positions[a.0].distance(positions[b.0]))
        .collect();

    // Canonical rectangle order keeps the output independent of input order.
    let mut sorted_rects = rectangles.to_vec();
    sorted_rects.sort_by(|a, b| {
        a.min
            .x
            .total_cmp(&b.min.x)
            .then(b.max.y.total_cmp(&a.max.y))
            .then(a.max.x.total_cmp(&b.max.x))
            .then(a.min.y.total_cmp(&b.min.y))
    });

    let graph = FieldGraph {
        positions,
        adjacency,
        effective_weight: base_weight.clone(),
        base_weight,
        rectangles: sorted_rects,
    };
    let components = strongly_connected_components(&graph);
    let warnings = if components > 1 {
        vec![BuildWarning::DisconnectedGraph { components }]
    } else {
        Vec::new()
    };
    Ok(BuildOutcome { graph, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Rectangle {
        Rectangle::new((x0, y0), (x1, y1))
    }

    #[test]
    fn single_rectangle_has_perimeter_only() {
        let out = build_graph(&[rect(0.0, 0.0, 2.0, 1.0)], 3.0).unwrap();
        let g = out.graph;
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 8);
        let mut weights: Vec<f64> = (0..8).map(|e| g.base_weight(EdgeId(e))).collect();
        weights.sort_by(f64::total_cmp);
        assert_eq!(weights, vec![1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0]);
        assert!(out.warnings.is_empty());
        // Node 0 is the top-left corner, node 1 the bottom-left.
        assert_eq!(g.position(NodeId(0)), Point::new(0.0, 1.0));
        assert_eq!(g.position(NodeId(1)), Point::new(0.0, 0.0));
        assert_eq!(g.position(NodeId(2)), Point::new(2.0, 1.0));
    }

    #[test]
    fn stacked_rectangles_share_corners() {
        let out = build_graph(&[rect(0.0, 0.0, 2.0, 1.0), rect(0.0, 1.0, 2.0, 2.0)], 3.0).unwrap();
        assert_eq!(out.graph.node_count(), 6);
    }

    #[test]
    fn near_coincident_corners_merge() {
        let out = build_graph(&[rect(0.0, 0.0, 2.0, 1.0), rect(0.0, 1.0 + 1e-10, 2.0, 2.0)], 3.0).unwrap();
        assert_eq!(out.graph.node_count(), 6);
    }

    #[test]
    fn empty_field_is_rejected() {
        assert_eq!(build_graph(&[], 1.0).unwrap_err(), GraphError::EmptyField);
    }

    #[test]
    fn overlapping_rectangles_are_rejected() {
        let err = build_graph(&[rect(0.0, 0.0, 2.0, 2.0), rect(1.0, 1.0, 3.0, 3.0)], 3.0).unwrap_err();
        assert_eq!(err, GraphError::OverlappingRectangles { first: 0, second: 1 });
    }

    #[test]
    fn bad_radius_is_rejected() {
        assert!(matches!(
            build_graph(&[rect(0.0, 0.0, 1.0, 1.0)], 0.0),
            Err(GraphError::InvalidRadius(_))
        ));
    }

    #[test]
    fn short_radius_reports_disconnection() {
        // Long sides (4 m) exceed the radius, leaving top and bottom pairs apart.
        let out = build_graph(&[rect(0.0, 0.0, 1.0, 4.0)], 1.5).unwrap();
        assert_eq!(out.warnings, vec![BuildWarning::DisconnectedGraph { components: 2 }]);
        assert!(!out.graph.is_strongly_connected());
    }

    #[test]
    fn adjacency_dump_format() {
        let g = build_graph(&[rect(0.0, 0.0, 2.0, 1.0)], 3.0).unwrap().graph;
        let dump = g.adjacency_dump();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines.len(), 8);
        assert_eq!(lines[0], "0 1 1.000000 1.000000");
        assert_eq!(lines[1], "0 2 2.000000 2.000000");
    }

    #[test]
    fn explicit_graph_lookup() {
        let g = ExplicitGraph::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)],
            &[(0, 2, 5.0), (0, 1, 1.0), (1, 2, 1.0)],
        );
        assert_eq!(g.neighbors(NodeId(0)), vec![NodeId(1), NodeId(2)]);
        assert_eq!(g.find_edge(NodeId(0), NodeId(2)), Some(EdgeId(1)));
        assert_eq!(g.find_edge(NodeId(2), NodeId(0)), None);
        assert_eq!(g.weight(EdgeId(1)), 5.0);
    }
}
