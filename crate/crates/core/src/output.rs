//! Trace artifacts: CSV tables and optional SVG renders.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::field_graph::{Digraph, FieldGraph, NodeId};
use crate::geometry::Point;
use crate::hazard::{ObstacleSnapshot, TerrainPatch};
use crate::trace::SimTrace;

/// Iterations per render bucket.
pub const RENDER_BUCKET: usize = 10;

#[derive(Debug, Error)]
#[error("cannot write {path}: {source}")]
pub struct IoError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, IoError> {
    fs::write(&path, contents).map_err(|source| IoError {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// `iteration,H_total,H_robot_0..,phi_remaining`, one row per iteration,
/// costs taken after that iteration's moves.
pub fn cost_csv(trace: &SimTrace) -> String {
    let mut out = String::from("iteration,H_total");
    for k in 0..trace.robot_count() {
        let _ = write!(out, ",H_robot_{k}");
    }
    out.push_str(",phi_remaining\n");
    for r in &trace.records {
        let _ = write!(out, "{},{:.6}", r.iteration, r.h_total);
        for h in &r.h_per_robot {
            let _ = write!(out, ",{h:.6}");
        }
        let _ = writeln!(out, ",{:.6}", r.phi_remaining);
    }
    out
}

/// Robot positions at the start of every iteration, followed by the final
/// positions under the next iteration index.
pub fn trajectories_csv(trace: &SimTrace, graph: &FieldGraph) -> String {
    let mut out = String::from("iteration,robot,node,x,y\n");
    if trace.records.is_empty() {
        return out;
    }
    let mut block = |iteration: usize, positions: &[NodeId]| {
        for (k, &v) in positions.iter().enumerate() {
            let p = graph.position(v);
            let _ = writeln!(out, "{iteration},{k},{v},{:.6},{:.6}", p.x, p.y);
        }
    };
    for r in &trace.records {
        block(r.iteration, &r.start_positions);
    }
    block(trace.records.len(), &trace.final_positions);
    out
}

fn snapshot_point(graph: &FieldGraph, s: &ObstacleSnapshot) -> Point {
    let a = graph.position(s.edge_from);
    let b = graph.position(s.edge_to);
    a.add(b.sub(a).scale(s.progress))
}

pub fn obstacles_csv(trace: &SimTrace, graph: &FieldGraph) -> String {
    let mut out = String::from("iteration,id,edge_from,edge_to,progress,speed,active,x,y\n");
    for r in &trace.records {
        for s in &r.obstacles {
            let p = snapshot_point(graph, s);
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{:.6},{},{:.6},{:.6}",
                s.iteration,
                s.id,
                s.edge_from,
                s.edge_to,
                s.progress,
                s.speed,
                u8::from(s.active),
                p.x,
                p.y
            );
        }
    }
    out
}

/// Owner of every node at the start of each iteration; `-1` marks nodes no
/// robot can reach.
pub fn partitions_csv(trace: &SimTrace) -> String {
    let mut out = String::from("iteration,node,owner\n");
    for r in &trace.records {
        for (v, o) in r.owners.iter().enumerate() {
            let owner = o.map_or(-1, |k| k as i64);
            let _ = writeln!(out, "{},{v},{owner}", r.iteration);
        }
    }
    out
}

const ROBOT_COLORS: [&str; 6] = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"];

/// SVG of the field with robot and obstacle paths over `iterations`.
pub fn render_svg(
    trace: &SimTrace,
    graph: &FieldGraph,
    patches: &[TerrainPatch],
    iterations: std::ops::Range<usize>,
) -> String {
    let mut pts: Vec<Point> = graph.positions().to_vec();
    pts.extend(patches.iter().flat_map(|p| p.polygon.vertices.iter().copied()));
    let (min_x, max_x) = pts
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (min_y, max_y) = pts
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.y), b.max(p.y)));
    let margin = 1.0;
    let width = max_x - min_x + 2.0 * margin;
    let height = max_y - min_y + 2.0 * margin;
    // Flip y so north is up.
    let tx = |p: Point| (p.x - min_x + margin, max_y - p.y + margin);
    let scale = 40.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {width:.3} {height:.3}">"#,
        width * scale,
        height * scale
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{width:.3}" height="{height:.3}" fill="#fbfaf5"/>"##
    );

    for patch in patches {
        let points: Vec<String> = patch
            .polygon
            .vertices
            .iter()
            .map(|&v| {
                let (x, y) = tx(v);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polygon points="{}" fill="#8b5a2b" fill-opacity="0.35" stroke="#5c3a1a" stroke-width="0.03"/>"##,
            points.join(" ")
        );
    }
    for r in graph.rectangles() {
        let (x, y) = tx(Point::new(r.min.x, r.max.y));
        let _ = writeln!(
            s,
            r##"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="#7cb342" fill-opacity="0.6"/>"##,
            r.max.x - r.min.x,
            r.max.y - r.min.y
        );
    }
    for &(a, b) in graph.edges() {
        if a < b {
            let ((x1, y1), (x2, y2)) = (tx(graph.position(a)), tx(graph.position(b)));
            let _ = writeln!(
                s,
                r##"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#cccccc" stroke-width="0.02"/>"##
            );
        }
    }
    for v in 0..graph.node_count() {
        let (x, y) = tx(graph.position(NodeId(v)));
        let _ = writeln!(s, r##"<circle cx="{x:.3}" cy="{y:.3}" r="0.06" fill="#d62728"/>"##);
    }

    let records: Vec<_> = trace
        .records
        .iter()
        .filter(|r| iterations.contains(&r.iteration))
        .collect();
    for k in 0..trace.robot_count() {
        let mut path: Vec<NodeId> = records.iter().map(|r| r.start_positions[k]).collect();
        if let Some(last) = records.last() {
            path.push(last.positions[k]);
        }
        if path.len() < 2 {
            continue;
        }
        let points: Vec<String> = path
            .iter()
            .map(|&v| {
                let (x, y) = tx(graph.position(v));
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let color = ROBOT_COLORS[k % ROBOT_COLORS.len()];
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="0.08"/>"#,
            points.join(" ")
        );
    }
    let mut ids: Vec<u32> = records.iter().flat_map(|r| r.obstacles.iter().map(|o| o.id)).collect();
    ids.sort_unstable();
    ids.dedup();
    for id in ids {
        let points: Vec<String> = records
            .iter()
            .flat_map(|r| r.obstacles.iter())
            .filter(|o| o.id == id && o.active)
            .map(|o| {
                let (x, y) = tx(snapshot_point(graph, o));
                format!("{x:.3},{y:.3}")
            })
            .collect();
        if points.is_empty() {
            continue;
        }
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#000000" stroke-width="0.05" stroke-dasharray="0.15 0.1"/>"##,
            points.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes the CSV tables, and the SVG renders when `render` is set, into
/// `out_dir`. Returns the written paths in a fixed order.
pub fn emit_outputs(
    trace: &SimTrace,
    graph: &FieldGraph,
    patches: &[TerrainPatch],
    out_dir: &Path,
    render: bool,
) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(out_dir).map_err(|source| IoError {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = vec![
        write_file(out_dir.join("cost.csv"), &cost_csv(trace))?,
        write_file(out_dir.join("trajectories.csv"), &trajectories_csv(trace, graph))?,
        write_file(out_dir.join("obstacles.csv"), &obstacles_csv(trace, graph))?,
        write_file(out_dir.join("partitions.csv"), &partitions_csv(trace))?,
    ];
    if render {
        let all = 0..trace.iterations().max(1);
        written.push(write_file(
            out_dir.join("field.svg"),
            &render_svg(trace, graph, patches, all),
        )?);
        for start in (0..trace.iterations()).step_by(RENDER_BUCKET) {
            let range = start..start + RENDER_BUCKET;
            let name = format!("field_{:04}-{:04}.svg", range.start, range.end - 1);
            written.push(write_file(
                out_dir.join(name),
                &render_svg(trace, graph, patches, range),
            )?);
        }
    }
    Ok(written)
}

/// Summed Euclidean length of every robot's trajectory.
pub fn fleet_path_length(trace: &SimTrace, graph: &FieldGraph) -> f64 {
    trace
        .history
        .iter()
        .map(|h| {
            h.windows(2)
                .map(|w| graph.position(w[0]).distance(graph.position(w[1])))
                .sum::<f64>()
        })
        .sum()
}
