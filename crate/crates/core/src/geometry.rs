//! Planar primitives: points, segments, axis-aligned rectangles and simple
//! polygons. All coordinates are meters, y pointing up.

use serde::{Deserialize, Serialize};

/// Tolerance for coincidence and boundary tests, in meters.
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        self.sub(other).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Axis-aligned rectangle bounding one detected plant row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub min: Point,
    pub max: Point,
}

impl Rectangle {
    pub fn new(min: impl Into<Point>, max: impl Into<Point>) -> Self {
        Self {
            min: min.into(),
            max: max.into(),
        }
    }

    pub fn is_valid(&self) -> bool {
        let finite = [self.min.x, self.min.y, self.max.x, self.max.y]
            .iter()
            .all(|v| v.is_finite());
        finite && self.min.x < self.max.x && self.min.y < self.max.y
    }

    /// Corners in the order top-left, top-right, bottom-left, bottom-right.
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.min.x, self.max.y),
            Point::new(self.max.x, self.max.y),
            Point::new(self.min.x, self.min.y),
            Point::new(self.max.x, self.min.y),
        ]
    }

    /// True when the open interiors intersect. Shared edges or corners do not count.
    pub fn interiors_overlap(&self, other: &Rectangle) -> bool {
        self.min.x < other.max.x - GEOM_EPS
            && other.min.x < self.max.x - GEOM_EPS
            && self.min.y < other.max.y - GEOM_EPS
            && other.min.y < self.max.y - GEOM_EPS
    }

    fn strictly_contains(&self, p: Point) -> bool {
        p.x > self.min.x + GEOM_EPS
            && p.x < self.max.x - GEOM_EPS
            && p.y > self.min.y + GEOM_EPS
            && p.y < self.max.y - GEOM_EPS
    }

    /// Whether the segment `a`–`b` passes through the open interior.
    ///
    /// The segment is clipped against the closed rectangle (Liang–Barsky).
    /// A chord of a convex region either runs along its boundary or has an
    /// interior midpoint, so testing the midpoint of the clipped part decides it.
    pub fn segment_crosses_interior(&self, a: Point, b: Point) -> bool {
        let d = b.sub(a);
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        let checks = [
            (-d.x, a.x - self.min.x),
            (d.x, self.max.x - a.x),
            (-d.y, a.y - self.min.y),
            (d.y, self.max.y - a.y),
        ];
        for (p, q) in checks {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        if t0 >= t1 {
            return false;
        }
        let mid = a.add(d.scale(0.5 * (t0 + t1)));
        self.strictly_contains(mid)
    }

    pub fn scaled(&self, s: f64) -> Rectangle {
        Rectangle {
            min: self.min.scale(s),
            max: self.max.scale(s),
        }
    }
}

fn orientation(a: Point, b: Point, c: Point) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn sign(v: f64, scale: f64) -> i8 {
    let tol = GEOM_EPS * scale.max(1.0);
    if v > tol {
        1
    } else if v < -tol {
        -1
    } else {
        0
    }
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) - GEOM_EPS
        && p.x <= a.x.max(b.x) + GEOM_EPS
        && p.y >= a.y.min(b.y) - GEOM_EPS
        && p.y <= a.y.max(b.y) + GEOM_EPS
}

/// Closed segment intersection, touching and collinear overlap included.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let scale = p1.distance(p2).max(q1.distance(q2));
    let o1 = sign(orientation(p1, p2, q1), scale);
    let o2 = sign(orientation(p1, p2, q2), scale);
    let o3 = sign(orientation(q1, q2, p1), scale);
    let o4 = sign(orientation(q1, q2, p2), scale);

    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(p1, p2, q1))
        || (o2 == 0 && on_segment(p1, p2, q2))
        || (o3 == 0 && on_segment(q1, q2, p1))
        || (o4 == 0 && on_segment(q1, q2, p2))
}

/// Simple polygon given by its vertex ring (no repeated closing vertex).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// At least three vertices and no two non-adjacent sides touch.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 || self.vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return false;
        }
        let sides: Vec<_> = self.edges().collect();
        if sides.iter().any(|(a, b)| a.distance(*b) <= GEOM_EPS) {
            return false;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (a, b) = sides[i];
                let (c, d) = sides[j];
                if adjacent {
                    // Adjacent sides may only share their common vertex.
                    let cross = b.sub(a).cross(d.sub(c));
                    let back = b.sub(a).dot(d.sub(c)) < 0.0;
                    if sign(cross, a.distance(b).max(c.distance(d))) == 0 && back {
                        return false;
                    }
                    continue;
                }
                if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Point-in-polygon with the boundary counted as inside.
    pub fn contains(&self, p: Point) -> bool {
        if self
            .edges()
            .any(|(a, b)| sign(orientation(a, b, p), a.distance(b)) == 0 && on_segment(a, b, p))
        {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Closed segment/region intersection: boundary contact counts.
    pub fn intersects_segment(&self, a: Point, b: Point) -> bool {
        self.contains(a) || self.contains(b) || self.edges().any(|(c, d)| segments_intersect(a, b, c, d))
    }

    pub fn scaled(&self, s: f64) -> Polygon {
        Polygon::new(self.vertices.iter().map(|p| p.scale(s)).collect())
    }
}
