//! Boundary lines in Hesse normal form and the polygonal district they come from.
//!
//! Every line is stored with a unit normal `(nx, ny)` and an offset `d` so that
//! `nx * x + ny * y - d` is the signed Euclidean distance of `(x, y)` to the line.
//! Lines are kept in a canonical orientation (`d >= 0`, ties broken on the sign of
//! `nx` and then `ny`) which makes two normalizations of the same line comparable.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Two points closer than this in both coordinates do not define a line.
pub const POINT_EPS: f64 = 1e-12;

/// Distance below which a point is considered to lie on a boundary line.
pub const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("points {0} and {1} coincide; no unique line passes through them")]
    DegeneratePoints(Point2, Point2),
    #[error("line coefficients a and b are both zero")]
    ZeroLine,
    #[error("a region needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex `{0}` has a non-finite coordinate")]
    NonFiniteVertex(String),
    #[error("edge {segment}: {source}")]
    Edge {
        segment: String,
        #[source]
        source: Box<GeometryError>,
    },
}

/// A location in local planar map units (east, north).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The line `a * x + b * y = c` with arbitrary scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LineCoefficients {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        LineCoefficients { a, b, c }
    }

    pub fn scaled(&self, s: f64) -> Self {
        LineCoefficients::new(self.a * s, self.b * s, self.c * s)
    }

    /// Residual `a * x + b * y - c`; zero for points on the line.
    pub fn residual(&self, p: Point2) -> f64 {
        self.a * p.x + self.b * p.y - self.c
    }
}

/// A unit-normal line `nx * x + ny * y = d` in canonical orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HesseLine {
    pub nx: f64,
    pub ny: f64,
    pub d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_id: Option<String>,
}

impl HesseLine {
    pub fn with_segment(mut self, id: impl Into<String>) -> Self {
        self.segment_id = Some(id.into());
        self
    }

    pub fn signed_distance(&self, p: Point2) -> f64 {
        signed_distance(self, p)
    }

    pub fn normal(&self) -> (f64, f64) {
        (self.nx, self.ny)
    }
}

/// Returns coefficients of the line through `p` and `q`.
///
/// The result is `(q.y - p.y, p.x - q.x, c)`, so it is not normalized; see
/// [`hesse_normalize`].
pub fn line_through_points(p: Point2, q: Point2) -> Result<LineCoefficients, GeometryError> {
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    if dx.abs() <= POINT_EPS && dy.abs() <= POINT_EPS {
        return Err(GeometryError::DegeneratePoints(p, q));
    }
    let a = dy;
    let b = -dx;
    // Cross product form keeps both defining points on the line symmetrically.
    let c = p.x * q.y - p.y * q.x;
    Ok(LineCoefficients::new(a, b, c))
}

/// Divides `(a, b, c)` by `sqrt(a² + b²)` and flips the sign into canonical orientation.
pub fn hesse_normalize(l: LineCoefficients) -> Result<HesseLine, GeometryError> {
    let norm = l.a.hypot(l.b);
    if norm == 0.0 || !norm.is_finite() {
        return Err(GeometryError::ZeroLine);
    }
    let (mut nx, mut ny, mut d) = (l.a / norm, l.b / norm, l.c / norm);
    let flip = d < 0.0 || (d == 0.0 && (nx < 0.0 || (nx == 0.0 && ny < 0.0)));
    if flip {
        nx = -nx;
        ny = -ny;
        d = -d;
    }
    // Adding 0.0 turns -0.0 into +0.0.
    Ok(HesseLine {
        nx: nx + 0.0,
        ny: ny + 0.0,
        d: d + 0.0,
        segment_id: None,
    })
}

pub fn signed_distance(h: &HesseLine, p: Point2) -> f64 {
    h.nx * p.x + h.ny * p.y - h.d
}

/// A named polygon vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    #[serde(flatten)]
    pub point: Point2,
}

impl Vertex {
    pub fn new(id: impl Into<String>, x: f64, y: f64) -> Self {
        Vertex {
            id: id.into(),
            point: Point2::new(x, y),
        }
    }
}

/// A simple polygon with one boundary line per edge, closing edge included.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonRegion {
    vertices: Vec<Vertex>,
    lines: Vec<HesseLine>,
}

impl PolygonRegion {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn lines(&self) -> &[HesseLine] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Segment ids in edge order (`"AB"`, `"BC"`, ..., closing edge last).
    pub fn segment_ids(&self) -> impl Iterator<Item = &str> {
        self.lines
            .iter()
            .map(|l| l.segment_id.as_deref().unwrap_or_default())
    }

    /// Edge endpoints in order, closing edge last.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i].point, self.vertices[(i + 1) % n].point))
    }

    pub fn contains(&self, p: Point2) -> bool {
        contains(self, p)
    }
}

/// Builds a region from vertices in boundary order.
pub fn region_from_vertices(vertices: Vec<Vertex>) -> Result<PolygonRegion, GeometryError> {
    if vertices.len() < 3 {
        return Err(GeometryError::TooFewVertices(vertices.len()));
    }
    if let Some(v) = vertices.iter().find(|v| !v.point.is_finite()) {
        return Err(GeometryError::NonFiniteVertex(v.id.clone()));
    }
    let n = vertices.len();
    let mut lines = Vec::with_capacity(n);
    for i in 0..n {
        let (from, to) = (&vertices[i], &vertices[(i + 1) % n]);
        let segment = format!("{}{}", from.id, to.id);
        let line = line_through_points(from.point, to.point)
            .and_then(hesse_normalize)
            .map_err(|e| GeometryError::Edge {
                segment: segment.clone(),
                source: Box::new(e),
            })?;
        debug_assert!(line.signed_distance(from.point).abs() < BOUNDARY_EPS);
        debug_assert!(line.signed_distance(to.point).abs() < BOUNDARY_EPS);
        lines.push(line.with_segment(segment));
    }
    Ok(PolygonRegion { vertices, lines })
}

fn distance_to_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let (ex, ey) = (b.x - a.x, b.y - a.y);
    let len2 = ex * ex + ey * ey;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * ex + (p.y - a.y) * ey) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.distance(Point2::new(a.x + t * ex, a.y + t * ey))
}

/// Even-odd ray casting. Points within [`BOUNDARY_EPS`] of an edge count as inside.
pub fn contains(region: &PolygonRegion, p: Point2) -> bool {
    if region
        .edges()
        .any(|(a, b)| distance_to_segment(p, a, b) <= BOUNDARY_EPS)
    {
        return true;
    }
    let mut inside = false;
    for (a, b) in region.edges() {
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}
