//! Conforming triangulations of convex polygonal domains.
//!
//! A [`Mesh`] owns its points, counter-clockwise triangles and the list of
//! boundary edges with their boundary-condition tags. It is immutable once
//! built; operations that change tags or refine return a new mesh.

mod delaunay;
mod locate;
mod msh;
mod structured;

use std::collections::HashMap;
use std::sync::OnceLock;

use thiserror::Error;

pub use delaunay::{delaunay_triangulate, polygon_area, target_h_for_count};
pub use locate::Location;
pub use msh::{export_msh, import_msh, read_dump, write_dump};
pub use structured::{generate_structured, Rect};

use locate::Locator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("non-conforming mesh: {0}")]
    NonConforming(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, o: &Point2) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn midpoint(&self, o: &Point2) -> Point2 {
        Point2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
#[inline]
pub fn orient2d(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub v: [usize; 3],
}

impl Triangle {
    pub const fn new(a: usize, b: usize, c: usize) -> Self {
        Self { v: [a, b, c] }
    }

    /// Local edges in the order (v0,v1), (v1,v2), (v2,v0).
    pub fn edges(&self) -> [[usize; 2]; 3] {
        let [a, b, c] = self.v;
        [[a, b], [b, c], [c, a]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundaryEdge {
    pub endpoints: [usize; 2],
    pub tag: BoundaryTag,
}

#[inline]
pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    /// Degrees.
    pub min_angle: f64,
    /// Degrees.
    pub max_angle: f64,
    pub h: f64,
    pub triangle_count: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    points: Vec<Point2>,
    triangles: Vec<Triangle>,
    boundary: Vec<BoundaryEdge>,
    h: f64,
    locator: OnceLock<Locator>,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.triangles == other.triangles && self.boundary == other.boundary
    }
}

impl Mesh {
    /// Validates and builds a mesh from explicit boundary edges.
    ///
    /// The boundary list must contain exactly the edges that belong to one
    /// triangle.
    pub fn new(points: Vec<Point2>, triangles: Vec<Triangle>, boundary: Vec<BoundaryEdge>) -> Result<Self, MeshError> {
        let incidence = validate_cells(&points, &triangles)?;
        let mut expected: HashMap<(usize, usize), bool> =
            incidence.iter().filter(|(_, &c)| c == 1).map(|(&k, _)| (k, false)).collect();
        for e in &boundary {
            let [a, b] = e.endpoints;
            match expected.get_mut(&edge_key(a, b)) {
                Some(seen) if !*seen => *seen = true,
                Some(_) => return Err(MeshError::NonConforming(format!("boundary edge ({a}, {b}) listed twice"))),
                None => {
                    return Err(MeshError::NonConforming(format!(
                        "boundary edge ({a}, {b}) is not an edge of exactly one triangle"
                    )))
                }
            }
        }
        if let Some((k, _)) = expected.iter().find(|(_, &seen)| !seen) {
            return Err(MeshError::NonConforming(format!("boundary edge ({}, {}) has no tag", k.0, k.1)));
        }
        check_boundary_overlap(&points, &boundary)?;
        let h = triangles.iter().map(|t| diameter(&points, t)).fold(0.0, f64::max);
        Ok(Self { points, triangles, boundary, h, locator: OnceLock::new() })
    }

    /// Builds a mesh whose boundary edges are detected from the connectivity
    /// and tagged Neumann.
    pub fn from_triangles(points: Vec<Point2>, triangles: Vec<Triangle>) -> Result<Self, MeshError> {
        let incidence = validate_cells(&points, &triangles)?;
        let mut boundary = Vec::new();
        // Keep the orientation of the owning triangle so exports are stable.
        for t in &triangles {
            for [a, b] in t.edges() {
                if incidence[&edge_key(a, b)] == 1 {
                    boundary.push(BoundaryEdge { endpoints: [a, b], tag: BoundaryTag::Neumann });
                }
            }
        }
        Self::new(points, triangles, boundary)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Largest element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t].v;
        [self.points[a], self.points[b], self.points[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * orient2d(&a, &b, &c)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Unique undirected edges as sorted vertex pairs, in first-seen order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut seen = HashMap::with_capacity(self.triangles.len() * 2);
        let mut out = Vec::new();
        for t in &self.triangles {
            for [a, b] in t.edges() {
                let k = edge_key(a, b);
                seen.entry(k).or_insert_with(|| {
                    out.push([k.0, k.1]);
                });
            }
        }
        out
    }

    /// Vertices touching at least one Dirichlet edge.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.points.len()];
        for e in self.boundary.iter().filter(|e| e.tag == BoundaryTag::Dirichlet) {
            flags[e.endpoints[0]] = true;
            flags[e.endpoints[1]] = true;
        }
        flags
    }

    /// Re-tags every boundary edge by evaluating `rule` at its midpoint.
    pub fn tag_boundary(&self, rule: impl Fn(Point2) -> BoundaryTag) -> Mesh {
        let boundary = self
            .boundary
            .iter()
            .map(|e| {
                let mid = self.points[e.endpoints[0]].midpoint(&self.points[e.endpoints[1]]);
                BoundaryEdge { endpoints: e.endpoints, tag: rule(mid) }
            })
            .collect();
        Mesh {
            points: self.points.clone(),
            triangles: self.triangles.clone(),
            boundary,
            h: self.h,
            locator: OnceLock::new(),
        }
    }

    /// Splits every triangle into four through its edge midpoints.
    pub fn refine_uniform(&self) -> Mesh {
        let mut points = self.points.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, points: &mut Vec<Point2>| -> usize {
            *mid.entry(edge_key(a, b)).or_insert_with(|| {
                points.push(points[a].midpoint(&points[b]));
                points.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for t in &self.triangles {
            let [a, b, c] = t.v;
            let ab = midpoint(a, b, &mut points);
            let bc = midpoint(b, c, &mut points);
            let ca = midpoint(c, a, &mut points);
            triangles.push(Triangle::new(a, ab, ca));
            triangles.push(Triangle::new(ab, b, bc));
            triangles.push(Triangle::new(ca, bc, c));
            triangles.push(Triangle::new(ab, bc, ca));
        }
        let mut boundary = Vec::with_capacity(2 * self.boundary.len());
        for e in &self.boundary {
            let [a, b] = e.endpoints;
            let m = midpoint(a, b, &mut points);
            boundary.push(BoundaryEdge { endpoints: [a, m], tag: e.tag });
            boundary.push(BoundaryEdge { endpoints: [m, b], tag: e.tag });
        }
        Mesh::new(points, triangles, boundary).expect("refinement of a valid mesh is valid")
    }

    pub fn quality_report(&self) -> QualityReport {
        let mut min_angle = f64::INFINITY;
        let mut max_angle: f64 = 0.0;
        for t in 0..self.triangles.len() {
            for a in triangle_angles(&self.triangle_points(t)) {
                min_angle = min_angle.min(a);
                max_angle = max_angle.max(a);
            }
        }
        QualityReport { min_angle, max_angle, h: self.h, triangle_count: self.triangles.len() }
    }

    /// Finds the triangle containing `p`, preferring the lowest index on ties.
    pub fn locate(&self, p: Point2) -> Option<Location> {
        self.locator.get_or_init(|| Locator::new(self)).locate(self, p)
    }

    pub fn bounding_box(&self) -> Rect {
        let mut r = Rect { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY };
        for p in &self.points {
            r.x0 = r.x0.min(p.x);
            r.x1 = r.x1.max(p.x);
            r.y0 = r.y0.min(p.y);
            r.y1 = r.y1.max(p.y);
        }
        r
    }

    /// Extent of the domain along the horizontal line y = y0, if it meets it.
    pub fn x_extent_at(&self, y0: f64) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for e in &self.boundary {
            let a = self.points[e.endpoints[0]];
            let b = self.points[e.endpoints[1]];
            let (ylo, yhi) = if a.y < b.y { (a.y, b.y) } else { (b.y, a.y) };
            if y0 < ylo || y0 > yhi {
                continue;
            }
            if a.y == b.y {
                lo = lo.min(a.x.min(b.x));
                hi = hi.max(a.x.max(b.x));
            } else {
                let x = a.x + (y0 - a.y) / (b.y - a.y) * (b.x - a.x);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// Longest edge of a triangle.
fn diameter(points: &[Point2], t: &Triangle) -> f64 {
    t.edges().iter().map(|&[a, b]| points[a].dist(&points[b])).fold(0.0, f64::max)
}

/// Interior angles in degrees.
pub fn triangle_angles(p: &[Point2; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let a = p[i];
        let b = p[(i + 1) % 3];
        let c = p[(i + 2) % 3];
        let (ux, uy) = (b.x - a.x, b.y - a.y);
        let (vx, vy) = (c.x - a.x, c.y - a.y);
        out[i] = (ux * vy - uy * vx).abs().atan2(ux * vx + uy * vy).to_degrees();
    }
    out
}

/// Checks cell validity and returns the edge → triangle-count map.
fn validate_cells(points: &[Point2], triangles: &[Triangle]) -> Result<HashMap<(usize, usize), u32>, MeshError> {
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(MeshError::InvalidGeometry(format!("point {i} is not finite")));
    }
    if triangles.is_empty() {
        return Err(MeshError::InvalidGeometry("mesh has no triangles".into()));
    }
    let mut incidence: HashMap<(usize, usize), u32> = HashMap::with_capacity(triangles.len() * 2);
    for (ti, t) in triangles.iter().enumerate() {
        let [a, b, c] = t.v;
        if a >= points.len() || b >= points.len() || c >= points.len() {
            return Err(MeshError::InvalidGeometry(format!("triangle {ti} references a missing point")));
        }
        if a == b || b == c || a == c {
            return Err(MeshError::InvalidGeometry(format!("triangle {ti} repeats a vertex")));
        }
        if orient2d(&points[a], &points[b], &points[c]) <= 0.0 {
            return Err(MeshError::InvalidGeometry(format!("triangle {ti} is not counter-clockwise")));
        }
        for [u, v] in t.edges() {
            let n = incidence.entry(edge_key(u, v)).or_insert(0);
            *n += 1;
            if *n > 2 {
                return Err(MeshError::NonConforming(format!("edge ({u}, {v}) shared by more than two triangles")));
            }
        }
    }
    Ok(incidence)
}

/// Rejects hanging nodes: two boundary edges leaving a vertex in the same
/// direction overlap.
fn check_boundary_overlap(points: &[Point2], boundary: &[BoundaryEdge]) -> Result<(), MeshError> {
    let mut at: HashMap<usize, Vec<usize>> = HashMap::new();
    for e in boundary {
        at.entry(e.endpoints[0]).or_default().push(e.endpoints[1]);
        at.entry(e.endpoints[1]).or_default().push(e.endpoints[0]);
    }
    for (&v, others) in &at {
        let o = points[v];
        for i in 0..others.len() {
            for j in i + 1..others.len() {
                let a = points[others[i]];
                let b = points[others[j]];
                let (ax, ay) = (a.x - o.x, a.y - o.y);
                let (bx, by) = (b.x - o.x, b.y - o.y);
                let cross = ax * by - ay * bx;
                let dot = ax * bx + ay * by;
                let scale = (ax * ax + ay * ay).sqrt() * (bx * bx + by * by).sqrt();
                if dot > 0.0 && cross.abs() <= 1e-12 * scale {
                    return Err(MeshError::NonConforming(format!("overlapping boundary edges at vertex {v}")));
                }
            }
        }
    }
    Ok(())
}
