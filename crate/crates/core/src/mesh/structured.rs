use super::{Mesh, MeshError, Point2, Triangle};

/// Axis-aligned rectangle [x0, x1] × [y0, y1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            Point2::new(self.x0, self.y0),
            Point2::new(self.x1, self.y0),
            Point2::new(self.x1, self.y1),
            Point2::new(self.x0, self.y1),
        ]
    }

    fn is_valid(&self) -> bool {
        [self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite()) && self.x1 > self.x0 && self.y1 > self.y0
    }
}

/// Uniform grid of `nx × ny` cells, each cut into two right triangles along
/// the diagonal from its lower-left to its upper-right corner. All boundary
/// edges are tagged Neumann.
pub fn generate_structured(nx: usize, ny: usize, bbox: Rect) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::InvalidGeometry(format!("grid size {nx}x{ny} must be at least 1x1")));
    }
    if !bbox.is_valid() {
        return Err(MeshError::InvalidGeometry(format!("degenerate bounding box {bbox:?}")));
    }
    let dx = bbox.width() / nx as f64;
    let dy = bbox.height() / ny as f64;
    let mut points = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = if j == ny { bbox.y1 } else { bbox.y0 + j as f64 * dy };
        for i in 0..=nx {
            let x = if i == nx { bbox.x1 } else { bbox.x0 + i as f64 * dx };
            points.push(Point2::new(x, y));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push(Triangle::new(id(i, j), id(i + 1, j), id(i + 1, j + 1)));
            triangles.push(Triangle::new(id(i, j), id(i + 1, j + 1), id(i, j + 1)));
        }
    }
    Mesh::from_triangles(points, triangles)
}
