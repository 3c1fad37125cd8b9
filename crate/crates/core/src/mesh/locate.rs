use super::{orient2d, Mesh, Point2, Rect};

/// Triangle containing a point and the point's barycentric coordinates in it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub triangle: usize,
    pub bary: [f64; 3],
}

const INSIDE_TOL: f64 = 1e-12;

/// Uniform bucket grid over triangle bounding boxes.
#[derive(Debug, Clone)]
pub(crate) struct Locator {
    bbox: Rect,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<usize>>,
}

impl Locator {
    pub(crate) fn new(mesh: &Mesh) -> Self {
        let bbox = mesh.bounding_box();
        let n = (mesh.triangles().len() as f64).sqrt().ceil().max(1.0) as usize;
        let aspect = (bbox.width() / bbox.height()).clamp(1e-3, 1e3);
        let nx = ((n as f64 * aspect.sqrt()).ceil() as usize).max(1);
        let ny = ((n as f64 / aspect.sqrt()).ceil() as usize).max(1);
        let mut cells = vec![Vec::new(); nx * ny];
        let loc = Self { bbox, nx, ny, cells: Vec::new() };
        for t in 0..mesh.triangles().len() {
            let p = mesh.triangle_points(t);
            let (mut x0, mut x1, mut y0, mut y1) = (p[0].x, p[0].x, p[0].y, p[0].y);
            for q in &p[1..] {
                x0 = x0.min(q.x);
                x1 = x1.max(q.x);
                y0 = y0.min(q.y);
                y1 = y1.max(q.y);
            }
            let (i0, j0) = loc.cell(x0, y0);
            let (i1, j1) = loc.cell(x1, y1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    cells[j * nx + i].push(t);
                }
            }
        }
        Self { cells, ..loc }
    }

    fn cell(&self, x: f64, y: f64) -> (usize, usize) {
        let fx = ((x - self.bbox.x0) / self.bbox.width() * self.nx as f64).floor();
        let fy = ((y - self.bbox.y0) / self.bbox.height() * self.ny as f64).floor();
        (fx.clamp(0.0, (self.nx - 1) as f64) as usize, fy.clamp(0.0, (self.ny - 1) as f64) as usize)
    }

    pub(crate) fn locate(&self, mesh: &Mesh, p: Point2) -> Option<Location> {
        let slack = 1e-12 * (self.bbox.width() + self.bbox.height());
        if !p.is_finite()
            || p.x < self.bbox.x0 - slack
            || p.x > self.bbox.x1 + slack
            || p.y < self.bbox.y0 - slack
            || p.y > self.bbox.y1 + slack
        {
            return None;
        }
        let (i, j) = self.cell(p.x, p.y);
        // Bucket lists are filled in ascending triangle order.
        self.cells[j * self.nx + i].iter().find_map(|&t| {
            let bary = barycentric(&mesh.triangle_points(t), p)?;
            Some(Location { triangle: t, bary })
        })
    }
}

/// Barycentric coordinates of `p`, or `None` when it is outside.
pub(crate) fn barycentric(tri: &[Point2; 3], p: Point2) -> Option<[f64; 3]> {
    let area = orient2d(&tri[0], &tri[1], &tri[2]);
    let mut l = [
        orient2d(&p, &tri[1], &tri[2]) / area,
        orient2d(&tri[0], &p, &tri[2]) / area,
        orient2d(&tri[0], &tri[1], &p) / area,
    ];
    if l.iter().any(|&v| v < -INSIDE_TOL) {
        return None;
    }
    for v in &mut l {
        *v = v.max(0.0);
    }
    let s: f64 = l.iter().sum();
    for v in &mut l {
        *v /= s;
    }
    Some(l)
}
