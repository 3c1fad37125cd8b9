//! Bowyer-Watson Delaunay triangulation of convex polygons.
//!
//! Boundary vertices are spaced at most `target_h` apart along every polygon
//! edge; interior vertices come from an axis-aligned grid of spacing
//! `target_h` whose nodes are perturbed by a small deterministic jitter so the
//! point set has no co-circular quadruples and the result is unstructured.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{orient2d, Mesh, MeshError, Point2, Triangle};

const NONE: usize = usize::MAX;
/// Relative tolerance of the in-circle predicate.
const INCIRCLE_TOL: f64 = 1e-12;
/// Grid perturbation as a fraction of the spacing.
const JITTER: f64 = 0.15;
/// Minimum distance of interior seeds from the boundary, as a fraction of the spacing.
const MARGIN: f64 = 0.5;
const SEED: u64 = 0x5eed_de1a;

/// Shoelace area; positive for counter-clockwise polygons.
pub fn polygon_area(polygon: &[Point2]) -> f64 {
    let n = polygon.len();
    0.5 * (0..n)
        .map(|i| {
            let a = polygon[i];
            let b = polygon[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
}

/// Spacing that yields roughly `count` triangles on `polygon`.
pub fn target_h_for_count(polygon: &[Point2], count: usize) -> f64 {
    let area = polygon_area(polygon).abs();
    (2.0 * area / count.max(1) as f64).sqrt()
}

/// In-circle determinant of p against the counter-clockwise triangle (a, b, c),
/// positive when p lies strictly inside, with its magnitude scale.
fn incircle(a: &Point2, b: &Point2, c: &Point2, p: &Point2) -> (f64, f64) {
    let (adx, ady) = (a.x - p.x, a.y - p.y);
    let (bdx, bdy) = (b.x - p.x, b.y - p.y);
    let (cdx, cdy) = (c.x - p.x, c.y - p.y);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    let t1 = ad * (bdx * cdy - cdx * bdy);
    let t2 = bd * (cdx * ady - adx * cdy);
    let t3 = cd * (adx * bdy - bdx * ady);
    let perm = ad * (bdx * cdy).abs().max((cdx * bdy).abs())
        + bd * (cdx * ady).abs().max((adx * cdy).abs())
        + cd * (adx * bdy).abs().max((bdx * ady).abs());
    (t1 + t2 + t3, perm)
}

/// Counter-clockwise, strictly convex copy of the polygon.
fn normalized_polygon(polygon: &[Point2]) -> Result<Vec<Point2>, MeshError> {
    if polygon.len() < 3 {
        return Err(MeshError::InvalidGeometry("polygon needs at least three vertices".into()));
    }
    if polygon.iter().any(|p| !p.is_finite()) {
        return Err(MeshError::InvalidGeometry("polygon vertex is not finite".into()));
    }
    let mut poly = polygon.to_vec();
    if polygon_area(&poly) < 0.0 {
        poly.reverse();
    }
    let n = poly.len();
    let scale = poly.iter().map(|p| p.x.abs().max(p.y.abs())).fold(0.0, f64::max).max(1e-300);
    let mut turning = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        let cross = orient2d(&a, &b, &c);
        if cross <= 1e-14 * scale * scale {
            return Err(MeshError::InvalidGeometry(format!("polygon is not strictly convex at vertex {}", (i + 1) % n)));
        }
        let (ux, uy) = (b.x - a.x, b.y - a.y);
        let (vx, vy) = (c.x - b.x, c.y - b.y);
        turning += (ux * vy - uy * vx).atan2(ux * vx + uy * vy);
    }
    // Left turns everywhere but more than one winding means self-intersection.
    if (turning - std::f64::consts::TAU).abs() > 1e-6 {
        return Err(MeshError::InvalidGeometry("polygon is self-intersecting".into()));
    }
    Ok(poly)
}

fn seed_points(poly: &[Point2], target_h: f64) -> Vec<Point2> {
    let n = poly.len();
    let mut pts = Vec::new();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let segs = (a.dist(&b) / target_h).ceil().max(1.0) as usize;
        for s in 0..segs {
            let t = s as f64 / segs as f64;
            pts.push(Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
        }
    }

    // Signed distance to each edge line, positive inside.
    let inside_dist = |p: &Point2| -> f64 {
        (0..n)
            .map(|i| {
                let a = poly[i];
                let b = poly[(i + 1) % n];
                orient2d(&a, &b, p) / a.dist(&b)
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in poly {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let nx = ((x1 - x0) / target_h).floor() as usize;
    let ny = ((y1 - y0) / target_h).floor() as usize;
    let ox = x0 + 0.5 * ((x1 - x0) - nx as f64 * target_h);
    let oy = y0 + 0.5 * ((y1 - y0) - ny as f64 * target_h);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for j in 0..=ny {
        // Serpentine order keeps consecutive insertions close together.
        let row: Vec<usize> = if j % 2 == 0 { (0..=nx).collect() } else { (0..=nx).rev().collect() };
        for i in row {
            let jx = rng.gen_range(-JITTER..JITTER) * target_h;
            let jy = rng.gen_range(-JITTER..JITTER) * target_h;
            let p = Point2::new(ox + i as f64 * target_h + jx, oy + j as f64 * target_h + jy);
            if inside_dist(&p) >= MARGIN * target_h {
                pts.push(p);
            }
        }
    }
    pts
}

/// Incremental triangulation state. `nbr[t][i]` is the triangle across the
/// edge opposite local vertex `i`.
struct BowyerWatson {
    pts: Vec<Point2>,
    tris: Vec<[usize; 3]>,
    nbr: Vec<[usize; 3]>,
    alive: Vec<bool>,
    free: Vec<usize>,
    stamp: Vec<u64>,
    generation: u64,
    last: usize,
}

impl BowyerWatson {
    fn new(mut pts: Vec<Point2>) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &pts {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let cx = 0.5 * (x0 + x1);
        let cy = 0.5 * (y0 + y1);
        let r = 20.0 * (x1 - x0).max(y1 - y0);
        let n = pts.len();
        for k in 0..3 {
            let th = std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::FRAC_PI_3;
            pts.push(Point2::new(cx + r * th.cos(), cy + r * th.sin()));
        }
        Self {
            pts,
            tris: vec![[n, n + 1, n + 2]],
            nbr: vec![[NONE; 3]],
            alive: vec![true],
            free: Vec::new(),
            stamp: vec![0],
            generation: 0,
            last: 0,
        }
    }

    fn contains_strictly_in_circle(&self, t: usize, p: &Point2) -> bool {
        let [a, b, c] = self.tris[t];
        let (d, scale) = incircle(&self.pts[a], &self.pts[b], &self.pts[c], p);
        d > INCIRCLE_TOL * scale
    }

    fn locate(&mut self, p: &Point2) -> Result<usize, MeshError> {
        let mut t = self.last;
        if !self.alive[t] {
            t = self.alive.iter().position(|&a| a).expect("live triangle");
        }
        let limit = 4 * self.tris.len() + 16;
        for _ in 0..limit {
            let v = self.tris[t];
            let mut moved = false;
            for i in 0..3 {
                let a = &self.pts[v[(i + 1) % 3]];
                let b = &self.pts[v[(i + 2) % 3]];
                if orient2d(a, b, p) < 0.0 && self.nbr[t][i] != NONE {
                    t = self.nbr[t][i];
                    moved = true;
                    break;
                }
            }
            if !moved {
                if (0..3).all(|i| orient2d(&self.pts[v[(i + 1) % 3]], &self.pts[v[(i + 2) % 3]], p) >= 0.0) {
                    return Ok(t);
                }
                break;
            }
        }
        // The walk ends outside every triangle or cycles only when p sits on an
        // edge and rounding makes both sides reject it; take the triangle that
        // p violates least.
        let mut best = (f64::NEG_INFINITY, NONE);
        for t in (0..self.tris.len()).filter(|&t| self.alive[t]) {
            let v = self.tris[t];
            let worst = (0..3)
                .map(|i| {
                    let a = &self.pts[v[(i + 1) % 3]];
                    let b = &self.pts[v[(i + 2) % 3]];
                    orient2d(a, b, p) / a.dist(b)
                })
                .fold(f64::INFINITY, f64::min);
            if worst > best.0 {
                best = (worst, t);
            }
        }
        let scale = self.pts[self.pts.len() - 1].dist(&self.pts[self.pts.len() - 2]);
        if best.0 < -1e-12 * scale {
            return Err(MeshError::InvalidGeometry("point outside the enclosing triangle".into()));
        }
        Ok(best.1)
    }

    fn alloc(&mut self, v: [usize; 3]) -> usize {
        if let Some(t) = self.free.pop() {
            self.tris[t] = v;
            self.nbr[t] = [NONE; 3];
            self.alive[t] = true;
            t
        } else {
            self.tris.push(v);
            self.nbr.push([NONE; 3]);
            self.alive.push(true);
            self.stamp.push(0);
            self.tris.len() - 1
        }
    }

    fn insert(&mut self, pi: usize) -> Result<(), MeshError> {
        let p = self.pts[pi];
        let start = self.locate(&p)?;
        self.generation += 1;
        let gen = self.generation;

        let mut cavity = vec![start];
        self.stamp[start] = gen;
        // (a, b, outer triangle, cavity triangle)
        let mut rim: Vec<(usize, usize, usize, usize)> = Vec::new();
        let mut k = 0;
        while k < cavity.len() {
            let t = cavity[k];
            k += 1;
            for i in 0..3 {
                let n = self.nbr[t][i];
                let a = self.tris[t][(i + 1) % 3];
                let b = self.tris[t][(i + 2) % 3];
                if n != NONE && self.stamp[n] == gen {
                    continue;
                }
                if n != NONE && self.contains_strictly_in_circle(n, &p) {
                    self.stamp[n] = gen;
                    cavity.push(n);
                } else {
                    rim.push((a, b, n, t));
                }
            }
        }
        // Rim edges whose far side was absorbed later are interior, not rim.
        rim.retain(|&(_, _, n, _)| n == NONE || self.stamp[n] != gen);
        for &(a, b, _, _) in &rim {
            if orient2d(&self.pts[a], &self.pts[b], &p) <= 0.0 {
                return Err(MeshError::InvalidGeometry(format!("cavity of point {pi} is not star-shaped")));
            }
        }

        for &t in &cavity {
            self.alive[t] = false;
            self.free.push(t);
        }
        let mut created = Vec::with_capacity(rim.len());
        for &(a, b, outer, _) in &rim {
            let t = self.alloc([a, b, pi]);
            self.nbr[t][2] = outer;
            if outer != NONE {
                // Match by vertices: `old` may already be a reused slot.
                let ov = self.tris[outer];
                let j = (0..3)
                    .find(|&j| ov[(j + 1) % 3] == b && ov[(j + 2) % 3] == a)
                    .expect("outer neighbour shares the rim edge");
                self.nbr[outer][j] = t;
            }
            created.push(t);
        }
        // New triangle (a, b, p): across (b, p) is the one starting at b,
        // across (p, a) is the one ending at a.
        for &t in &created {
            let [a, b, _] = self.tris[t];
            let next = created.iter().copied().find(|&u| self.tris[u][0] == b).expect("closed rim");
            let prev = created.iter().copied().find(|&u| self.tris[u][1] == a).expect("closed rim");
            self.nbr[t][0] = next;
            self.nbr[t][1] = prev;
        }
        self.last = created[0];
        Ok(())
    }
}

/// Delaunay triangulation of a convex polygon with vertex spacing `target_h`.
///
/// All boundary edges are tagged Neumann.
pub fn delaunay_triangulate(polygon: &[Point2], target_h: f64) -> Result<Mesh, MeshError> {
    if !(target_h > 0.0 && target_h.is_finite()) {
        return Err(MeshError::InvalidGeometry(format!("target_h must be positive, got {target_h}")));
    }
    let poly = normalized_polygon(polygon)?;
    let pts = seed_points(&poly, target_h);
    let n = pts.len();
    let mut bw = BowyerWatson::new(pts);
    for i in 0..n {
        bw.insert(i)?;
    }

    let mut triangles = Vec::new();
    for (t, v) in bw.tris.iter().enumerate() {
        if bw.alive[t] && v.iter().all(|&i| i < n) {
            triangles.push(Triangle::new(v[0], v[1], v[2]));
        }
    }
    bw.pts.truncate(n);
    let mesh = Mesh::from_triangles(bw.pts, triangles)?;
    let expected = polygon_area(&poly);
    if (mesh.area() - expected).abs() > 1e-9 * expected {
        return Err(MeshError::InvalidGeometry(format!(
            "triangulation covers area {} of polygon area {expected}",
            mesh.area()
        )));
    }
    Ok(mesh)
}
