//! Dense brute-force finite-element reference used by the integration and
//! acceptance tests. It shares no code with the library: nodes are found by
//! coordinates, local bases come from inverting a monomial Vandermonde matrix
//! on each physical triangle, and integrals use a collapsed Gauss-Legendre
//! rule.
#![allow(dead_code)]

pub mod checks;

use std::sync::Arc;

use cnls::fem::FESpace;
use cnls::mesh::{BoundaryTag, Mesh, Point2, Triangle};
use num_complex::Complex64;

pub type C = Complex64;

/// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}

/// Points (ξ, η) and weights of a rule on the unit right triangle, from the
/// square via (u, v) ↦ (u, v(1 − u)).
pub fn triangle_rule(n: usize) -> Vec<(f64, f64, f64)> {
    let g = gauss_legendre(n);
    let mut out = Vec::new();
    for &(u, wu) in &g {
        for &(v, wv) in &g {
            out.push((u, v * (1.0 - u), wu * wv * (1.0 - u)));
        }
    }
    out
}

/// Dense solve with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Vec<C> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f == C::new(0.0, 0.0) {
                continue;
            }
            for j in c..n {
                let v = a[c][j];
                a[r][j] -= f * v;
            }
            let v = b[c];
            b[r] -= f * v;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for j in r + 1..n {
            s -= a[r][j] * x[j];
        }
        x[r] = s / a[r][r];
    }
    x
}

struct Element {
    nodes: Vec<usize>,
    /// Monomial coefficients of each local basis function.
    coef: Vec<Vec<f64>>,
    origin: Point2,
    scale: f64,
    p: [Point2; 3],
    area: f64,
}

/// Dense reference discretisation matched to a library space.
pub struct DenseFe {
    pub degree: usize,
    pub nodes: Vec<Point2>,
    elems: Vec<Element>,
    /// Library free index of each oracle node, `None` when constrained.
    pub free_of_node: Vec<Option<usize>>,
    /// Library global DOF of each oracle node.
    pub global_of_node: Vec<usize>,
    pub n_free: usize,
    rule: Vec<(f64, f64, f64)>,
}

fn monomials(r: usize, x: f64, y: f64) -> Vec<f64> {
    if r == 1 {
        vec![1.0, x, y]
    } else {
        vec![1.0, x, y, x * x, x * y, y * y]
    }
}

fn monomial_grads(r: usize, x: f64, y: f64) -> Vec<[f64; 2]> {
    if r == 1 {
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
    } else {
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0 * x, 0.0], [y, x], [0.0, 2.0 * y]]
    }
}

fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for j in 0..n {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                for j in 0..n {
                    a[r][j] -= f * a[c][j];
                    inv[r][j] -= f * inv[c][j];
                }
            }
        }
    }
    inv
}

fn close(a: Point2, b: Point2, tol: f64) -> bool {
    (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol
}

impl DenseFe {
    pub fn new(space: &Arc<FESpace>) -> Self {
        let mesh: &Mesh = space.mesh();
        let r = space.degree();
        let pts = mesh.points();
        let bb = mesh.bounding_box();
        let tol = 1e-10 * bb.width().max(bb.height());

        let mut nodes: Vec<Point2> = pts.to_vec();
        let find_or_add = |nodes: &mut Vec<Point2>, p: Point2| -> usize {
            match nodes.iter().position(|q| close(*q, p, tol)) {
                Some(i) => i,
                None => {
                    nodes.push(p);
                    nodes.len() - 1
                }
            }
        };
        let mut elem_nodes = Vec::new();
        for t in mesh.triangles() {
            let Triangle { v, .. } = *t;
            let mut ids = v.to_vec();
            if r == 2 {
                for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                    let m = Point2::new((pts[a].x + pts[b].x) / 2.0, (pts[a].y + pts[b].y) / 2.0);
                    ids.push(find_or_add(&mut nodes, m));
                }
            }
            elem_nodes.push(ids);
        }

        let mut constrained = vec![false; nodes.len()];
        for e in mesh.boundary().iter().filter(|e| e.tag == BoundaryTag::Dirichlet) {
            let [a, b] = e.endpoints;
            constrained[a] = true;
            constrained[b] = true;
            if r == 2 {
                let m = Point2::new((pts[a].x + pts[b].x) / 2.0, (pts[a].y + pts[b].y) / 2.0);
                let i = nodes.iter().position(|q| close(*q, m, tol)).expect("edge midpoint is a node");
                constrained[i] = true;
            }
        }

        let coords = space.dof_coords();
        assert_eq!(coords.len(), nodes.len(), "DOF count differs from the oracle");
        let global_of_node: Vec<usize> = nodes
            .iter()
            .map(|p| coords.iter().position(|q| close(*q, *p, tol)).expect("oracle node has a library DOF"))
            .collect();
        let free_of_node: Vec<Option<usize>> = global_of_node
            .iter()
            .zip(&constrained)
            .map(|(&g, &c)| {
                let f = space.free_index(g);
                assert_eq!(f.is_none(), c, "constraint mismatch at DOF {g}");
                f
            })
            .collect();
        let n_free = free_of_node.iter().flatten().count();
        assert_eq!(n_free, space.n_free());

        let elems = elem_nodes
            .into_iter()
            .enumerate()
            .map(|(t, ids)| {
                let v = mesh.triangles()[t].v;
                let p = [pts[v[0]], pts[v[1]], pts[v[2]]];
                let origin = p[0];
                let scale = p.iter().map(|q| (q.x - origin.x).abs().max((q.y - origin.y).abs())).fold(0.0, f64::max);
                let vand: Vec<Vec<f64>> = ids
                    .iter()
                    .map(|&i| monomials(r, (nodes[i].x - origin.x) / scale, (nodes[i].y - origin.y) / scale))
                    .collect();
                // Column j of the inverse holds the coefficients of basis j.
                let inv = invert(vand);
                let coef = (0..ids.len()).map(|j| (0..ids.len()).map(|m| inv[m][j]).collect()).collect();
                let area = 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y)).abs();
                Element { nodes: ids, coef, origin, scale, p, area }
            })
            .collect();

        Self { degree: r, nodes, elems, free_of_node, global_of_node, n_free, rule: triangle_rule(8) }
    }

    /// Quadrature points of element e: (x, y, weight, basis values, basis gradients).
    fn points(&self, e: &Element) -> Vec<(f64, f64, f64, Vec<f64>, Vec<[f64; 2]>)> {
        let r = self.degree;
        self.rule
            .iter()
            .map(|&(xi, eta, w)| {
                let x = e.p[0].x + xi * (e.p[1].x - e.p[0].x) + eta * (e.p[2].x - e.p[0].x);
                let y = e.p[0].y + xi * (e.p[1].y - e.p[0].y) + eta * (e.p[2].y - e.p[0].y);
                let (lx, ly) = ((x - e.origin.x) / e.scale, (y - e.origin.y) / e.scale);
                let m = monomials(r, lx, ly);
                let dm = monomial_grads(r, lx, ly);
                let vals = e.coef.iter().map(|c| c.iter().zip(&m).map(|(a, b)| a * b).sum()).collect();
                let grads = e
                    .coef
                    .iter()
                    .map(|c| {
                        let gx: f64 = c.iter().zip(&dm).map(|(a, d)| a * d[0]).sum();
                        let gy: f64 = c.iter().zip(&dm).map(|(a, d)| a * d[1]).sum();
                        [gx / e.scale, gy / e.scale]
                    })
                    .collect();
                (x, y, w * 2.0 * e.area, vals, grads)
            })
            .collect()
    }

    fn matrix(&self, integrand: impl Fn(f64, f64, &[f64], &[[f64; 2]], &[usize], usize, usize) -> f64) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n_free]; self.n_free];
        for e in &self.elems {
            for (x, y, w, v, g) in self.points(e) {
                for (i, &ni) in e.nodes.iter().enumerate() {
                    let Some(fi) = self.free_of_node[ni] else { continue };
                    for (j, &nj) in e.nodes.iter().enumerate() {
                        let Some(fj) = self.free_of_node[nj] else { continue };
                        a[fi][fj] += w * integrand(x, y, &v, &g, &e.nodes, i, j);
                    }
                }
            }
        }
        a
    }

    pub fn mass(&self) -> Vec<Vec<f64>> {
        self.matrix(|_, _, v, _, _, i, j| v[i] * v[j])
    }

    pub fn stiffness(&self) -> Vec<Vec<f64>> {
        self.matrix(|_, _, _, g, _, i, j| g[i][0] * g[j][0] + g[i][1] * g[j][1])
    }

    /// ∫ φ_h φ_i φ_j with φ_h given by its value at every oracle node.
    pub fn weighted_mass(&self, phi_nodes: &[f64]) -> Vec<Vec<f64>> {
        self.matrix(|_, _, v, _, nodes, i, j| {
            let ph: f64 = nodes.iter().zip(v).map(|(&n, b)| phi_nodes[n] * b).sum();
            ph * v[i] * v[j]
        })
    }

    pub fn load(&self, f: impl Fn(f64, f64) -> C) -> Vec<C> {
        let mut b = vec![C::new(0.0, 0.0); self.n_free];
        for e in &self.elems {
            for (x, y, w, v, _) in self.points(e) {
                let fv = f(x, y);
                for (i, &ni) in e.nodes.iter().enumerate() {
                    if let Some(fi) = self.free_of_node[ni] {
                        b[fi] += fv * (w * v[i]);
                    }
                }
            }
        }
        b
    }

    /// ∫ g(u_h(x)) φ_i where u_h has the given node values.
    pub fn load_of_field(&self, u_nodes: &[C], g: impl Fn(C) -> C) -> Vec<C> {
        let mut b = vec![C::new(0.0, 0.0); self.n_free];
        for e in &self.elems {
            for (_, _, w, v, _) in self.points(e) {
                let uh: C = e.nodes.iter().zip(&v).map(|(&n, b)| u_nodes[n] * *b).sum();
                let gv = g(uh);
                for (i, &ni) in e.nodes.iter().enumerate() {
                    if let Some(fi) = self.free_of_node[ni] {
                        b[fi] += gv * (w * v[i]);
                    }
                }
            }
        }
        b
    }

    /// Node values from library free coefficients; constrained nodes are zero.
    pub fn nodes_from_free<T: Copy + Default>(&self, free: &[T]) -> Vec<T> {
        self.free_of_node.iter().map(|f| f.map_or(T::default(), |i| free[i])).collect()
    }

    /// Φ^{n+1/2} = M⁻¹(2 b(|U|²)) − Φ^{n−1/2} on free coefficients.
    pub fn phi_update(&self, u: &[C], phi_old: &[f64]) -> Vec<f64> {
        let m = self.mass();
        let b = self.load_of_field(&self.nodes_from_free(u), |v| C::new(v.norm_sqr(), 0.0));
        let mc = to_complex(&m);
        let p = dense_solve(mc, b.iter().map(|v| v * 2.0).collect());
        p.iter().zip(phi_old).map(|(v, o)| v.re - o).collect()
    }

    /// One relaxation step from (U^n, Φ^{n−1/2}) at time t_n.
    pub fn step(
        &self,
        u: &[C],
        phi_old: &[f64],
        k: f64,
        lambda: f64,
        t_n: f64,
        forcing: Option<&dyn Fn(f64, f64, f64) -> C>,
    ) -> (Vec<C>, Vec<f64>) {
        let phi = self.phi_update(u, phi_old);
        let m = self.mass();
        let s = self.stiffness();
        let w = self.weighted_mass(&self.nodes_from_free(&phi));
        let n = self.n_free;
        let ik = C::new(0.0, 1.0 / k);
        let mut a = vec![vec![C::new(0.0, 0.0); n]; n];
        let mut rhs = vec![C::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = ik * m[i][j] - 0.5 * s[i][j] + 0.5 * lambda * w[i][j];
                let b = ik * m[i][j] + 0.5 * s[i][j] - 0.5 * lambda * w[i][j];
                rhs[i] += b * u[j];
            }
        }
        if let Some(f) = forcing {
            let fl = self.load(|x, y| f(x, y, t_n + 0.5 * k));
            for (r, v) in rhs.iter_mut().zip(fl) {
                *r += v;
            }
        }
        (dense_solve(a, rhs), phi)
    }
}

pub fn to_complex(a: &[Vec<f64>]) -> Vec<Vec<C>> {
    a.iter().map(|r| r.iter().map(|&v| C::new(v, 0.0)).collect()).collect()
}

/// Largest entrywise difference between a dense matrix and a library matrix.
pub fn max_diff(dense: &[Vec<f64>], lib: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (r1, r2) in dense.iter().zip(lib) {
        for (a, b) in r1.iter().zip(r2) {
            d = d.max((a - b).abs());
        }
    }
    d
}

/// Empty-circumcircle violation of a triangle by any mesh point, relative
/// to the circumradius; positive means some point lies strictly inside.
pub fn circumcircle_violation(mesh: &Mesh) -> f64 {
    let pts = mesh.points();
    let mut worst = f64::NEG_INFINITY;
    for t in mesh.triangles() {
        let [a, b, c] = t.v.map(|i| pts[i]);
        let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
        let (a2, b2, c2) = (a.x * a.x + a.y * a.y, b.x * b.x + b.y * b.y, c.x * c.x + c.y * c.y);
        let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
        let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
        let r = ((a.x - ux).powi(2) + (a.y - uy).powi(2)).sqrt();
        for (i, p) in pts.iter().enumerate() {
            if t.v.contains(&i) {
                continue;
            }
            let dist = ((p.x - ux).powi(2) + (p.y - uy).powi(2)).sqrt();
            worst = worst.max((r - dist) / r);
        }
    }
    worst
}

/// Small meshes used by the oracle comparisons, each with at most ten triangles.
pub fn fixture_meshes() -> Vec<(&'static str, Mesh)> {
    use cnls::mesh::{delaunay_triangulate, generate_structured, import_msh, Rect};
    let reference = Mesh::from_triangles(
        vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
        vec![Triangle::new(0, 1, 2)],
    )
    .unwrap();
    let skewed = Mesh::from_triangles(
        vec![Point2::new(0.0, 0.0), Point2::new(1.3, 0.2), Point2::new(1.0, 1.1), Point2::new(-0.2, 0.9)],
        vec![Triangle::new(0, 1, 2), Triangle::new(0, 2, 3)],
    )
    .unwrap();
    let grid = generate_structured(2, 2, Rect::new(-1.0, 1.0, 0.0, 0.5))
        .unwrap()
        .tag_boundary(|p| if p.x < -0.999 { BoundaryTag::Dirichlet } else { BoundaryTag::Neumann });
    let grid_dirichlet = generate_structured(2, 2, Rect::new(0.0, 2.0, 0.0, 1.0)).unwrap().tag_boundary(|_| BoundaryTag::Dirichlet);
    let hexagon: Vec<Point2> =
        (0..6).map(|i| std::f64::consts::FRAC_PI_3 * i as f64).map(|a| Point2::new(a.cos(), 0.8 * a.sin())).collect();
    let hex = delaunay_triangulate(&hexagon, 0.9).unwrap();
    let msh = import_msh(
        "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n5\n1 0 0 0\n2 2 0 0\n3 2 1 0\n4 0 1 0\n5 0.9 0.45 0\n$EndNodes\n\
         $Elements\n8\n1 1 2 1 1 1 2\n2 1 2 2 2 2 3\n3 1 2 2 2 3 4\n4 1 2 1 1 4 1\n\
         5 2 2 0 0 1 2 5\n6 2 2 0 0 2 3 5\n7 2 2 0 0 3 4 5\n8 2 2 0 0 4 1 5\n$EndElements\n",
    )
    .unwrap();
    let out = vec![
        ("reference", reference),
        ("skewed", skewed),
        ("grid-mixed", grid),
        ("grid-dirichlet", grid_dirichlet),
        ("hexagon", hex),
        ("msh-mixed", msh),
    ];
    for (name, m) in &out {
        assert!(m.triangles().len() <= 10, "{name} has {} triangles", m.triangles().len());
    }
    out
}
