//! Lagrange shape functions on a triangle in barycentric coordinates.
//!
//! Local DOF order: vertices 0, 1, 2, then for r = 2 the midpoints of the
//! edges (0,1), (1,2), (2,0).

use crate::mesh::Point2;

pub(crate) const EDGE_LOCAL: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

pub(crate) fn local_count(r: usize) -> usize {
    if r == 1 {
        3
    } else {
        6
    }
}

/// Shape function values at barycentric point `l`.
pub(crate) fn values(r: usize, l: &[f64; 3], out: &mut [f64; 6]) {
    if r == 1 {
        out[..3].copy_from_slice(l);
        return;
    }
    for i in 0..3 {
        out[i] = l[i] * (2.0 * l[i] - 1.0);
    }
    for (e, [a, b]) in EDGE_LOCAL.iter().enumerate() {
        out[3 + e] = 4.0 * l[*a] * l[*b];
    }
}

/// Derivatives of each shape function with respect to the three barycentric
/// coordinates, treated as independent variables.
pub(crate) fn dvalues(r: usize, l: &[f64; 3], out: &mut [[f64; 3]; 6]) {
    *out = [[0.0; 3]; 6];
    if r == 1 {
        for i in 0..3 {
            out[i][i] = 1.0;
        }
        return;
    }
    for i in 0..3 {
        out[i][i] = 4.0 * l[i] - 1.0;
    }
    for (e, [a, b]) in EDGE_LOCAL.iter().enumerate() {
        out[3 + e][*a] = 4.0 * l[*b];
        out[3 + e][*b] = 4.0 * l[*a];
    }
}

/// Area and barycentric gradients of a counter-clockwise triangle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ElementGeometry {
    pub area: f64,
    pub grad: [[f64; 2]; 3],
    pub p: [Point2; 3],
}

impl ElementGeometry {
    pub(crate) fn new(p: [Point2; 3]) -> Self {
        let twice = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[1].y - p[0].y) * (p[2].x - p[0].x);
        let mut grad = [[0.0; 2]; 3];
        for i in 0..3 {
            let a = p[(i + 1) % 3];
            let b = p[(i + 2) % 3];
            grad[i] = [(a.y - b.y) / twice, (b.x - a.x) / twice];
        }
        Self { area: 0.5 * twice, grad, p }
    }

    pub(crate) fn map(&self, l: &[f64; 3]) -> Point2 {
        Point2::new(
            l[0] * self.p[0].x + l[1] * self.p[1].x + l[2] * self.p[2].x,
            l[0] * self.p[0].y + l[1] * self.p[1].y + l[2] * self.p[2].y,
        )
    }

    /// Physical gradients from barycentric derivatives.
    pub(crate) fn gradients(&self, dl: &[[f64; 3]; 6], n: usize, out: &mut [[f64; 2]; 6]) {
        for a in 0..n {
            let mut g = [0.0; 2];
            for i in 0..3 {
                g[0] += dl[a][i] * self.grad[i][0];
                g[1] += dl[a][i] * self.grad[i][1];
            }
            out[a] = g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(r: usize) -> Vec<[f64; 3]> {
        let mut v = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        if r == 2 {
            v.extend([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]);
        }
        v
    }

    #[test]
    fn kronecker_at_nodes_and_partition_of_unity() {
        for r in [1, 2] {
            let n = local_count(r);
            let mut v = [0.0; 6];
            for (j, l) in nodes(r).iter().enumerate() {
                values(r, l, &mut v);
                for a in 0..n {
                    assert_eq!(v[a], if a == j { 1.0 } else { 0.0 });
                }
            }
            values(r, &[0.2, 0.3, 0.5], &mut v);
            assert!((v[..n].iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_difference_quotients() {
        let l = [0.21, 0.33, 0.46];
        let eps = 1e-6;
        let mut d = [[0.0; 3]; 6];
        dvalues(2, &l, &mut d);
        for i in 0..3 {
            let mut lp = l;
            let mut lm = l;
            lp[i] += eps;
            lm[i] -= eps;
            let (mut vp, mut vm) = ([0.0; 6], [0.0; 6]);
            values(2, &lp, &mut vp);
            values(2, &lm, &mut vm);
            for a in 0..6 {
                assert!(((vp[a] - vm[a]) / (2.0 * eps) - d[a][i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn barycentric_gradients_of_right_triangle() {
        let g = ElementGeometry::new([Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)]);
        assert_eq!(g.area, 0.5);
        assert_eq!(g.grad, [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]);
    }
}
