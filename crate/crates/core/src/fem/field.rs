use std::sync::Arc;

use num_complex::Complex64;

use super::assembly::{load_vector, quad_values_on};
use super::basis;
use super::{FESpace, FemError, QuadratureRule, CONSTRAINED};
use crate::linalg::{Scalar, SparseMatrixReal};
use crate::mesh::Point2;

/// Coefficients over the free DOFs of a space; constrained DOFs are zero.
#[derive(Debug, Clone)]
pub struct Field<T> {
    space: Arc<FESpace>,
    coeffs: Vec<T>,
}

pub type FieldReal = Field<f64>;
pub type FieldComplex = Field<Complex64>;

impl<T: Scalar> Field<T> {
    pub fn new(space: Arc<FESpace>, coeffs: Vec<T>) -> Result<Self, FemError> {
        if coeffs.len() != space.n_free() {
            return Err(FemError::Length { expected: space.n_free(), found: coeffs.len() });
        }
        Ok(Self { space, coeffs })
    }

    pub fn zeros(space: Arc<FESpace>) -> Self {
        let coeffs = vec![T::zero(); space.n_free()];
        Self { space, coeffs }
    }

    /// Nodal interpolant: the value of `f` at each free DOF coordinate.
    pub fn interpolate(space: Arc<FESpace>, f: impl Fn(f64, f64) -> T) -> Self {
        let coeffs = space.free_dofs().iter().map(|&g| {
            let p = space.dof_coords()[g];
            f(p.x, p.y)
        });
        let coeffs = coeffs.collect();
        Self { space, coeffs }
    }

    pub fn space(&self) -> &Arc<FESpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Values at every global DOF, zero on constrained ones.
    pub fn full_coeffs(&self) -> Vec<T> {
        let mut full = vec![T::zero(); self.space.n_dofs()];
        for (&g, &c) in self.space.free_dofs().iter().zip(&self.coeffs) {
            full[g] = c;
        }
        full
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Point value through the basis of the triangle containing `p`.
    pub fn evaluate(&self, p: Point2) -> Result<T, FemError> {
        let loc = self.space.mesh().locate(p).ok_or(FemError::OutsideDomain { x: p.x, y: p.y })?;
        let mut v = [0.0; 6];
        basis::values(self.space.degree(), &loc.bary, &mut v);
        let mut s = T::zero();
        for (a, &g) in self.space.triangle_dofs(loc.triangle).iter().enumerate() {
            let f = self.space.free_index[g];
            if f != CONSTRAINED {
                s += self.coeffs[f].scale(v[a]);
            }
        }
        Ok(s)
    }

    /// Values at the quadrature points of the space, triangle-major.
    pub fn quad_values(&self) -> Vec<T> {
        quad_values_on(&self.space, self).expect("a field lives on its own mesh")
    }

    /// ∫ u_h over the domain.
    pub fn integral(&self) -> T {
        let vals = self.quad_values();
        let nq = self.space.quad.len();
        let mut s = T::zero();
        for (t, g) in self.space.geometry.iter().enumerate() {
            for (q, w) in self.space.quad.weights.iter().enumerate() {
                s += vals[t * nq + q].scale(w * g.area);
            }
        }
        s
    }

    /// ‖u − u_h‖_{L²} by a degree-6 rule on every triangle.
    pub fn l2_error(&self, exact: impl Fn(f64, f64) -> T) -> f64 {
        let rule = QuadratureRule::degree6();
        let r = self.space.degree();
        let shape: Vec<[f64; 6]> = rule
            .points
            .iter()
            .map(|l| {
                let mut v = [0.0; 6];
                basis::values(r, l, &mut v);
                v
            })
            .collect();
        let full = self.full_coeffs();
        let mut sum = 0.0;
        for (t, g) in self.space.geometry.iter().enumerate() {
            let dofs = self.space.triangle_dofs(t);
            for ((l, w), v) in rule.points.iter().zip(&rule.weights).zip(&shape) {
                let p = g.map(l);
                let mut uh = T::zero();
                for (a, &d) in dofs.iter().enumerate() {
                    uh += full[d].scale(v[a]);
                }
                sum += w * g.area * (exact(p.x, p.y) - uh).abs_sqr();
            }
        }
        sum.sqrt()
    }
}

/// cᴴ A c for a real symmetric A.
pub(crate) fn quad_form<T: Scalar>(a: &SparseMatrixReal, c: &[T]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.dim() {
        let mut row = T::zero();
        for k in a.row_ptr()[i]..a.row_ptr()[i + 1] {
            row += c[a.col_idx()[k]].scale(a.values()[k]);
        }
        s += (c[i].conj() * row).re();
    }
    s
}

/// L² projection of f(·, ·, t) onto the space.
pub fn l2_project<T: Scalar>(
    space: &Arc<FESpace>,
    f: impl Fn(f64, f64, f64) -> T + Sync,
    t: f64,
) -> Result<Field<T>, FemError> {
    let b = load_vector(space, f, t);
    let c = space.solve_mass(&b)?;
    Field::new(space.clone(), c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1_semi: f64,
    pub l4: f64,
}

/// L², H¹-seminorm and L⁴ norms of a field.
pub fn norms<T: Scalar>(field: &Field<T>) -> Norms {
    let space = field.space();
    let l2 = quad_form(space.mass(), field.coeffs()).max(0.0).sqrt();
    let h1_semi = quad_form(space.stiffness(), field.coeffs()).max(0.0).sqrt();
    let vals = field.quad_values();
    let nq = space.quad.len();
    let mut l4 = 0.0;
    for (t, g) in space.geometry.iter().enumerate() {
        for (q, w) in space.quad.weights.iter().enumerate() {
            l4 += w * g.area * vals[t * nq + q].abs_sqr().powi(2);
        }
    }
    Norms { l2, h1_semi, l4: l4.sqrt().sqrt() }
}
