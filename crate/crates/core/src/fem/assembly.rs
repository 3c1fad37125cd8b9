use rayon::prelude::*;

use super::basis::{self, ElementGeometry};
use super::field::FieldReal;
use super::{FESpace, FemError, CONSTRAINED};
use crate::linalg::{CsrMatrix, Scalar, SparseMatrixReal};

type Local = [f64; 36];

/// Scatters per-triangle local matrices in triangle order, so the result does
/// not depend on how the local work was scheduled.
fn scatter(space: &FESpace, locals: &[Local]) -> SparseMatrixReal {
    let sp = space.sparsity();
    let n = space.n_local;
    let mut values = vec![0.0; sp.pattern.nnz()];
    for (t, local) in locals.iter().enumerate() {
        let slots = &sp.slots[t * n * n..(t + 1) * n * n];
        for (k, &s) in slots.iter().enumerate() {
            if s != CONSTRAINED {
                values[s] += local[k];
            }
        }
    }
    CsrMatrix::from_pattern_values(&sp.pattern, values).expect("values match the pattern")
}

fn assemble_with(space: &FESpace, local: impl Fn(usize, &ElementGeometry, &mut Local) + Sync) -> SparseMatrixReal {
    let locals: Vec<Local> = space
        .geometry
        .par_iter()
        .enumerate()
        .map(|(t, g)| {
            let mut m = [0.0; 36];
            local(t, g, &mut m);
            m
        })
        .collect();
    scatter(space, &locals)
}

/// Mass matrix ∫ φ_i φ_j over the free DOFs.
pub fn assemble_mass(space: &FESpace) -> SparseMatrixReal {
    let n = space.n_local;
    assemble_with(space, |_, g, m| {
        for (q, w) in space.quad.weights.iter().enumerate() {
            let v = &space.shape[q];
            let s = w * g.area;
            for a in 0..n {
                for b in 0..n {
                    m[a * n + b] += s * v[a] * v[b];
                }
            }
        }
    })
}

/// Stiffness matrix ∫ ∇φ_i·∇φ_j over the free DOFs.
pub fn assemble_stiffness(space: &FESpace) -> SparseMatrixReal {
    let n = space.n_local;
    assemble_with(space, |_, g, m| {
        let mut grads = [[0.0; 2]; 6];
        for (q, w) in space.quad.weights.iter().enumerate() {
            g.gradients(&space.dshape[q], n, &mut grads);
            let s = w * g.area;
            for a in 0..n {
                for b in 0..n {
                    m[a * n + b] += s * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                }
            }
        }
    })
}

/// Weighted mass matrix ∫ Φ_h φ_i φ_j, with Φ_h the finite-element function
/// of `phi`, which must live on the same mesh.
pub fn assemble_weighted_mass(space: &FESpace, phi: &FieldReal) -> Result<SparseMatrixReal, FemError> {
    let nq = space.quad.len();
    let pv = quad_values_on(space, phi)?;
    let n = space.n_local;
    Ok(assemble_with(space, |t, g, m| {
        for (q, w) in space.quad.weights.iter().enumerate() {
            let v = &space.shape[q];
            let s = w * g.area * pv[t * nq + q];
            for a in 0..n {
                for b in 0..n {
                    m[a * n + b] += s * v[a] * v[b];
                }
            }
        }
    }))
}

/// Values of `field` at the quadrature points of `space`, triangle-major.
pub(crate) fn quad_values_on<T: Scalar>(space: &FESpace, field: &super::Field<T>) -> Result<Vec<T>, FemError> {
    let fs = field.space();
    if !same_mesh(space, fs) {
        return Err(FemError::Incompatible("field lives on a different mesh".into()));
    }
    let full = field.full_coeffs();
    let nf = fs.n_local;
    let shape: Vec<[f64; 6]> = if fs.degree == space.degree {
        space.shape.clone()
    } else {
        space
            .quad
            .points
            .iter()
            .map(|l| {
                let mut v = [0.0; 6];
                basis::values(fs.degree, l, &mut v);
                v
            })
            .collect()
    };
    let nt = space.geometry.len();
    let mut out = Vec::with_capacity(nt * shape.len());
    for t in 0..nt {
        let dofs = fs.triangle_dofs(t);
        for v in &shape {
            let mut s = T::zero();
            for a in 0..nf {
                s += full[dofs[a]].scale(v[a]);
            }
            out.push(s);
        }
    }
    Ok(out)
}

fn same_mesh(a: &FESpace, b: &FESpace) -> bool {
    std::sync::Arc::ptr_eq(&a.mesh, &b.mesh) || a.mesh == b.mesh
}

/// ∫ g φ_i for the free DOFs, with `g` given at the quadrature points of
/// the space in triangle-major order.
pub fn load_from_quad_values<T: Scalar>(space: &FESpace, vals: &[T]) -> Vec<T> {
    let nq = space.quad.len();
    let n = space.n_local;
    let mut out = vec![T::zero(); space.n_free()];
    for (t, g) in space.geometry.iter().enumerate() {
        let dofs = space.triangle_dofs(t);
        for (q, w) in space.quad.weights.iter().enumerate() {
            let s = vals[t * nq + q].scale(w * g.area);
            let v = &space.shape[q];
            for a in 0..n {
                let f = space.free_index[dofs[a]];
                if f != CONSTRAINED {
                    out[f] += s.scale(v[a]);
                }
            }
        }
    }
    out
}

/// Physical coordinates of every quadrature point, triangle-major.
pub(crate) fn quad_points(space: &FESpace) -> Vec<(f64, f64)> {
    space
        .geometry
        .iter()
        .flat_map(|g| space.quad.points.iter().map(move |l| {
            let p = g.map(l);
            (p.x, p.y)
        }))
        .collect()
}

/// Load vector ∫ f(·, ·, t) φ_i over the free DOFs.
pub fn load_vector<T: Scalar>(space: &FESpace, f: impl Fn(f64, f64, f64) -> T + Sync, t: f64) -> Vec<T> {
    let vals: Vec<T> = quad_points(space).par_iter().map(|&(x, y)| f(x, y, t)).collect();
    load_from_quad_values(space, &vals)
}
