//! Sparse storage and linear solvers for the real SPD and complex symmetric
//! systems of the time stepper.

mod csr;
pub mod iterative;
mod ldl;
mod scalar;

use num_complex::Complex64;
use thiserror::Error;

pub use csr::{relative_residual, CsrMatrix, CsrPattern, SparseMatrixComplex, SparseMatrixReal};
pub use ldl::{LdlFactor, LdlSymbolic};
pub use scalar::{dot, dotu, norm2, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entry ({row}, {col}) outside a {dim}x{dim} matrix")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },
    #[error("matrix pattern differs from the analyzed pattern")]
    PatternMismatch,
    #[error("zero or non-finite pivot at elimination step {index}")]
    ZeroPivot { index: usize },
    #[error("fill-reducing ordering failed: {0}")]
    Ordering(String),
    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    /// Sparse LDLᵀ with approximate-minimum-degree ordering.
    DirectLu,
    /// Jacobi-preconditioned CG (real SPD) or BiCGStab (complex).
    IterativeResidual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    pub rel_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { method: SolverMethod::DirectLu, rel_tolerance: 1e-12, max_iterations: 10_000 }
    }
}

impl SolverConfig {
    pub fn iterative() -> Self {
        Self { method: SolverMethod::IterativeResidual, ..Self::default() }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rel_tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<(), LinalgError> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            return Err(LinalgError::InvalidConfig(format!("tolerance {} not in (0, 1)", self.rel_tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(LinalgError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Refinement sweeps applied after a direct solve whose residual misses the
/// tolerance.
const MAX_REFINEMENT: usize = 4;

/// Direct solve followed by residual check and iterative refinement.
fn refine<T: Scalar>(
    a: &CsrMatrix<T>,
    factor: &LdlFactor<T>,
    b: &[T],
    tol: f64,
) -> Result<Vec<T>, LinalgError> {
    let mut x = factor.solve(b);
    let mut res = relative_residual(a, &x, b);
    let mut sweeps = 0;
    while !(res <= tol) && sweeps < MAX_REFINEMENT {
        let ax = a.spmv(&x)?;
        let r: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
        let dx = factor.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += *di;
        }
        res = relative_residual(a, &x, b);
        sweeps += 1;
    }
    if res <= tol {
        Ok(x)
    } else {
        Err(LinalgError::NotConverged { iterations: sweeps, residual: res })
    }
}

/// Reusable solver for a fixed symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricSolver<T: Scalar> {
    matrix: CsrMatrix<T>,
    factor: Option<LdlFactor<T>>,
    cfg: SolverConfig,
}

impl<T: Scalar> SymmetricSolver<T> {
    pub fn new(matrix: CsrMatrix<T>, cfg: SolverConfig) -> Result<Self, LinalgError> {
        cfg.validate()?;
        let factor = match cfg.method {
            SolverMethod::DirectLu => Some(LdlSymbolic::analyze(&matrix.pattern())?.factor(&matrix)?),
            SolverMethod::IterativeResidual => None,
        };
        Ok(Self { matrix, factor, cfg })
    }

    /// Same as [`SymmetricSolver::new`] but reuses an existing analysis.
    pub fn with_symbolic(
        matrix: CsrMatrix<T>,
        symbolic: &std::sync::Arc<LdlSymbolic>,
        cfg: SolverConfig,
    ) -> Result<Self, LinalgError> {
        cfg.validate()?;
        let factor = match cfg.method {
            SolverMethod::DirectLu => Some(symbolic.factor(&matrix)?),
            SolverMethod::IterativeResidual => None,
        };
        Ok(Self { matrix, factor, cfg })
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    /// Solves with an optional starting guess for the iterative path.
    pub fn solve_with_guess(&self, b: &[T], guess: Option<&[T]>) -> Result<Vec<T>, LinalgError> {
        if b.len() != self.matrix.dim() {
            return Err(LinalgError::DimensionMismatch { expected: self.matrix.dim(), found: b.len() });
        }
        let tol = self.cfg.rel_tolerance;
        let x = match &self.factor {
            Some(f) => refine(&self.matrix, f, b, tol)?,
            None => {
                let hermitian = self.matrix.values().iter().all(|v| v.conj() == *v);
                let (x, _) = if hermitian {
                    iterative::pcg(&self.matrix, b, guess, tol, self.cfg.max_iterations)?
                } else {
                    iterative::bicgstab(&self.matrix, b, guess, tol, self.cfg.max_iterations)?
                };
                x
            }
        };
        let res = relative_residual(&self.matrix, &x, b);
        if res <= tol {
            Ok(x)
        } else {
            Err(LinalgError::NotConverged { iterations: self.cfg.max_iterations, residual: res })
        }
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, LinalgError> {
        self.solve_with_guess(b, None)
    }
}

/// Solves a real symmetric positive definite system.
pub fn solve_spd(a: &SparseMatrixReal, b: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>, LinalgError> {
    SymmetricSolver::new(a.clone(), *cfg)?.solve(b)
}

/// Solves a complex symmetric system.
pub fn solve_complex(
    a: &SparseMatrixComplex,
    b: &[Complex64],
    cfg: &SolverConfig,
) -> Result<Vec<Complex64>, LinalgError> {
    SymmetricSolver::new(a.clone(), *cfg)?.solve(b)
}
