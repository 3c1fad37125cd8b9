//! Sparse LDLᵀ factorization for symmetric matrices.
//!
//! Works for real symmetric positive definite matrices and for complex
//! symmetric (not Hermitian) matrices whose imaginary part is definite, such
//! as the Crank-Nicolson step operator. No pivoting is performed; the
//! elimination order is the approximate-minimum-degree permutation of the
//! sparsity pattern, computed once and reused for every numeric
//! factorization that shares the pattern.

use std::sync::Arc;

use super::{CsrMatrix, CsrPattern, LinalgError, Scalar};

const NONE: usize = usize::MAX;

/// Ordering and elimination-tree data for one sparsity pattern.
#[derive(Debug)]
pub struct LdlSymbolic {
    pattern: CsrPattern,
    perm: Vec<usize>,
    pinv: Vec<usize>,
    parent: Vec<usize>,
    col_ptr: Vec<usize>,
}

impl LdlSymbolic {
    /// Computes the fill-reducing ordering and the column counts of L.
    ///
    /// The pattern must be structurally symmetric.
    pub fn analyze(pattern: &CsrPattern) -> Result<Arc<Self>, LinalgError> {
        let n = pattern.dim();
        let (perm, pinv) = if n == 0 {
            (Vec::new(), Vec::new())
        } else {
            let control = amd::Control::default();
            let (p, pi, _info) = amd::order::<usize>(n, pattern.row_ptr(), pattern.col_idx(), &control)
                .map_err(|s| LinalgError::Ordering(format!("{s:?}")))?;
            (p, pi)
        };

        let ap = pattern.row_ptr();
        let ai = pattern.col_idx();
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            let kk = perm[k];
            for &col in &ai[ap[kk]..ap[kk + 1]] {
                let mut i = pinv[col];
                if i < k {
                    while flag[i] != k {
                        if parent[i] == NONE {
                            parent[i] = k;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + lnz[k];
        }
        Ok(Arc::new(Self { pattern: pattern.clone(), perm, pinv, parent, col_ptr }))
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    /// Number of strictly-lower nonzeros of L.
    pub fn factor_nnz(&self) -> usize {
        self.col_ptr[self.dim()]
    }

    /// Numeric factorization of a matrix with exactly this pattern.
    pub fn factor<T: Scalar>(self: &Arc<Self>, a: &CsrMatrix<T>) -> Result<LdlFactor<T>, LinalgError> {
        if a.dim() != self.dim() || a.row_ptr() != self.pattern.row_ptr() || a.col_idx() != self.pattern.col_idx() {
            return Err(LinalgError::PatternMismatch);
        }
        let n = self.dim();
        let ap = a.row_ptr();
        let ai = a.col_idx();
        let ax = a.values();
        let nnz = self.factor_nnz();
        let mut li = vec![0usize; nnz];
        let mut lx = vec![T::zero(); nnz];
        let mut d = vec![T::zero(); n];
        let mut y = vec![T::zero(); n];
        let mut pattern = vec![0usize; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];

        for k in 0..n {
            y[k] = T::zero();
            let mut top = n;
            flag[k] = k;
            let kk = self.perm[k];
            for p in ap[kk]..ap[kk + 1] {
                let mut i = self.pinv[ai[p]];
                if i <= k {
                    y[i] += ax[p];
                    let mut len = 0;
                    while flag[i] != k {
                        pattern[len] = i;
                        len += 1;
                        flag[i] = k;
                        i = self.parent[i];
                    }
                    while len > 0 {
                        top -= 1;
                        len -= 1;
                        pattern[top] = pattern[len];
                    }
                }
            }
            d[k] = y[k];
            y[k] = T::zero();
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = T::zero();
                let start = self.col_ptr[i];
                let end = start + lnz[i];
                for p in start..end {
                    let r = li[p];
                    y[r] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                li[end] = k;
                lx[end] = l_ki;
                lnz[i] += 1;
            }
            if d[k] == T::zero() || !d[k].is_finite() {
                return Err(LinalgError::ZeroPivot { index: k });
            }
        }
        Ok(LdlFactor { symbolic: Arc::clone(self), li, lx, d })
    }
}

/// Numeric LDLᵀ factors sharing an [`LdlSymbolic`].
#[derive(Debug, Clone)]
pub struct LdlFactor<T> {
    symbolic: Arc<LdlSymbolic>,
    li: Vec<usize>,
    lx: Vec<T>,
    d: Vec<T>,
}

impl<T: Scalar> LdlFactor<T> {
    pub fn dim(&self) -> usize {
        self.symbolic.dim()
    }

    pub fn symbolic(&self) -> &Arc<LdlSymbolic> {
        &self.symbolic
    }

    /// Solves A·x = b with the stored factors.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side length");
        let s = &self.symbolic;
        let mut x: Vec<T> = s.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            for p in s.col_ptr[j]..s.col_ptr[j + 1] {
                let r = self.li[p];
                x[r] -= self.lx[p] * xj;
            }
        }
        for (xj, dj) in x.iter_mut().zip(&self.d) {
            *xj = *xj / *dj;
        }
        for j in (0..n).rev() {
            let mut acc = x[j];
            for p in s.col_ptr[j]..s.col_ptr[j + 1] {
                acc -= self.lx[p] * x[self.li[p]];
            }
            x[j] = acc;
        }
        let mut out = vec![T::zero(); n];
        for (k, &p) in s.perm.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }

    /// Pivots of the factorization, in elimination order.
    pub fn pivots(&self) -> &[T] {
        &self.d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn laplacian_1d(n: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn tridiagonal_solve() {
        let a = laplacian_1d(20);
        let sym = LdlSymbolic::analyze(&a.pattern()).unwrap();
        let f = sym.factor(&a).unwrap();
        let b: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&b);
        assert!(super::super::relative_residual(&a, &x, &b) < 1e-14);
    }

    #[test]
    fn complex_symmetric_solve() {
        let a = laplacian_1d(15).map(|v| Complex64::new(-0.5 * v, 0.0));
        let mut m = a.clone();
        for i in 0..15 {
            let p = m.row_ptr()[i] + m.col_idx()[m.row_ptr()[i]..m.row_ptr()[i + 1]].iter().position(|&c| c == i).unwrap();
            m.values_mut()[p] += Complex64::new(0.0, 10.0);
        }
        let sym = LdlSymbolic::analyze(&m.pattern()).unwrap();
        let f = sym.factor(&m).unwrap();
        let b: Vec<Complex64> = (0..15).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let x = f.solve(&b);
        assert!(super::super::relative_residual(&m, &x, &b) < 1e-14);
    }

    #[test]
    fn singular_matrix_reports_zero_pivot() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let sym = LdlSymbolic::analyze(&a.pattern()).unwrap();
        assert!(matches!(sym.factor(&a), Err(LinalgError::ZeroPivot { .. })));
    }
}
