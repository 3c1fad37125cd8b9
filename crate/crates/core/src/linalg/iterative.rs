//! Jacobi-preconditioned Krylov solvers.

use super::{dot, norm2, CsrMatrix, LinalgError, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct IterationReport {
    pub iterations: usize,
    pub rel_residual: f64,
}

fn jacobi<T: Scalar>(a: &CsrMatrix<T>) -> Result<Vec<T>, LinalgError> {
    a.diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| if d == T::zero() { Err(LinalgError::ZeroPivot { index: i }) } else { Ok(T::one() / d) })
        .collect()
}

/// Preconditioned conjugate gradients for Hermitian positive definite A.
pub fn pcg<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<T>, IterationReport), LinalgError> {
    let n = a.dim();
    let nb = norm2(b);
    if nb == 0.0 {
        return Ok((vec![T::zero(); n], IterationReport { iterations: 0, rel_residual: 0.0 }));
    }
    let dinv = jacobi(a)?;
    let mut x = x0.map(<[T]>::to_vec).unwrap_or_else(|| vec![T::zero(); n]);
    let mut r = vec![T::zero(); n];
    a.spmv_into(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = *bi - *ri;
    }
    let mut z: Vec<T> = r.iter().zip(&dinv).map(|(ri, di)| *ri * *di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let mut res = norm2(&r) / nb;
    for it in 0..max_iterations {
        if res <= tol {
            return Ok((x, IterationReport { iterations: it, rel_residual: res }));
        }
        a.spmv_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap == T::zero() {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm2(&r) / nb;
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if res <= tol {
        return Ok((x, IterationReport { iterations: max_iterations, rel_residual: res }));
    }
    Err(LinalgError::NotConverged { iterations: max_iterations, residual: res })
}

/// Jacobi-preconditioned BiCGStab for general (here complex symmetric) A.
pub fn bicgstab<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<T>, IterationReport), LinalgError> {
    let n = a.dim();
    let nb = norm2(b);
    if nb == 0.0 {
        return Ok((vec![T::zero(); n], IterationReport { iterations: 0, rel_residual: 0.0 }));
    }
    let dinv = jacobi(a)?;
    let mut x = x0.map(<[T]>::to_vec).unwrap_or_else(|| vec![T::zero(); n]);
    let mut r = vec![T::zero(); n];
    a.spmv_into(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = *bi - *ri;
    }
    let r_hat = r.clone();
    let mut rho = T::one();
    let mut alpha = T::one();
    let mut omega = T::one();
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let mut res = norm2(&r) / nb;

    for it in 0..max_iterations {
        if res <= tol {
            return Ok((x, IterationReport { iterations: it, rel_residual: res }));
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < f64::MIN_POSITIVE {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = p[i] * dinv[i];
        }
        a.spmv_into(&y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) / nb <= tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            res = norm2(&s) / nb;
            return Ok((x, IterationReport { iterations: it + 1, rel_residual: res }));
        }
        for i in 0..n {
            z[i] = s[i] * dinv[i];
        }
        a.spmv_into(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt == T::zero() { T::zero() } else { dot(&t, &s) / tt };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        res = norm2(&r) / nb;
        if omega == T::zero() {
            break;
        }
    }
    if res <= tol {
        return Ok((x, IterationReport { iterations: max_iterations, rel_residual: res }));
    }
    Err(LinalgError::NotConverged { iterations: max_iterations, residual: res })
}
