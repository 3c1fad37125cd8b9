use num_complex::Complex64;

use super::{LinalgError, Scalar};

/// Square matrix in compressed sparse row storage.
///
/// Column indices are sorted and duplicate-free within every row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

pub type SparseMatrixReal = CsrMatrix<f64>;
pub type SparseMatrixComplex = CsrMatrix<Complex64>;

/// Shared sparsity structure of a family of matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrPattern {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl CsrPattern {
    /// Builds a pattern from (row, col) pairs; duplicates collapse.
    pub fn from_entries(dim: usize, mut entries: Vec<(usize, usize)>) -> Result<Self, LinalgError> {
        if let Some(&(r, c)) = entries.iter().find(|&&(r, c)| r >= dim || c >= dim) {
            return Err(LinalgError::IndexOutOfRange { row: r, col: c, dim });
        }
        entries.sort_unstable();
        entries.dedup();
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = entries.into_iter().map(|(_, c)| c).collect();
        Ok(Self { dim, row_ptr, col_idx })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// Position of entry (row, col) in the value array.
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.col_idx[lo..hi].binary_search(&col).ok().map(|p| lo + p)
    }

    pub fn zeros<T: Scalar>(&self) -> CsrMatrix<T> {
        CsrMatrix {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: vec![T::zero(); self.nnz()],
        }
    }
}

impl<T: Scalar> CsrMatrix<T> {
    /// Assembles from triplets, summing duplicates.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, T)]) -> Result<Self, LinalgError> {
        let pattern = CsrPattern::from_entries(dim, triplets.iter().map(|&(r, c, _)| (r, c)).collect())?;
        let mut m = pattern.zeros::<T>();
        for &(r, c, v) in triplets {
            let p = pattern.find(r, c).expect("entry present in pattern");
            m.values[p] += v;
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: vec![T::one(); dim],
        }
    }

    pub fn from_pattern_values(pattern: &CsrPattern, values: Vec<T>) -> Result<Self, LinalgError> {
        if values.len() != pattern.nnz() {
            return Err(LinalgError::DimensionMismatch { expected: pattern.nnz(), found: values.len() });
        }
        Ok(Self {
            dim: pattern.dim,
            row_ptr: pattern.row_ptr.clone(),
            col_idx: pattern.col_idx.clone(),
            values,
        })
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let dim = rows.len();
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(dim, &triplets).expect("dense rows are in range")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn pattern(&self) -> CsrPattern {
        CsrPattern { dim: self.dim, row_ptr: self.row_ptr.clone(), col_idx: self.col_idx.clone() }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&col) {
            Ok(p) => self.values[lo + p],
            Err(_) => T::zero(),
        }
    }

    pub fn same_pattern<S>(&self, other: &CsrMatrix<S>) -> bool {
        self.dim == other.dim && self.row_ptr == other.row_ptr && self.col_idx == other.col_idx
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// y = A·x
    pub fn spmv(&self, x: &[T]) -> Result<Vec<T>, LinalgError> {
        if x.len() != self.dim {
            return Err(LinalgError::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let mut y = vec![T::zero(); self.dim];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    pub(crate) fn spmv_into(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yi = acc;
        }
    }

    /// Largest |a_ij − a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                worst = worst.max((self.values[p] - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.dim]; self.dim];
        for (i, row) in d.iter_mut().enumerate() {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                row[self.col_idx[p]] = self.values[p];
            }
        }
        d
    }

    /// Entrywise map into another scalar type, keeping the pattern.
    pub fn map<S: Scalar>(&self, f: impl Fn(T) -> S) -> CsrMatrix<S> {
        CsrMatrix {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Relative residual ‖Ax − b‖ / ‖b‖ (absolute when b = 0).
pub fn relative_residual<T: Scalar>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> f64 {
    let mut ax = vec![T::zero(); a.dim()];
    a.spmv_into(x, &mut ax);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (*p - *q).abs_sqr()).sum::<f64>().sqrt();
    let nb = super::norm2(b);
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}
