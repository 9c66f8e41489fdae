//! Dense symmetric-matrix kernel.
//!
//! Provides the matrix currency of the crate: an exactly-symmetric dense
//! matrix [`SymMatrix`], a general dense matrix [`Mat`] used for eigenvector
//! bases and data, Cholesky factorization with log-determinant, a symmetric
//! eigendecomposition, Kronecker block indexing, Gaussian sampling, and the
//! sample covariance. Storage is dense throughout: the problems this crate
//! targets are small (tens of nodes), so sparse storage buys nothing.

mod chol;
mod eigen;
mod io;
mod sample;
mod shape;

pub use chol::{cholesky, cholesky_logdet, CholeskyFactor};
pub use eigen::{eigh, reconstruct_from_eigh, Eigh};
pub use io::{
    read_data_csv, read_matrix_csv, read_sym_csv, write_data_csv, write_mat_csv, write_sym_csv,
};
pub use sample::{sample_covariance, sample_gaussian, sample_gaussian_with};
pub use shape::KroneckerShape;

use crate::scalar::Scalar;
use thiserror::Error;

/// Errors from the matrix kernel.
///
/// `NotPositiveDefinite` is a legitimate outcome of [`cholesky_logdet`], not
/// an exceptional condition: line searches and certification steps branch on
/// it routinely.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric at ({row},{col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("index out of range: {what}={got}, valid 1..={max}")]
    IndexOutOfRange {
        what: &'static str,
        got: usize,
        max: usize,
    },
    #[error("entry at ({row},{col}) is not finite")]
    NotFinite { row: usize, col: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("eigendecomposition did not converge")]
    EigenNoConvergence,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for MatrixError {
    fn from(e: std::io::Error) -> Self {
        MatrixError::Io(e.to_string())
    }
}

/// General dense matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, MatrixError> {
        if rows.is_empty() {
            return Err(MatrixError::Empty("matrix rows"));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(MatrixError::Empty("matrix columns"));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(MatrixError::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Mat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// Dense symmetric real matrix with explicit dimension.
///
/// Symmetry is exact and structural: constructors either verify it, build it
/// from one triangle, or average `(A + Aᵀ)/2`; all mutation goes through
/// [`SymMatrix::set_sym`], which writes both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        SymMatrix {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut s = Self::zeros(dim);
        for i in 0..dim {
            s.data[i * dim + i] = T::one();
        }
        s
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut s = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            s.data[i * diag.len() + i] = v;
        }
        s
    }

    /// Constant matrix with every entry equal to `v`.
    pub fn constant(dim: usize, v: T) -> Self {
        let mut s = Self::zeros(dim);
        s.data.fill(v);
        s
    }

    /// Builds from `f(a, b)` evaluated on the lower triangle `a >= b` and
    /// mirrored, so the result is symmetric regardless of `f`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut s = Self::zeros(dim);
        for a in 0..dim {
            for b in 0..=a {
                let v = f(a, b);
                s.data[a * dim + b] = v;
                s.data[b * dim + a] = v;
            }
        }
        s
    }

    /// Rejects input whose transpose does not match bit-for-bit.
    pub fn try_from_rows(rows: &[Vec<T>]) -> Result<Self, MatrixError> {
        let m = Mat::from_rows(rows)?;
        Self::try_from_mat(&m)
    }

    pub fn try_from_mat(m: &Mat<T>) -> Result<Self, MatrixError> {
        if m.rows() != m.cols() {
            return Err(MatrixError::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let dim = m.rows();
        for a in 0..dim {
            for b in (a + 1)..dim {
                if m.get(a, b) != m.get(b, a) {
                    return Err(MatrixError::NotSymmetric { row: a, col: b });
                }
            }
        }
        Ok(SymMatrix {
            dim,
            data: m.as_slice().to_vec(),
        })
    }

    /// Symmetrizes an arbitrary square matrix as `(A + Aᵀ)/2`.
    pub fn symmetrize(m: &Mat<T>) -> Result<Self, MatrixError> {
        if m.rows() != m.cols() {
            return Err(MatrixError::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let half = T::from_f64(0.5).unwrap();
        Ok(Self::from_fn(m.rows(), |a, b| {
            (m.get(a, b) + m.get(b, a)) * half
        }))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> T {
        self.data[a * self.dim + b]
    }

    /// Writes both `(a,b)` and `(b,a)`.
    #[inline]
    pub fn set_sym(&mut self, a: usize, b: usize, v: T) {
        self.data[a * self.dim + b] = v;
        self.data[b * self.dim + a] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn scale(&self, c: T) -> Self {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    /// Entrywise absolute values.
    pub fn abs(&self) -> Self {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }

    /// Frobenius norm of the difference, without materializing it.
    pub fn frobenius_distance(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
            .sqrt()
    }

    /// `tr(A·B)` for symmetric `A`, `B`: the entrywise dot product.
    pub fn trace_product(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    /// Sum of `|a_jk|` over all index pairs, both triangles and the diagonal.
    pub fn abs_sum(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc + v.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Kronecker product; the result has dimension `dim·other.dim` with the
    /// `(j,k)` block equal to `a_jk · other`.
    pub fn kronecker(&self, other: &Self) -> Self {
        let m1 = self.dim;
        let m2 = other.dim;
        let m = m1 * m2;
        let mut out = SymMatrix::zeros(m);
        for j in 0..m1 {
            for k in 0..m1 {
                let ajk = self.get(j, k);
                for i in 0..m2 {
                    for l in 0..m2 {
                        out.data[(j * m2 + i) * m + (k * m2 + l)] = ajk * other.get(i, l);
                    }
                }
            }
        }
        out
    }
}

/// Row-per-sample data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T> {
    n_samples: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> DataMatrix<T> {
    pub fn new(n_samples: usize, dim: usize, data: Vec<T>) -> Result<Self, MatrixError> {
        if n_samples == 0 {
            return Err(MatrixError::Empty("data matrix requires N >= 1"));
        }
        if data.len() != n_samples * dim {
            return Err(MatrixError::DimensionMismatch {
                expected: n_samples * dim,
                got: data.len(),
            });
        }
        for (idx, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(MatrixError::NotFinite {
                    row: idx / dim,
                    col: idx % dim,
                });
            }
        }
        Ok(DataMatrix {
            n_samples,
            dim,
            data,
        })
    }

    #[inline]
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn sample(&self, k: usize) -> &[T] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}
