//! Hyperparameter initialization by Kronecker factorization in the
//! entrywise-log domain.
//!
//! Fits `W̄ ⊗ Ȳ ≈ abs(Σ̂⁻¹) + ε·𝟙𝟙ᵀ` with positive factors by taking the
//! entrywise logarithm and solving the linear least-squares problem
//! `min_z ‖Az − b‖` whose unknowns are the log-factors. The normal equations
//! are rank-deficient by exactly one (adding a constant to `log W̄` and
//! subtracting it from `log Ȳ` leaves the fit unchanged), so the
//! minimum-norm solution is taken; it is the one whose two log-factor sums
//! coincide.
//!
//! The design matrix never materializes: its normal equations decouple into
//! block sums. With `B = log M`, block sums `P_jk = Σ_{i,l} B[(j,i),(k,l)]`,
//! node sums `Q_il = Σ_{j,k} B[(j,i),(k,l)]`, total `t = ΣB/(m1²+m2²)`, the
//! minimum-norm solution is `w_jk = (P_jk − t)/m2²`, `y_il = (Q_il − t)/m1²`.
//!
//! The factors are exponentiated, symmetrized by averaging with their
//! transpose, and inverted entrywise to produce the initial weights: a large
//! fitted magnitude means a weak prior toward zero for that entry.

use thiserror::Error;

use crate::matrix::{cholesky, KroneckerShape, Mat, MatrixError, SymMatrix};
use crate::scalar::{from_f64, from_usize, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KronInitError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("entry ({row},{col}) must be positive to take logarithms, got nonpositive")]
    NonPositiveEntry { row: usize, col: usize },
    #[error("dimension {dim} does not match shape {m1}x{m2}")]
    ShapeMismatch { dim: usize, m1: usize, m2: usize },
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
}

/// Output of the initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct KronInitResult<T> {
    /// Symmetrized positive module factor, `m1×m1`.
    pub w_bar: SymMatrix<T>,
    /// Symmetrized positive node factor, `m2×m2`.
    pub y_bar: SymMatrix<T>,
    /// `‖Az − b‖₂` of the log-domain fit.
    pub residual: T,
    /// Initial module weights, entrywise `1/w̄`.
    pub lambda0: SymMatrix<T>,
    /// Initial node weights, entrywise `1/ȳ`.
    pub gamma0: SymMatrix<T>,
}

/// Minimum-norm log-domain Kronecker fit of a positive matrix.
///
/// Returns the log-factors `(W, Y)` and the fit residual. The fitted values
/// `w_jk + y_il` are unique; the split between `W` and `Y` is pinned by the
/// minimum-norm tie-break `Σ w = Σ y`.
pub fn kron_log_lstsq<T: Scalar>(
    m: &SymMatrix<T>,
    shape: KroneckerShape,
) -> Result<(Mat<T>, Mat<T>, T), KronInitError> {
    let dim = m.dim();
    if dim != shape.flat_dim() {
        return Err(KronInitError::ShapeMismatch {
            dim,
            m1: shape.m1(),
            m2: shape.m2(),
        });
    }
    for a in 0..dim {
        for b in 0..=a {
            if !(m.get(a, b) > T::zero()) {
                return Err(KronInitError::NonPositiveEntry { row: a, col: b });
            }
        }
    }
    let m1 = shape.m1();
    let m2 = shape.m2();

    // block and node sums of B = log M
    let mut block_sums = Mat::<T>::zeros(m1, m1);
    let mut node_sums = Mat::<T>::zeros(m2, m2);
    let mut total = T::zero();
    for j in 0..m1 {
        for k in 0..m1 {
            for i in 0..m2 {
                for l in 0..m2 {
                    let v = m.get(shape.flat0(j, i), shape.flat0(k, l)).ln();
                    block_sums.set(j, k, block_sums.get(j, k) + v);
                    node_sums.set(i, l, node_sums.get(i, l) + v);
                    total += v;
                }
            }
        }
    }

    let t = total / from_usize::<T>(m1 * m1 + m2 * m2);
    let m1_sq = from_usize::<T>(m1 * m1);
    let m2_sq = from_usize::<T>(m2 * m2);
    let mut w = Mat::zeros(m1, m1);
    for j in 0..m1 {
        for k in 0..m1 {
            w.set(j, k, (block_sums.get(j, k) - t) / m2_sq);
        }
    }
    let mut y = Mat::zeros(m2, m2);
    for i in 0..m2 {
        for l in 0..m2 {
            y.set(i, l, (node_sums.get(i, l) - t) / m1_sq);
        }
    }

    // residual of the fitted values w_jk + y_il against B
    let mut acc = T::zero();
    for j in 0..m1 {
        for k in 0..m1 {
            for i in 0..m2 {
                for l in 0..m2 {
                    let b = m.get(shape.flat0(j, i), shape.flat0(k, l)).ln();
                    let r = b - w.get(j, k) - y.get(i, l);
                    acc += r * r;
                }
            }
        }
    }
    Ok((w, y, acc.sqrt()))
}

/// Computes initial weights from a sample covariance.
///
/// `M = abs(Σ̂⁻¹) + ε·𝟙𝟙ᵀ` is fit by [`kron_log_lstsq`]; the log-factors are
/// exponentiated, then symmetrized as `(exp(W) + exp(W)ᵀ)/2`, and the
/// initial weights are their entrywise reciprocals.
///
/// `eps`: `None` picks `1e-3` times the largest entry of `abs(Σ̂⁻¹)`, which
/// keeps the logarithm bounded at any input scale.
pub fn init_hyperparams<T: Scalar>(
    sigma_hat: &SymMatrix<T>,
    shape: KroneckerShape,
    eps: Option<T>,
) -> Result<KronInitResult<T>, KronInitError> {
    let dim = sigma_hat.dim();
    if dim != shape.flat_dim() {
        return Err(KronInitError::ShapeMismatch {
            dim,
            m1: shape.m1(),
            m2: shape.m2(),
        });
    }
    let inv = cholesky(sigma_hat)?.inverse();
    let abs_inv = inv.abs();
    let eps = match eps {
        Some(e) => {
            if !(e > T::zero()) {
                return Err(KronInitError::NonPositiveEpsilon);
            }
            e
        }
        None => from_f64::<T>(1e-3) * abs_inv.max_abs(),
    };
    let m = SymMatrix::from_fn(dim, |a, b| abs_inv.get(a, b) + eps);
    let (w, y, residual) = kron_log_lstsq(&m, shape)?;

    // exponentiate, then force the symmetric structure
    let half = from_f64::<T>(0.5);
    let w_bar = SymMatrix::from_fn(shape.m1(), |a, b| {
        (w.get(a, b).exp() + w.get(b, a).exp()) * half
    });
    let y_bar = SymMatrix::from_fn(shape.m2(), |a, b| {
        (y.get(a, b).exp() + y.get(b, a).exp()) * half
    });
    let lambda0 = SymMatrix::from_fn(shape.m1(), |a, b| T::one() / w_bar.get(a, b));
    let gamma0 = SymMatrix::from_fn(shape.m2(), |a, b| T::one() / y_bar.get(a, b));
    Ok(KronInitResult {
        w_bar,
        y_bar,
        residual,
        lambda0,
        gamma0,
    })
}
