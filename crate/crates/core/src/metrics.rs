//! Support extraction and estimation error metrics.

use crate::estimators::Estimator;
use crate::matrix::SymMatrix;
use crate::scalar::{from_usize, Scalar};
use crate::synth::SupportMatrix;

/// Errors of one estimator on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialErrors<T> {
    pub estimator: Estimator,
    /// `‖S_true − Ŝ‖_F / ‖S_true‖_F`.
    pub e_rel: T,
    /// `‖E_true − Ê‖_F / (m(m+1)/2)`: square-root mismatch numerator over a
    /// pair-count denominator, as this benchmark's metric is defined.
    pub e_sp: T,
    /// Plain fraction of mismatched entries among the m(m+1)/2 distinct
    /// positions; auxiliary diagnostic, not the benchmark metric.
    pub mismatch_fraction: T,
    /// Off-diagonal edges present in both supports.
    pub true_positives: usize,
    /// Edges estimated but absent from the truth.
    pub false_positives: usize,
    /// Edges in the truth the estimate missed.
    pub false_negatives: usize,
}

/// Thresholded support of an estimate: entry `(a,b)`, `a ≠ b`, is an edge
/// iff `|s_ab| > τ·max(d, 1)` where `d` is the largest diagonal magnitude;
/// the diagonal is always in the support.
///
/// The solver returns exact zeros, so the default `τ = 1e-6` only guards
/// round-off in the positive-definiteness fallback path.
pub fn extract_support<T: Scalar>(s_hat: &SymMatrix<T>, tau: T) -> SupportMatrix {
    let dim = s_hat.dim();
    let diag_scale = (0..dim).fold(T::zero(), |acc, a| acc.max(s_hat.get(a, a).abs()));
    let threshold = tau * diag_scale.max(T::one());
    SupportMatrix::from_fn(dim, |a, b| s_hat.get(a, b).abs() > threshold)
}

/// Default support threshold.
pub fn default_support_tau<T: Scalar>() -> T {
    crate::scalar::from_f64(1e-6)
}

/// Relative Frobenius error `‖S_true − Ŝ‖_F / ‖S_true‖_F`.
pub fn relative_error<T: Scalar>(s_true: &SymMatrix<T>, s_hat: &SymMatrix<T>) -> T {
    s_true.frobenius_distance(s_hat) / s_true.frobenius_norm()
}

/// Sparsity-pattern error `‖E_true − Ê‖_F / (m(m+1)/2)`.
///
/// The numerator is the square root of the number of mismatched entries (a
/// symmetric mismatch contributes two); the denominator counts the distinct
/// entries of a symmetric m×m matrix. Implemented verbatim, square root and
/// all.
pub fn sparsity_error<T: Scalar>(e_true: &SupportMatrix, e_hat: &SupportMatrix) -> T {
    let m = e_true.dim();
    let mismatches = from_usize::<T>(e_true.mismatch_count(e_hat));
    mismatches.sqrt() / from_usize::<T>(m * (m + 1) / 2)
}

/// Evaluates one estimate against the ground truth.
pub fn evaluate<T: Scalar>(
    estimator: Estimator,
    s_true: &SymMatrix<T>,
    e_true: &SupportMatrix,
    s_hat: &SymMatrix<T>,
    tau: T,
) -> TrialErrors<T> {
    let e_hat = extract_support(s_hat, tau);
    let dim = e_true.dim();
    let mut tp = 0;
    let mut fp = 0;
    let mut fne = 0;
    for a in 0..dim {
        for b in 0..a {
            match (e_true.get(a, b), e_hat.get(a, b)) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fne += 1,
                (false, false) => {}
            }
        }
    }
    let pair_count = from_usize::<T>(dim * (dim + 1) / 2);
    let mismatch_fraction = from_usize::<T>(fp + fne) / pair_count;
    TrialErrors {
        estimator,
        e_rel: relative_error(s_true, s_hat),
        e_sp: sparsity_error(e_true, &e_hat),
        mismatch_fraction,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fne,
    }
}
