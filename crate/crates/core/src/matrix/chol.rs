//! Cholesky factorization: positive-definiteness certificate, log-determinant,
//! triangular solves, and the SPD inverse.

use super::{Mat, MatrixError, SymMatrix};
use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor `L` with `S = L·Lᵀ`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor<T> {
    dim: usize,
    // full row-major storage, strictly upper part zero
    lower: Vec<T>,
}

/// Factors `S = L·Lᵀ`. Failure means `S` is not positive definite; callers
/// branch on that outcome rather than treating it as a fault.
pub fn cholesky<T: Scalar>(s: &SymMatrix<T>) -> Result<CholeskyFactor<T>, MatrixError> {
    let n = s.dim();
    let mut l = vec![T::zero(); n * n];
    for a in 0..n {
        for b in 0..=a {
            let mut sum = s.get(a, b);
            for k in 0..b {
                sum = sum - l[a * n + k] * l[b * n + k];
            }
            if a == b {
                // rejects non-positive and NaN pivots alike
                if !(sum > T::zero()) || !sum.is_finite() {
                    return Err(MatrixError::NotPositiveDefinite);
                }
                l[a * n + a] = sum.sqrt();
            } else {
                l[a * n + b] = sum / l[b * n + b];
            }
        }
    }
    Ok(CholeskyFactor { dim: n, lower: l })
}

/// Certifies `S ≻ 0` and returns `(L, log|S|)`, or `NotPositiveDefinite`.
pub fn cholesky_logdet<T: Scalar>(
    s: &SymMatrix<T>,
) -> Result<(CholeskyFactor<T>, T), MatrixError> {
    let f = cholesky(s)?;
    let ld = f.log_det();
    Ok((f, ld))
}

impl<T: Scalar> CholeskyFactor<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> T {
        self.lower[a * self.dim + b]
    }

    /// `log|S| = 2·Σ log L_aa`.
    pub fn log_det(&self) -> T {
        let mut acc = T::zero();
        for a in 0..self.dim {
            acc += self.lower[a * self.dim + a].ln();
        }
        acc + acc
    }

    /// Solves `L·x = rhs` in place (forward substitution).
    pub fn solve_lower_in_place(&self, x: &mut [T]) {
        let n = self.dim;
        debug_assert_eq!(x.len(), n);
        for a in 0..n {
            let mut sum = x[a];
            for k in 0..a {
                sum = sum - self.lower[a * n + k] * x[k];
            }
            x[a] = sum / self.lower[a * n + a];
        }
    }

    /// Solves `Lᵀ·x = rhs` in place (back substitution).
    pub fn solve_lower_transpose_in_place(&self, x: &mut [T]) {
        let n = self.dim;
        debug_assert_eq!(x.len(), n);
        for a in (0..n).rev() {
            let mut sum = x[a];
            for k in (a + 1)..n {
                sum = sum - self.lower[k * n + a] * x[k];
            }
            x[a] = sum / self.lower[a * n + a];
        }
    }

    /// Explicit `L⁻¹` (lower triangular).
    pub fn invert_lower(&self) -> Mat<T> {
        let n = self.dim;
        let mut x = Mat::zeros(n, n);
        for col in 0..n {
            // solve L * y = e_col
            for a in col..n {
                let mut sum = if a == col { T::one() } else { T::zero() };
                for k in col..a {
                    sum = sum - self.lower[a * n + k] * x.get(k, col);
                }
                x.set(a, col, sum / self.lower[a * n + a]);
            }
        }
        x
    }

    /// The inverse `S⁻¹ = L⁻ᵀ·L⁻¹`, exactly symmetric by construction.
    pub fn inverse(&self) -> SymMatrix<T> {
        let n = self.dim;
        let xinv = self.invert_lower();
        // S⁻¹_ab = Σ_k (L⁻¹)_ka (L⁻¹)_kb; (L⁻¹) lower ⇒ k ≥ max(a,b)
        SymMatrix::from_fn(n, |a, b| {
            let lo = a.max(b);
            let mut acc = T::zero();
            for k in lo..n {
                acc += xinv.get(k, a) * xinv.get(k, b);
            }
            acc
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logdet_identity_is_zero() {
        let s = SymMatrix::<f64>::identity(3);
        let (_, ld) = cholesky_logdet(&s).unwrap();
        assert_eq!(ld, 0.0);
    }

    #[test]
    fn logdet_of_diag_2_2() {
        let s = SymMatrix::diagonal(&[2.0_f64, 2.0]);
        let (_, ld) = cholesky_logdet(&s).unwrap();
        assert!((ld - 2.0 * 2.0_f64.ln()).abs() < 1e-12, "got {ld}");
    }

    #[test]
    fn indefinite_matrix_is_not_pd() {
        // eigenvalues 3 and -1
        let s = SymMatrix::try_from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(
            cholesky_logdet(&s).unwrap_err(),
            MatrixError::NotPositiveDefinite
        );
    }

    #[test]
    fn factor_reproduces_matrix() {
        let s = SymMatrix::try_from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ])
        .unwrap();
        let l = cholesky(&s).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let mut acc = 0.0_f64;
                for k in 0..3 {
                    acc += l.get(a, k) * l.get(b, k);
                }
                assert!((acc - s.get(a, b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let s = SymMatrix::try_from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ])
        .unwrap();
        let inv = cholesky(&s).unwrap().inverse();
        for a in 0..3 {
            for b in 0..3 {
                let mut acc = 0.0_f64;
                for k in 0..3 {
                    acc += s.get(a, k) * inv.get(k, b);
                }
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-12, "({a},{b}) -> {acc}");
            }
        }
    }

    #[test]
    fn triangular_solves_roundtrip() {
        let s = SymMatrix::try_from_rows(&[vec![2.0, 0.3], vec![0.3, 1.5]]).unwrap();
        let l = cholesky(&s).unwrap();
        let rhs = [1.0_f64, -2.0];
        let mut x = rhs;
        l.solve_lower_in_place(&mut x);
        // check L x = rhs
        for a in 0..2 {
            let mut acc = 0.0_f64;
            for k in 0..=a {
                acc += l.get(a, k) * x[k];
            }
            assert!((acc - rhs[a]).abs() < 1e-14);
        }
        let mut y = rhs;
        l.solve_lower_transpose_in_place(&mut y);
        for a in 0..2 {
            let mut acc = 0.0_f64;
            for k in a..2 {
                acc += l.get(k, a) * y[k];
            }
            assert!((acc - rhs[a]).abs() < 1e-14);
        }
    }
}
