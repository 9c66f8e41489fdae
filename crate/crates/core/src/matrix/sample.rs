//! Zero-mean Gaussian sampling and the sample covariance.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{cholesky, DataMatrix, MatrixError, SymMatrix};
use crate::rng::rng_from_seed;
use crate::scalar::{from_usize, Scalar};

/// Draws `n` i.i.d. samples from `N(0, S⁻¹)` where `s_true` is the
/// concentration matrix. Deterministic for a given seed.
///
/// The covariance factor is obtained from the Cholesky factor of `s_true`
/// itself: with `S = L·Lᵀ`, each sample is `x = L⁻ᵀ·g`, `g ~ N(0, I)`, so
/// `S⁻¹` is never formed by general inversion.
pub fn sample_gaussian<T: Scalar>(
    s_true: &SymMatrix<T>,
    n: usize,
    seed: u64,
) -> Result<DataMatrix<T>, MatrixError>
where
    StandardNormal: Distribution<T>,
{
    let mut rng = rng_from_seed(seed);
    sample_gaussian_with(s_true, n, &mut rng)
}

/// Same as [`sample_gaussian`] with a caller-provided generator.
pub fn sample_gaussian_with<T: Scalar, R: Rng>(
    s_true: &SymMatrix<T>,
    n: usize,
    rng: &mut R,
) -> Result<DataMatrix<T>, MatrixError>
where
    StandardNormal: Distribution<T>,
{
    if n == 0 {
        return Err(MatrixError::Empty("sample count N must be >= 1"));
    }
    let m = s_true.dim();
    let factor = cholesky(s_true)?;
    let mut data = vec![T::zero(); n * m];
    for k in 0..n {
        let row = &mut data[k * m..(k + 1) * m];
        for v in row.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        // x solves Lᵀ x = g  ⇒  cov(x) = L⁻ᵀ L⁻¹ = S⁻¹
        factor.solve_lower_transpose_in_place(row);
    }
    DataMatrix::new(n, m, data)
}

/// Sample covariance `(1/N)·Σ_k x_k·x_kᵀ` of zero-mean data. No centering is
/// applied: the model is zero-mean.
pub fn sample_covariance<T: Scalar>(data: &DataMatrix<T>) -> SymMatrix<T> {
    let n = data.n_samples();
    let m = data.dim();
    let inv_n = T::one() / from_usize::<T>(n);
    let mut acc: SymMatrix<T> = SymMatrix::zeros(m);
    for k in 0..n {
        let x = data.sample(k);
        for a in 0..m {
            for b in 0..=a {
                let v = acc.get(a, b) + x[a] * x[b];
                acc.set_sym(a, b, v);
            }
        }
    }
    SymMatrix::from_fn(m, |a, b| acc.get(a, b) * inv_n)
}
