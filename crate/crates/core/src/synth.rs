//! Ground-truth model generation.
//!
//! Builds random module/node edge sets with a prescribed edge fraction,
//! forms the Kronecker support `E = E₁ ⊗ E₂` (unit diagonals included — no
//! positive-definite matrix exists otherwise), fills the support with a
//! diagonally dominant precision matrix, and simulates zero-mean Gaussian
//! data from it.
//!
//! The support factors as a Kronecker product; the matrix values do not.

use std::collections::BTreeSet;

use rand::distr::uniform::SampleUniform;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::matrix::{
    cholesky, sample_covariance, sample_gaussian_with, DataMatrix, KroneckerShape, MatrixError,
    SymMatrix,
};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::{from_f64, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("edge ({a},{b}) out of range for {nodes} nodes")]
    EdgeOutOfRange { a: usize, b: usize, nodes: usize },
    #[error("self-loop ({0},{0}) not allowed")]
    SelfLoop(usize),
    #[error("edge fraction {0} must lie in [0, 1]")]
    BadFraction(f64),
    #[error("value range is degenerate; could not produce nonzero entries")]
    RetryExhausted,
}

/// Undirected edge set on `0..n_nodes`, no self-loops, pairs unordered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    n_nodes: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(
        n_nodes: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, SynthError> {
        let mut edges = BTreeSet::new();
        for (a, b) in pairs {
            if a == b {
                return Err(SynthError::SelfLoop(a));
            }
            if a >= n_nodes || b >= n_nodes {
                return Err(SynthError::EdgeOutOfRange {
                    a,
                    b,
                    nodes: n_nodes,
                });
            }
            edges.insert((a.min(b), a.max(b)));
        }
        Ok(EdgeSet { n_nodes, edges })
    }

    pub fn empty(n_nodes: usize) -> Self {
        EdgeSet {
            n_nodes,
            edges: BTreeSet::new(),
        }
    }

    pub fn complete(n_nodes: usize) -> Self {
        let mut edges = BTreeSet::new();
        for a in 0..n_nodes {
            for b in (a + 1)..n_nodes {
                edges.insert((a, b));
            }
        }
        EdgeSet { n_nodes, edges }
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        a != b && self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Edges in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }
}

/// Binary symmetric support matrix with forced unit diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMatrix {
    dim: usize,
    data: Vec<bool>,
}

impl SupportMatrix {
    /// Identity support (diagonal only).
    pub fn diagonal_only(dim: usize) -> Self {
        let mut s = SupportMatrix {
            dim,
            data: vec![false; dim * dim],
        };
        for a in 0..dim {
            s.data[a * dim + a] = true;
        }
        s
    }

    /// Builds from a predicate on off-diagonal pairs; diagonal is always 1.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut s = Self::diagonal_only(dim);
        for a in 0..dim {
            for b in 0..a {
                let v = f(a, b);
                s.data[a * dim + b] = v;
                s.data[b * dim + a] = v;
            }
        }
        s
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> bool {
        self.data[a * self.dim + b]
    }

    /// Number of entries that differ from `other`.
    pub fn mismatch_count(&self, other: &SupportMatrix) -> usize {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Off-diagonal unordered edge pairs present in the support.
    pub fn edge_count(&self) -> usize {
        let mut count = 0;
        for a in 0..self.dim {
            for b in 0..a {
                if self.get(a, b) {
                    count += 1;
                }
            }
        }
        count
    }

    /// 0/1 matrix for writing out.
    pub fn to_sym_matrix<T: Scalar>(&self) -> SymMatrix<T> {
        SymMatrix::from_fn(self.dim, |a, b| {
            if self.get(a, b) {
                T::one()
            } else {
                T::zero()
            }
        })
    }
}

/// Value ranges for ground-truth precision generation.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeOptions<T> {
    /// Smallest off-diagonal magnitude.
    pub min_magnitude: T,
    /// Largest off-diagonal magnitude.
    pub max_magnitude: T,
    /// Diagonal excess over the row-wise absolute sum; also the guaranteed
    /// smallest eigenvalue.
    pub diagonal_margin: T,
}

impl<T: Scalar> Default for MagnitudeOptions<T> {
    fn default() -> Self {
        MagnitudeOptions {
            min_magnitude: from_f64(0.3),
            max_magnitude: from_f64(0.8),
            diagonal_margin: from_f64(0.1),
        }
    }
}

/// Ground-truth model: factor edge sets, Kronecker support, and a positive
/// definite precision matrix supported exactly on it.
#[derive(Debug, Clone, PartialEq)]
pub struct QkpModel<T> {
    pub shape: KroneckerShape,
    pub omega1: EdgeSet,
    pub omega2: EdgeSet,
    pub support: SupportMatrix,
    pub s_true: SymMatrix<T>,
    pub seed: u64,
}

/// One simulated trial: the model, its data realization, and the sample
/// covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial<T> {
    pub model: QkpModel<T>,
    pub data: DataMatrix<T>,
    pub sigma_hat: SymMatrix<T>,
}

/// Uniformly random edge set containing `round(fraction·n(n−1)/2)` edges
/// (round half up). Deterministic per seed.
pub fn random_edge_set(n: usize, fraction: f64, seed: u64) -> Result<EdgeSet, SynthError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(SynthError::BadFraction(fraction));
    }
    let total = n * n.saturating_sub(1) / 2;
    let count = (fraction * total as f64 + 0.5).floor() as usize;
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(total);
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.push((a, b));
        }
    }
    let mut rng = rng_from_seed(seed);
    let (chosen, _) = pairs.partial_shuffle(&mut rng, count);
    EdgeSet::new(n, chosen.iter().copied())
}

/// Kronecker support `E = (E₁ + I) ⊗ (E₂ + I)` in block coordinates: entry
/// `(jk, il)` is set iff both the module pair and the node pair are present
/// (diagonals count as present).
pub fn kron_support(omega1: &EdgeSet, omega2: &EdgeSet, shape: KroneckerShape) -> SupportMatrix {
    debug_assert_eq!(omega1.n_nodes(), shape.m1());
    debug_assert_eq!(omega2.n_nodes(), shape.m2());
    SupportMatrix::from_fn(shape.flat_dim(), |a, b| {
        let (j, i) = shape.unflat0(a);
        let (k, l) = shape.unflat0(b);
        let module_ok = j == k || omega1.contains(j, k);
        let node_ok = i == l || omega2.contains(i, l);
        module_ok && node_ok
    })
}

/// Random symmetric positive definite matrix supported exactly on `E`.
///
/// Off-diagonal support entries draw magnitudes uniformly from the
/// configured range with random signs; the diagonal is the row-wise
/// absolute sum plus the margin, which makes the matrix strictly diagonally
/// dominant, hence positive definite with smallest eigenvalue at least the
/// margin. Zero draws are regenerated so the support is exact.
pub fn random_qkp_precision<T: Scalar + SampleUniform>(
    support: &SupportMatrix,
    seed: u64,
    opts: &MagnitudeOptions<T>,
) -> Result<SymMatrix<T>, SynthError> {
    let mut rng = rng_from_seed(seed);
    random_qkp_precision_with(support, &mut rng, opts)
}

/// Same as [`random_qkp_precision`] with a caller-provided generator.
pub fn random_qkp_precision_with<T: Scalar + SampleUniform, R: Rng>(
    support: &SupportMatrix,
    rng: &mut R,
    opts: &MagnitudeOptions<T>,
) -> Result<SymMatrix<T>, SynthError> {
    const MAX_RETRIES: usize = 64;
    let dim = support.dim();
    let mut s: SymMatrix<T> = SymMatrix::zeros(dim);
    for a in 0..dim {
        for b in 0..a {
            if !support.get(a, b) {
                continue;
            }
            let mut v = T::zero();
            let mut tries = 0;
            while v == T::zero() {
                if tries >= MAX_RETRIES {
                    return Err(SynthError::RetryExhausted);
                }
                tries += 1;
                let mag = rng.random_range(opts.min_magnitude..=opts.max_magnitude);
                let sign = if rng.random::<bool>() {
                    T::one()
                } else {
                    -T::one()
                };
                v = sign * mag;
            }
            s.set_sym(a, b, v);
        }
    }
    for a in 0..dim {
        let row_abs: T = (0..dim)
            .filter(|&b| b != a)
            .map(|b| s.get(a, b).abs())
            .fold(T::zero(), |acc, v| acc + v);
        s.set_sym(a, a, row_abs + opts.diagonal_margin);
    }
    // construction guarantees this; certify anyway
    cholesky(&s)?;
    Ok(s)
}

/// Generates a full trial: random factor graphs, support, precision, data,
/// and the sample covariance. Component seeds derive from the trial seed, so
/// any part can be regenerated independently.
pub fn generate_trial<T: Scalar + SampleUniform>(
    shape: KroneckerShape,
    fraction: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Trial<T>, SynthError>
where
    StandardNormal: Distribution<T>,
{
    generate_trial_with(shape, fraction, n_samples, seed, &MagnitudeOptions::default())
}

/// [`generate_trial`] with explicit value ranges for the ground truth.
pub fn generate_trial_with<T: Scalar + SampleUniform>(
    shape: KroneckerShape,
    fraction: f64,
    n_samples: usize,
    seed: u64,
    opts: &MagnitudeOptions<T>,
) -> Result<Trial<T>, SynthError>
where
    StandardNormal: Distribution<T>,
{
    let omega1 = random_edge_set(shape.m1(), fraction, derive_seed(seed, &[1]))?;
    let omega2 = random_edge_set(shape.m2(), fraction, derive_seed(seed, &[2]))?;
    let support = kron_support(&omega1, &omega2, shape);
    let s_true = random_qkp_precision(&support, derive_seed(seed, &[3]), opts)?;
    let mut data_rng = rng_from_seed(derive_seed(seed, &[4]));
    let data = sample_gaussian_with(&s_true, n_samples, &mut data_rng)?;
    let sigma_hat = sample_covariance(&data);
    Ok(Trial {
        model: QkpModel {
            shape,
            omega1,
            omega2,
            support,
            s_true,
            seed,
        },
        data,
        sigma_hat,
    })
}

impl<T: Scalar> QkpModel<T> {
    /// Support equality between `s_true` and `support`: every support entry
    /// is nonzero and every nonzero is in the support.
    pub fn support_is_exact(&self) -> bool {
        let dim = self.s_true.dim();
        for a in 0..dim {
            for b in 0..dim {
                let nonzero = self.s_true.get(a, b) != T::zero();
                if nonzero != self.support.get(a, b) {
                    return false;
                }
            }
        }
        true
    }
}
