//! Estimation of sparse Gaussian graphical models whose concentration-matrix
//! support factors as a Kronecker product.
//!
//! The crate provides:
//!
//! - a dense symmetric-matrix kernel ([`matrix`]): Cholesky with
//!   log-determinant, symmetric eigendecomposition, Kronecker block indexing,
//!   Gaussian sampling, sample covariance, CSV I/O;
//! - a weighted graphical-lasso solver ([`glasso`]): penalized Gaussian
//!   maximum likelihood with an arbitrary nonnegative symmetric weight on
//!   entrywise absolute values, solved by proximal ADMM and certified by
//!   KKT residuals;
//! - three iteratively reweighted estimators ([`estimators`]): a scalar
//!   weight (S1), a full weight matrix (S2), and a Kronecker-factored weight
//!   pair (QKP), each alternating a glasso solve with closed-form
//!   hyperparameter updates;
//! - a log-domain Kronecker least-squares initialization ([`kron_init`]);
//! - synthetic ground-truth model generation ([`synth`]) and error metrics
//!   ([`metrics`]);
//! - a Monte Carlo experiment harness ([`harness`]).
//!
//! All numeric code is generic over the scalar type ([`Scalar`]: `f32` or
//! `f64`); the aliases below fix `f64`, the default currency of the CLI.

pub mod estimators;
pub mod glasso;
pub mod harness;
pub mod kron_init;
pub mod matrix;
pub mod metrics;
pub mod rng;
pub mod synth;

mod scalar;

pub use scalar::Scalar;

/// `f64` symmetric matrix.
pub type SymMatrix64 = matrix::SymMatrix<f64>;
/// `f64` dense matrix.
pub type Mat64 = matrix::Mat<f64>;
/// `f64` data matrix.
pub type DataMatrix64 = matrix::DataMatrix<f64>;


/// `f64` weight matrix.
pub type WeightMatrix64 = glasso::WeightMatrix<f64>;
/// `f64` solver solution.
pub type GlassoSolution64 = glasso::GlassoSolution<f64>;
/// `f64` hyperparameters.
pub type HyperParams64 = estimators::HyperParams<f64>;
/// `f64` fit report.
pub type FitReport64 = estimators::FitReport<f64>;

