//! Monte Carlo experiment harness.
//!
//! Generates a suite of ground-truth models, runs the configured estimators
//! on each trial, collects the two error metrics, and writes the result
//! tables. Trials run concurrently; each trial's estimator fits run
//! sequentially so per-trial timings are comparable. All trial seeds are
//! derived up front from the master seed, so results are identical at any
//! parallelism degree and any trial can be reproduced in isolation.
//!
//! Output layout under the chosen directory:
//!
//! - `resolved_config.toml` — the full effective configuration;
//! - `errors.csv` — `trial,estimator,e_rel,e_sp,iterations` (deterministic);
//! - `timings.csv` — `trial,estimator,seconds` (wall-clock, not
//!   reproducible, kept out of `errors.csv` on purpose);
//! - `boxplot.csv` — five-number summaries per estimator and metric;
//! - `summary.toml` — medians, hyperparameter dimensionalities, failures;
//! - `trials/trial_NNN/support_*.csv` and `supports.txt` — 0/1 support
//!   grids per estimator plus the ground truth, and an aligned text
//!   rendering.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{
    fit, Estimator, FitConfig, FitError, HyperParams, Termination,
};
use crate::glasso::SolverOptions;
use crate::kron_init::{init_hyperparams, KronInitError};
use crate::matrix::{write_sym_csv, KroneckerShape, MatrixError, SymMatrix};
use crate::metrics::{evaluate, extract_support, TrialErrors};
use crate::rng::{derive_seed, RNG_ALGORITHM};
use crate::synth::{generate_trial, SupportMatrix, Trial};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("trial {trial}: {message}")]
    Trial { trial: usize, message: String },
    #[error("io error at {path}: {err}")]
    Io { path: PathBuf, err: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("config serialization: {0}")]
    Toml(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |err| HarnessError::Io {
        path: path.to_path_buf(),
        err: err.to_string(),
    }
}

/// Solver options as they appear in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfigFile {
    pub kkt_tol_factor: f64,
    pub residual_tol_factor: f64,
    pub max_inner_iter: usize,
    pub rho_init: f64,
    pub warm_start: bool,
}

impl Default for SolverConfigFile {
    fn default() -> Self {
        let d = SolverOptions::<f64>::default();
        SolverConfigFile {
            kkt_tol_factor: d.kkt_tol_factor,
            residual_tol_factor: d.residual_tol_factor,
            max_inner_iter: d.max_inner_iter,
            rho_init: d.rho_init,
            warm_start: d.warm_start,
        }
    }
}

impl SolverConfigFile {
    pub fn to_options(&self) -> SolverOptions<f64> {
        SolverOptions {
            kkt_tol_factor: self.kkt_tol_factor,
            residual_tol_factor: self.residual_tol_factor,
            max_inner_iter: self.max_inner_iter,
            rho_init: self.rho_init,
            warm_start: self.warm_start,
            ..SolverOptions::default()
        }
    }
}

/// Outer-loop options as they appear in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfigFile {
    pub eps1: f64,
    pub eps2: f64,
    pub eps_stop: f64,
    pub max_outer_iter: usize,
    pub solver: SolverConfigFile,
}

impl Default for FitConfigFile {
    fn default() -> Self {
        let d = FitConfig::<f64>::default();
        FitConfigFile {
            eps1: d.eps1,
            eps2: d.eps2,
            eps_stop: d.eps_stop,
            max_outer_iter: d.max_outer_iter,
            solver: SolverConfigFile::default(),
        }
    }
}

impl FitConfigFile {
    pub fn to_config(&self) -> FitConfig<f64> {
        FitConfig {
            eps1: self.eps1,
            eps2: self.eps2,
            eps_stop: self.eps_stop,
            max_outer_iter: self.max_outer_iter,
            solver: self.solver.to_options(),
        }
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m1: usize,
    pub m2: usize,
    pub trials: usize,
    pub n_samples: usize,
    pub edge_fraction: f64,
    /// Estimators to run, by label (`s1`, `s2`, `qkp`).
    pub estimators: Vec<String>,
    pub master_seed: u64,
    /// Worker threads for trial-level parallelism; 0 means all cores.
    #[serde(default)]
    pub parallelism: usize,
    /// Support extraction threshold.
    #[serde(default = "default_tau")]
    pub support_tau: f64,
    #[serde(default)]
    pub fit: FitConfigFile,
    /// Generator identity, recorded for provenance.
    #[serde(default = "default_rng")]
    pub rng_algorithm: String,
}

fn default_tau() -> f64 {
    crate::metrics::default_support_tau::<f64>()
}

fn default_rng() -> String {
    RNG_ALGORITHM.to_string()
}

impl ExperimentConfig {
    pub fn new(m1: usize, m2: usize, trials: usize, n_samples: usize) -> Self {
        ExperimentConfig {
            m1,
            m2,
            trials,
            n_samples,
            edge_fraction: 0.2,
            estimators: Estimator::ALL.iter().map(|e| e.label().to_string()).collect(),
            master_seed: 0,
            parallelism: 0,
            support_tau: default_tau(),
            fit: FitConfigFile::default(),
            rng_algorithm: default_rng(),
        }
    }

    pub fn shape(&self) -> Result<KroneckerShape, HarnessError> {
        KroneckerShape::new(self.m1, self.m2)
            .map_err(|e| HarnessError::Invalid(e.to_string()))
    }

    pub fn parsed_estimators(&self) -> Result<Vec<Estimator>, HarnessError> {
        if self.estimators.is_empty() {
            return Err(HarnessError::Invalid("estimator list is empty".into()));
        }
        self.estimators
            .iter()
            .map(|s| s.parse::<Estimator>().map_err(HarnessError::Invalid))
            .collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.shape()?;
        self.parsed_estimators()?;
        if self.trials == 0 {
            return Err(HarnessError::Invalid("trials must be >= 1".into()));
        }
        if self.n_samples == 0 {
            return Err(HarnessError::Invalid("n_samples must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.edge_fraction) {
            return Err(HarnessError::Invalid(format!(
                "edge_fraction {} must lie in [0, 1]",
                self.edge_fraction
            )));
        }
        if self.rng_algorithm != RNG_ALGORITHM {
            return Err(HarnessError::Invalid(format!(
                "unsupported rng_algorithm {:?} (this build provides {RNG_ALGORITHM:?})",
                self.rng_algorithm
            )));
        }
        self.fit
            .to_config()
            .validate()
            .map_err(|e| HarnessError::Invalid(e.to_string()))?;
        Ok(())
    }

    /// The derived seed of one trial.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.master_seed, &[0x7472_6961, trial as u64])
    }
}

/// One estimator's outcome on one trial.
#[derive(Debug, Clone)]
pub struct EstimatorOutcome {
    pub estimator: Estimator,
    pub errors: TrialErrors<f64>,
    pub outer_iterations: usize,
    pub termination: Termination,
    pub seconds: f64,
    pub support: SupportMatrix,
}

/// One trial's outcome.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub truth: SupportMatrix,
    pub results: Vec<EstimatorOutcome>,
    pub seconds: f64,
}

/// Five-number summary.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Per-estimator aggregate across trials.
#[derive(Debug, Clone)]
pub struct EstimatorSummary {
    pub estimator: Estimator,
    pub hyperparameter_count: usize,
    pub e_rel: Vec<f64>,
    pub e_sp: Vec<f64>,
    pub e_rel_stats: FiveNumber,
    pub e_sp_stats: FiveNumber,
}

/// Experiment output.
#[derive(Debug)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub outcomes: Vec<TrialOutcome>,
    pub per_estimator: Vec<EstimatorSummary>,
    /// Wall-clock seconds per completed trial.
    pub trial_seconds: Vec<f64>,
    /// Failed trials with their errors; failed trials are skipped in the
    /// aggregates.
    pub failures: Vec<(usize, String)>,
}

/// Linear-interpolation quantile of a sorted slice (the `h = (n−1)p` rule).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = lo + 1;
    if hi >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn five_number(values: &[f64]) -> FiveNumber {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite metric"));
    FiveNumber {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    }
}

fn run_single_trial(
    config: &ExperimentConfig,
    shape: KroneckerShape,
    estimators: &[Estimator],
    trial_idx: usize,
) -> Result<TrialOutcome, String> {
    let seed = config.trial_seed(trial_idx);
    let trial: Trial<f64> =
        generate_trial(shape, config.edge_fraction, config.n_samples, seed)
            .map_err(|e| e.to_string())?;
    let fit_config = config.fit.to_config();
    let trial_start = Instant::now();
    let mut results = Vec::with_capacity(estimators.len());
    for &est in estimators {
        let init = match est {
            Estimator::Qkp => {
                let ki = init_hyperparams(&trial.sigma_hat, shape, None)
                    .map_err(|e: KronInitError| e.to_string())?;
                HyperParams::Qkp {
                    lambda: ki.lambda0,
                    gamma: ki.gamma0,
                    shape,
                }
            }
            other => HyperParams::ones(other, shape),
        };
        let start = Instant::now();
        let report = fit(&trial.sigma_hat, config.n_samples, init, &fit_config)
            .map_err(|e: FitError<f64>| format!("{est:?}: {e}"))?;
        let seconds = start.elapsed().as_secs_f64();
        let errors = evaluate(
            est,
            &trial.model.s_true,
            &trial.model.support,
            &report.s_hat,
            config.support_tau,
        );
        results.push(EstimatorOutcome {
            estimator: est,
            errors,
            outer_iterations: report.outer_iterations,
            termination: report.termination,
            seconds,
            support: extract_support(&report.s_hat, config.support_tau),
        });
    }
    Ok(TrialOutcome {
        trial: trial_idx,
        seed,
        truth: trial.model.support.clone(),
        results,
        seconds: trial_start.elapsed().as_secs_f64(),
    })
}

/// Runs the full Monte Carlo experiment in memory.
///
/// Trials are independent and run on a dedicated thread pool; outcomes are
/// ordered by trial index regardless of completion order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary, HarnessError> {
    config.validate()?;
    let shape = config.shape()?;
    let estimators = config.parsed_estimators()?;

    let threads = if config.parallelism == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        config.parallelism
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Invalid(format!("thread pool: {e}")))?;

    let raw: Vec<Result<TrialOutcome, String>> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_single_trial(config, shape, &estimators, t))
            .collect()
    });

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for (t, r) in raw.into_iter().enumerate() {
        match r {
            Ok(o) => outcomes.push(o),
            Err(message) => failures.push((t, message)),
        }
    }
    if outcomes.is_empty() {
        let (trial, message) = failures
            .first()
            .cloned()
            .unwrap_or((0, "no trials produced output".into()));
        return Err(HarnessError::Trial { trial, message });
    }

    let per_estimator = estimators
        .iter()
        .map(|&est| {
            let e_rel: Vec<f64> = outcomes
                .iter()
                .flat_map(|o| o.results.iter())
                .filter(|r| r.estimator == est)
                .map(|r| r.errors.e_rel)
                .collect();
            let e_sp: Vec<f64> = outcomes
                .iter()
                .flat_map(|o| o.results.iter())
                .filter(|r| r.estimator == est)
                .map(|r| r.errors.e_sp)
                .collect();
            EstimatorSummary {
                estimator: est,
                hyperparameter_count: est.hyperparameter_count(shape),
                e_rel_stats: five_number(&e_rel),
                e_sp_stats: five_number(&e_sp),
                e_rel,
                e_sp,
            }
        })
        .collect();

    let trial_seconds = outcomes.iter().map(|o| o.seconds).collect();
    Ok(ExperimentSummary {
        config: config.clone(),
        outcomes,
        per_estimator,
        trial_seconds,
        failures,
    })
}

/// Writes every output table of a finished experiment.
pub fn emit_outputs(summary: &ExperimentSummary, dir: &Path) -> Result<(), HarnessError> {
    if summary.outcomes.is_empty() {
        return Err(HarnessError::Invalid(
            "refusing to emit outputs for an empty experiment".into(),
        ));
    }
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;

    // config echo
    let config_path = dir.join("resolved_config.toml");
    let toml = toml::to_string_pretty(&summary.config)
        .map_err(|e| HarnessError::Toml(e.to_string()))?;
    std::fs::write(&config_path, toml).map_err(io_err(&config_path))?;

    // errors.csv: deterministic content only
    let errors_path = dir.join("errors.csv");
    {
        let mut out = String::from("trial,estimator,e_rel,e_sp,iterations\n");
        for o in &summary.outcomes {
            for r in &o.results {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    o.trial,
                    r.estimator.label(),
                    r.errors.e_rel,
                    r.errors.e_sp,
                    r.outer_iterations
                ));
            }
        }
        std::fs::write(&errors_path, out).map_err(io_err(&errors_path))?;
    }

    // timings.csv: wall-clock, intentionally separate
    let timings_path = dir.join("timings.csv");
    {
        let mut out = String::from("trial,estimator,seconds\n");
        for o in &summary.outcomes {
            for r in &o.results {
                out.push_str(&format!(
                    "{},{},{:.6}\n",
                    o.trial,
                    r.estimator.label(),
                    r.seconds
                ));
            }
        }
        std::fs::write(&timings_path, out).map_err(io_err(&timings_path))?;
    }

    // boxplot.csv
    let boxplot_path = dir.join("boxplot.csv");
    {
        let mut out = String::from("estimator,metric,min,q1,median,q3,max\n");
        for es in &summary.per_estimator {
            for (metric, st) in [("e_rel", es.e_rel_stats), ("e_sp", es.e_sp_stats)] {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    es.estimator.label(),
                    metric,
                    st.min,
                    st.q1,
                    st.median,
                    st.q3,
                    st.max
                ));
            }
        }
        std::fs::write(&boxplot_path, out).map_err(io_err(&boxplot_path))?;
    }

    // summary.toml
    let summary_path = dir.join("summary.toml");
    {
        let mut out = String::new();
        out.push_str(&format!(
            "trials_completed = {}\ntrials_failed = {}\n",
            summary.outcomes.len(),
            summary.failures.len()
        ));
        for es in &summary.per_estimator {
            out.push_str(&format!(
                "\n[estimator.{}]\nhyperparameter_count = {}\nmedian_e_rel = {}\nmedian_e_sp = {}\n",
                es.estimator.label(),
                es.hyperparameter_count,
                es.e_rel_stats.median,
                es.e_sp_stats.median
            ));
        }
        if !summary.failures.is_empty() {
            out.push_str("\n[failures]\n");
            for (t, msg) in &summary.failures {
                out.push_str(&format!("trial_{t} = {msg:?}\n"));
            }
        }
        std::fs::write(&summary_path, out).map_err(io_err(&summary_path))?;
    }

    // per-trial support grids
    for o in &summary.outcomes {
        let trial_dir = dir.join("trials").join(format!("trial_{:03}", o.trial));
        std::fs::create_dir_all(&trial_dir).map_err(io_err(&trial_dir))?;
        let truth_path = trial_dir.join("support_true.csv");
        write_support_csv(&truth_path, &o.truth)?;
        for r in &o.results {
            let p = trial_dir.join(format!("support_{}.csv", r.estimator.label()));
            write_support_csv(&p, &r.support)?;
        }
        let text_path = trial_dir.join("supports.txt");
        let mut f = std::fs::File::create(&text_path).map_err(io_err(&text_path))?;
        let m2 = summary.config.m2;
        write_support_text(&mut f, "true", &o.truth, m2).map_err(io_err(&text_path))?;
        for r in &o.results {
            write_support_text(&mut f, r.estimator.label(), &r.support, m2)
                .map_err(io_err(&text_path))?;
        }
    }

    Ok(())
}

fn write_support_csv(path: &Path, support: &SupportMatrix) -> Result<(), HarnessError> {
    let sym: SymMatrix<f64> = support.to_sym_matrix();
    write_sym_csv(path, &sym).map_err(HarnessError::from)
}

/// Renders a support grid with `#` for edges and `.` for holes, separated
/// into module blocks.
fn write_support_text(
    w: &mut impl Write,
    label: &str,
    support: &SupportMatrix,
    m2: usize,
) -> std::io::Result<()> {
    let dim = support.dim();
    writeln!(w, "{label}:")?;
    for a in 0..dim {
        if a > 0 && m2 > 0 && a % m2 == 0 {
            let mut sep = String::new();
            for b in 0..dim {
                if b > 0 && b % m2 == 0 {
                    sep.push_str("-+");
                }
                sep.push('-');
            }
            writeln!(w, "{sep}")?;
        }
        let mut line = String::new();
        for b in 0..dim {
            if b > 0 && m2 > 0 && b % m2 == 0 {
                line.push_str(" |");
            }
            line.push(if support.get(a, b) { '#' } else { '.' });
        }
        writeln!(w, "{line}")?;
    }
    writeln!(w)?;
    Ok(())
}
