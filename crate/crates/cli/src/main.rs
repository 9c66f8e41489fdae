//! Command-line interface.
//!
//! Subcommands:
//!
//! - `generate`   — write a suite of synthetic trials to disk;
//! - `fit`        — run one estimator on a covariance file;
//! - `experiment` — run the full Monte Carlo comparison;
//! - `metrics`    — compare an estimate against a reference matrix.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 partial
//! trial failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qkp_glasso_core::estimators::{fit, Estimator, HyperParams, Termination};
use qkp_glasso_core::harness::{emit_outputs, run_experiment, ExperimentConfig, FitConfigFile};
use qkp_glasso_core::kron_init::init_hyperparams;
use qkp_glasso_core::matrix::{
    read_sym_csv, write_data_csv, write_sym_csv, KroneckerShape, SymMatrix,
};
use qkp_glasso_core::metrics::{evaluate, extract_support, relative_error, sparsity_error};
use qkp_glasso_core::rng::RNG_ALGORITHM;
use qkp_glasso_core::synth::{generate_trial, SupportMatrix, Trial};

#[derive(Parser)]
#[command(
    name = "qkp-glasso",
    about = "Sparse Gaussian graphical models with Kronecker-structured supports",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic trial suites to disk.
    Generate(GenerateArgs),
    /// Fit one estimator to a sample covariance read from CSV.
    Fit(FitArgs),
    /// Run the full Monte Carlo experiment.
    Experiment(ExperimentArgs),
    /// Compare two precision matrices / supports.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct CommonFitOpts {
    /// Exponential hyperprior rate (module side for qkp; the only rate for
    /// s1/s2).
    #[arg(long)]
    eps1: Option<f64>,
    /// Exponential hyperprior rate, node side (qkp only).
    #[arg(long)]
    eps2: Option<f64>,
    /// Outer-loop stopping threshold on the Frobenius change.
    #[arg(long)]
    eps_stop: Option<f64>,
    /// Outer iteration budget.
    #[arg(long)]
    max_outer_iter: Option<usize>,
    /// Inner solver KKT tolerance factor (multiplied by N).
    #[arg(long)]
    kkt_tol: Option<f64>,
    /// Inner solver iteration budget.
    #[arg(long)]
    max_inner_iter: Option<usize>,
    /// Inner solver initial penalty.
    #[arg(long)]
    rho_init: Option<f64>,
    /// Disable warm starts between outer iterations.
    #[arg(long)]
    no_warm_start: bool,
}

impl CommonFitOpts {
    fn apply(&self, fit: &mut FitConfigFile) {
        if let Some(v) = self.eps1 {
            fit.eps1 = v;
        }
        if let Some(v) = self.eps2 {
            fit.eps2 = v;
        }
        if let Some(v) = self.eps_stop {
            fit.eps_stop = v;
        }
        if let Some(v) = self.max_outer_iter {
            fit.max_outer_iter = v;
        }
        if let Some(v) = self.kkt_tol {
            fit.solver.kkt_tol_factor = v;
        }
        if let Some(v) = self.max_inner_iter {
            fit.solver.max_inner_iter = v;
        }
        if let Some(v) = self.rho_init {
            fit.solver.rho_init = v;
        }
        if self.no_warm_start {
            fit.solver.warm_start = false;
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of modules.
    #[arg(long)]
    m1: usize,
    /// Nodes per module.
    #[arg(long)]
    m2: usize,
    /// Number of trials to generate.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Samples per trial.
    #[arg(long, short)]
    n: usize,
    /// Edge fraction for both factor graphs.
    #[arg(long, default_value_t = 0.2)]
    fraction: f64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Sample covariance CSV (square, symmetric).
    #[arg(long)]
    sigma: PathBuf,
    /// Sample count behind the covariance.
    #[arg(long, short)]
    n: usize,
    /// Estimator: s1, s2, or qkp.
    #[arg(long)]
    algo: Estimator,
    /// Number of modules (required for qkp).
    #[arg(long)]
    m1: Option<usize>,
    /// Nodes per module (required for qkp).
    #[arg(long)]
    m2: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Base config TOML; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    fit_opts: CommonFitOpts,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Number of modules.
    #[arg(long)]
    m1: Option<usize>,
    /// Nodes per module.
    #[arg(long)]
    m2: Option<usize>,
    /// Number of Monte Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Samples per trial.
    #[arg(long, short)]
    n: Option<usize>,
    /// Edge fraction for both factor graphs.
    #[arg(long)]
    fraction: Option<f64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Estimators to run (comma-separated labels).
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<String>>,
    /// Trial-level parallelism (0 = all cores).
    #[arg(long)]
    parallelism: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Base config TOML; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    fit_opts: CommonFitOpts,
}

#[derive(Args)]
struct MetricsArgs {
    /// Reference precision matrix CSV.
    #[arg(long)]
    truth: PathBuf,
    /// Estimated precision matrix CSV.
    #[arg(long)]
    estimate: PathBuf,
    /// Support threshold.
    #[arg(long, default_value_t = 1e-6)]
    tau: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successful exits
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Metrics(args) => cmd_metrics(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn write_edges(path: &Path, edges: &qkp_glasso_core::synth::EdgeSet) -> Result<()> {
    // one "j k" pair per line, 1-based node ids
    let mut out = String::new();
    for (a, b) in edges.iter() {
        out.push_str(&format!("{} {}\n", a + 1, b + 1));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode> {
    let shape = KroneckerShape::new(args.m1, args.m2)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    for t in 0..args.trials {
        let seed = qkp_glasso_core::rng::derive_seed(args.seed, &[0x7472_6961, t as u64]);
        let trial: Trial<f64> = generate_trial(shape, args.fraction, args.n, seed)?;
        let dir = args.out.join(format!("trial_{t:03}"));
        std::fs::create_dir_all(&dir)?;
        write_sym_csv(&dir.join("S_true.csv"), &trial.model.s_true)?;
        write_sym_csv(&dir.join("E.csv"), &trial.model.support.to_sym_matrix::<f64>())?;
        write_edges(&dir.join("omega1.edges"), &trial.model.omega1)?;
        write_edges(&dir.join("omega2.edges"), &trial.model.omega2)?;
        write_data_csv(&dir.join("data.csv"), &trial.data)?;
        write_sym_csv(&dir.join("sigma_hat.csv"), &trial.sigma_hat)?;
        let meta = format!(
            "m1 = {}\nm2 = {}\nn_samples = {}\nfraction = {}\nseed = {}\nmaster_seed = {}\ntrial = {}\nrng_algorithm = {:?}\n",
            args.m1, args.m2, args.n, args.fraction, seed, args.seed, t, RNG_ALGORITHM
        );
        std::fs::write(dir.join("meta.toml"), meta)?;
    }
    println!(
        "wrote {} trial(s) under {}",
        args.trials,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn load_fit_config(path: Option<&Path>) -> Result<FitConfigFile> {
    match path {
        None => Ok(FitConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            let cfg: FitConfigFile =
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            Ok(cfg)
        }
    }
}

fn cmd_fit(args: FitArgs) -> Result<ExitCode> {
    let sigma: SymMatrix<f64> = read_sym_csv(&args.sigma)
        .with_context(|| format!("reading {}", args.sigma.display()))?;
    let dim = sigma.dim();
    let shape = match (args.m1, args.m2) {
        (Some(m1), Some(m2)) => {
            let s = KroneckerShape::new(m1, m2)?;
            if s.flat_dim() != dim {
                bail!("shape {m1}x{m2} does not match covariance dimension {dim}");
            }
            s
        }
        (None, None) => {
            if args.algo == Estimator::Qkp {
                bail!("--m1 and --m2 are required for --algo qkp");
            }
            KroneckerShape::new(1, dim)?
        }
        _ => bail!("--m1 and --m2 must be given together"),
    };

    let mut fit_file = load_fit_config(args.config.as_deref())?;
    args.fit_opts.apply(&mut fit_file);
    let config = fit_file.to_config();

    let init = match args.algo {
        Estimator::Qkp => {
            let ki = init_hyperparams(&sigma, shape, None)?;
            HyperParams::Qkp {
                lambda: ki.lambda0,
                gamma: ki.gamma0,
                shape,
            }
        }
        other => HyperParams::ones(other, shape),
    };

    let report = fit(&sigma, args.n, init, &config)?;

    std::fs::create_dir_all(&args.out)?;
    write_sym_csv(&args.out.join("s_hat.csv"), &report.s_hat)?;
    let support = extract_support(&report.s_hat, 1e-6);
    write_sym_csv(&args.out.join("support.csv"), &support.to_sym_matrix::<f64>())?;
    match &report.hyper_final {
        HyperParams::Scalar { gamma } => {
            std::fs::write(args.out.join("gamma.csv"), format!("{gamma}\n"))?;
        }
        HyperParams::Full { gamma } => {
            write_sym_csv(&args.out.join("gamma.csv"), gamma)?;
        }
        HyperParams::Qkp { lambda, gamma, .. } => {
            write_sym_csv(&args.out.join("lambda.csv"), lambda)?;
            write_sym_csv(&args.out.join("gamma.csv"), gamma)?;
        }
    }
    let trace = report
        .objective_trace
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{},{v}\n", i + 1))
        .collect::<String>();
    std::fs::write(
        args.out.join("objective_trace.csv"),
        format!("iteration,objective\n{trace}"),
    )?;
    let termination = match report.termination {
        Termination::Converged => "converged",
        Termination::MaxIter => "max_iter",
    };
    std::fs::write(
        args.out.join("report.toml"),
        format!(
            "algorithm = {:?}\nouter_iterations = {}\ntermination = {termination:?}\nkkt_residual = {}\nn_samples = {}\n",
            args.algo.label(),
            report.outer_iterations,
            report.kkt_residual,
            args.n
        ),
    )?;
    println!(
        "{}: {} outer iterations, {termination}, kkt residual {:.3e}",
        args.algo.label(),
        report.outer_iterations,
        report.kkt_residual
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<ExitCode> {
    let mut config = match args.config.as_deref() {
        None => ExperimentConfig::new(
            args.m1.unwrap_or(6),
            args.m2.unwrap_or(10),
            args.trials.unwrap_or(60),
            args.n.unwrap_or(1000),
        ),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
    };
    if let Some(v) = args.m1 {
        config.m1 = v;
    }
    if let Some(v) = args.m2 {
        config.m2 = v;
    }
    if let Some(v) = args.trials {
        config.trials = v;
    }
    if let Some(v) = args.n {
        config.n_samples = v;
    }
    if let Some(v) = args.fraction {
        config.edge_fraction = v;
    }
    if let Some(v) = args.seed {
        config.master_seed = v;
    }
    if let Some(v) = args.parallelism {
        config.parallelism = v;
    }
    if let Some(v) = args.estimators.clone() {
        config.estimators = v;
    }
    args.fit_opts.apply(&mut config.fit);

    let summary = run_experiment(&config)?;
    emit_outputs(&summary, &args.out)?;

    for es in &summary.per_estimator {
        println!(
            "{:4} hyperparameters={:5}  median e_rel={:.4}  median e_sp={:.4e}",
            es.estimator.label(),
            es.hyperparameter_count,
            es.e_rel_stats.median,
            es.e_sp_stats.median
        );
    }
    if !summary.failures.is_empty() {
        for (t, msg) in &summary.failures {
            eprintln!("trial {t} failed: {msg}");
        }
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_metrics(args: MetricsArgs) -> Result<ExitCode> {
    let truth: SymMatrix<f64> = read_sym_csv(&args.truth)
        .with_context(|| format!("reading {}", args.truth.display()))?;
    let estimate: SymMatrix<f64> = read_sym_csv(&args.estimate)
        .with_context(|| format!("reading {}", args.estimate.display()))?;
    if truth.dim() != estimate.dim() {
        bail!(
            "dimension mismatch: {} vs {}",
            truth.dim(),
            estimate.dim()
        );
    }
    let is_binary = |m: &SymMatrix<f64>| {
        (0..m.dim()).all(|a| (0..m.dim()).all(|b| m.get(a, b) == 0.0 || m.get(a, b) == 1.0))
    };
    if is_binary(&truth) && is_binary(&estimate) {
        // support-only comparison
        let et = SupportMatrix::from_fn(truth.dim(), |a, b| truth.get(a, b) == 1.0);
        let eh = SupportMatrix::from_fn(estimate.dim(), |a, b| estimate.get(a, b) == 1.0);
        println!("e_sp = {}", sparsity_error::<f64>(&et, &eh));
    } else {
        let e_true = extract_support(&truth, args.tau);
        let errs = evaluate(Estimator::S1, &truth, &e_true, &estimate, args.tau);
        println!("e_rel = {}", relative_error(&truth, &estimate));
        println!("e_sp = {}", errs.e_sp);
        println!("true_positives = {}", errs.true_positives);
        println!("false_positives = {}", errs.false_positives);
        println!("false_negatives = {}", errs.false_negatives);
    }
    Ok(ExitCode::SUCCESS)
}
