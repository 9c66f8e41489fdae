use qkp_glasso_core::estimators::{update_gamma_qkp, update_lambda_qkp, HyperParams};
use qkp_glasso_core::glasso::{solve_weighted_glasso, SolverOptions};
use qkp_glasso_core::kron_init::init_hyperparams;
use qkp_glasso_core::matrix::KroneckerShape;
use qkp_glasso_core::metrics::extract_support;
use qkp_glasso_core::synth::{generate_trial, Trial};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let eps1: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.02);
    let eps2: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.02);
    let iters: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(8);
    let shape = KroneckerShape::new(6, 10).unwrap();
    let n = 1000usize;
    let trial: Trial<f64> = generate_trial(shape, 0.2, n, qkp_glasso_core::rng::derive_seed(42, &[0x74726961, 0])).unwrap();
    let truth = &trial.model.support;
    let count = |s: &qkp_glasso_core::matrix::SymMatrix<f64>| {
        let e = extract_support(s, 1e-6);
        let (mut tp, mut fp, mut fnn) = (0, 0, 0);
        for a in 0..60 {
            for b in 0..a {
                match (truth.get(a, b), e.get(a, b)) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fnn += 1,
                    _ => {}
                }
            }
        }
        (tp, fp, fnn)
    };
    let ki = init_hyperparams(&trial.sigma_hat, shape, None).unwrap();
    let (mut lambda, mut gamma) = (ki.lambda0, ki.gamma0);
    let minmax = |v: &qkp_glasso_core::matrix::SymMatrix<f64>| {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for a in 0..v.dim() { for b in 0..v.dim() { lo = lo.min(v.get(a,b)); hi = hi.max(v.get(a,b)); } }
        (lo, hi)
    };
    let opts = SolverOptions::default();
    let mut warm = None;
    for h in 1..=iters {
        let hp = HyperParams::Qkp { lambda: lambda.clone(), gamma: gamma.clone(), shape };
        let w = hp.weight_matrix(60).unwrap();
        let sol = solve_weighted_glasso(&trial.sigma_hat, n, &w, &opts, warm).unwrap();
        warm = Some(sol.warm.clone());
        let (tp, fp, fnn) = count(&sol.s_hat);
        lambda = update_lambda_qkp(&sol.s_hat, &gamma, eps1, shape);
        gamma = update_gamma_qkp(&sol.s_hat, &lambda, eps2, shape);
        println!(
            "h={h}: tp={tp:3} fp={fp:3} fn={fnn:3}  lambda={:?} gamma={:?}",
            minmax(&lambda), minmax(&gamma)
        );
    }
}
