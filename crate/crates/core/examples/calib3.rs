use qkp_glasso_core::estimators::{fit, Estimator, FitConfig, HyperParams};
use qkp_glasso_core::kron_init::init_hyperparams;
use qkp_glasso_core::matrix::KroneckerShape;
use qkp_glasso_core::metrics::evaluate;
use qkp_glasso_core::synth::{generate_trial, Trial};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let eps1: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.02);
    let eps2: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.02);
    let m1: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(6);
    let m2: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(10);
    let init_kind = args.get(5).map(|s| s.as_str()).unwrap_or("kron").to_string();
    let shape = KroneckerShape::new(m1, m2).unwrap();
    let trial: Trial<f64> = generate_trial(shape, 0.2, 1000, qkp_glasso_core::rng::derive_seed(42, &[0x74726961, 0])).unwrap();
    let mut config = FitConfig::default();
    config.eps1 = eps1;
    config.eps2 = eps2;

    let init = if init_kind == "kron" {
        let ki = init_hyperparams(&trial.sigma_hat, shape, None).unwrap();
        let l: Vec<f64> = (0..m1).flat_map(|a| (0..m1).map(move |b| (a, b))).map(|(a, b)| ki.lambda0.get(a, b)).collect();
        let g: Vec<f64> = (0..m2).flat_map(|a| (0..m2).map(move |b| (a, b))).map(|(a, b)| ki.gamma0.get(a, b)).collect();
        let minmax = |v: &[f64]| (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(0.0_f64, f64::max));
        println!("kron-init lambda0 range: {:?}", minmax(&l));
        println!("kron-init gamma0  range: {:?}", minmax(&g));
        HyperParams::Qkp { lambda: ki.lambda0, gamma: ki.gamma0, shape }
    } else {
        HyperParams::ones(Estimator::Qkp, shape)
    };
    let report = fit(&trial.sigma_hat, 1000, init, &config).unwrap();
    let errs = evaluate(Estimator::Qkp, &trial.model.s_true, &trial.model.support, &report.s_hat, 1e-6);
    println!("init={init_kind} eps=({eps1},{eps2}): tp={} fp={} fn={} e_rel={:.3} outer={}",
        errs.true_positives, errs.false_positives, errs.false_negatives, errs.e_rel, report.outer_iterations);
    if let HyperParams::Qkp { lambda, gamma, .. } = &report.hyper_final {
        let l: Vec<f64> = (0..m1).flat_map(|a| (0..m1).map(move |b| (a, b))).map(|(a, b)| lambda.get(a, b)).collect();
        let g: Vec<f64> = (0..m2).flat_map(|a| (0..m2).map(move |b| (a, b))).map(|(a, b)| gamma.get(a, b)).collect();
        let minmax = |v: &[f64]| (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(0.0_f64, f64::max));
        println!("final lambda range: {:?}", minmax(&l));
        println!("final gamma  range: {:?}", minmax(&g));
    }
}
