use qkp_glasso_core::harness::{run_experiment, ExperimentConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let eps1: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.01);
    let eps2: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.01);
    let trials: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(20);
    let m1: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(3);
    let m2: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(4);
    let mut config = ExperimentConfig::new(m1, m2, trials, 1000);
    config.master_seed = 42;
    config.fit.eps1 = eps1;
    config.fit.eps2 = eps2;
    let t0 = std::time::Instant::now();
    let summary = run_experiment(&config).unwrap();
    println!("eps1={eps1} eps2={eps2} trials={trials} shape=({m1},{m2})  elapsed={:.1}s", t0.elapsed().as_secs_f64());
    for es in &summary.per_estimator {
        println!(
            "{:4}  e_sp median={:.6e} [q1={:.2e} q3={:.2e}]   e_rel median={:.4} [q1={:.3} q3={:.3}]",
            es.estimator.label(),
            es.e_sp_stats.median, es.e_sp_stats.q1, es.e_sp_stats.q3,
            es.e_rel_stats.median, es.e_rel_stats.q1, es.e_rel_stats.q3,
        );
    }
    let it: Vec<usize> = summary.outcomes.iter().flat_map(|o| o.results.iter().map(|r| r.outer_iterations)).collect();
    println!("outer iterations: min={} max={}", it.iter().min().unwrap(), it.iter().max().unwrap());
}
