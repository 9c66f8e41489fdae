use qkp_glasso_core::harness::{run_experiment, ExperimentConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let eps1: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.01);
    let eps2: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.01);
    let trials: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(6);
    let mut config = ExperimentConfig::new(
        args.get(4).map(|s| s.parse().unwrap()).unwrap_or(3),
        args.get(5).map(|s| s.parse().unwrap()).unwrap_or(4),
        trials, 1000);
    config.master_seed = 42;
    config.fit.eps1 = eps1;
    config.fit.eps2 = eps2;
    let summary = run_experiment(&config).unwrap();
    println!("eps1={eps1} eps2={eps2}");
    for o in &summary.outcomes {
        print!("trial {} true_edges={:2} | ", o.trial, o.truth.edge_count());
        for r in &o.results {
            print!(
                "{}: tp={:2} fp={:2} fn={:2} e_rel={:.3} it={:2}  ",
                r.estimator.label(),
                r.errors.true_positives,
                r.errors.false_positives,
                r.errors.false_negatives,
                r.errors.e_rel,
                r.outer_iterations
            );
        }
        println!();
    }
}
