//! Weighted-glasso solver invariants checked against independent oracles.

mod common;

use common::{jacobi_eigh, random_spd, ref_weighted_glasso, TestRng};
use qkp_glasso_core::glasso::{
    kkt_residual, solve_weighted_glasso, SolverOptions, WeightMatrix,
};
use qkp_glasso_core::matrix::{cholesky_logdet, SymMatrix};

fn random_weights(rng: &mut TestRng, dim: usize) -> WeightMatrix<f64> {
    // mix exact zeros with positive weights
    let w = SymMatrix::from_fn(dim, |_, _| {
        if rng.uniform() < 0.3 {
            0.0
        } else {
            rng.range(0.1, 20.0)
        }
    });
    WeightMatrix::new(w).unwrap()
}

#[test]
fn oracle_sanity_jacobi_reproduces_known_eigenvalues() {
    let s = SymMatrix::try_from_rows(&[vec![1.0_f64, 2.0], vec![2.0, 1.0]]).unwrap();
    let (vals, vecs) = jacobi_eigh(&s);
    assert!((vals[0] + 1.0).abs() < 1e-12);
    assert!((vals[1] - 3.0).abs() < 1e-12);
    // eigenvector residual and orthonormality
    for k in 0..2 {
        for a in 0..2 {
            let mut acc = 0.0;
            for b in 0..2 {
                acc += s.get(a, b) * vecs[b][k];
            }
            assert!((acc - vals[k] * vecs[a][k]).abs() < 1e-12);
        }
    }
    let dot: f64 = (0..2).map(|r| vecs[r][0] * vecs[r][1]).sum();
    assert!(dot.abs() < 1e-12);
}

#[test]
fn logdet_matches_jacobi_eigenvalue_sum() {
    // cross-check by an independent eigenvalue routine on dims up to 10
    let mut rng = TestRng::new(101);
    for dim in [1usize, 2, 3, 5, 7, 10] {
        for _ in 0..3 {
            let s = random_spd(&mut rng, dim);
            let (_, ld) = cholesky_logdet(&s).unwrap();
            let (vals, _) = jacobi_eigh(&s);
            let ld_ref: f64 = vals.iter().map(|v| v.ln()).sum();
            let rel = (ld - ld_ref).abs() / ld_ref.abs().max(1.0);
            assert!(rel < 1e-10, "dim {dim}: {ld} vs {ld_ref}");
        }
    }
}

#[test]
fn solver_matches_reference_on_random_instances() {
    let mut rng = TestRng::new(7);
    for trial in 0..10 {
        let dim = 2 + (trial % 3);
        let sigma = random_spd(&mut rng, dim);
        let n = 20 + 10 * (trial % 4);
        let weights = random_weights(&mut rng, dim);
        let opts = SolverOptions::default();
        let sol = solve_weighted_glasso(&sigma, n, &weights, &opts, None).unwrap();
        let reference = ref_weighted_glasso(&sigma, n, &weights, 1e-8 * n as f64, 400_000);
        for a in 0..dim {
            for b in 0..dim {
                let d = (sol.s_hat.get(a, b) - reference.get(a, b)).abs();
                assert!(
                    d < 1e-4,
                    "trial {trial}: entry ({a},{b}) differs by {d}: {} vs {}",
                    sol.s_hat.get(a, b),
                    reference.get(a, b)
                );
            }
        }
    }
}

#[test]
fn scaling_coherence_in_n_and_weights() {
    // solving with (cN, cW) gives the same minimizer
    let mut rng = TestRng::new(21);
    for &c in &[2usize, 3, 10] {
        let sigma = random_spd(&mut rng, 4);
        let n = 25;
        let weights = random_weights(&mut rng, 4);
        let scaled =
            WeightMatrix::new(weights.as_sym().scale(c as f64)).unwrap();
        let opts = SolverOptions::default();
        let base = solve_weighted_glasso(&sigma, n, &weights, &opts, None).unwrap();
        let multi = solve_weighted_glasso(&sigma, n * c, &scaled, &opts, None).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let d = (base.s_hat.get(a, b) - multi.s_hat.get(a, b)).abs();
                assert!(d < 1e-8, "c={c}: entry ({a},{b}) differs by {d}");
            }
        }
        // objective scales by c
        let rel = (multi.objective - c as f64 * base.objective).abs()
            / (1.0 + base.objective.abs() * c as f64);
        assert!(rel < 1e-8, "objective scaling off by {rel}");
    }
}

#[test]
fn unique_solution_reached_from_different_starts() {
    let mut rng = TestRng::new(33);
    for _ in 0..5 {
        let sigma = random_spd(&mut rng, 4);
        let weights = random_weights(&mut rng, 4);
        let n = 40;
        let opts = SolverOptions::default();
        let cold = solve_weighted_glasso(&sigma, n, &weights, &opts, None).unwrap();
        // a deliberately different, badly scaled starting point
        let warm_state = qkp_glasso_core::glasso::WarmState {
            z: SymMatrix::from_fn(4, |a, b| if a == b { 7.0 + a as f64 } else { 0.3 }),
            u: SymMatrix::zeros(4),
            rho: 4.0,
        };
        let other = solve_weighted_glasso(&sigma, n, &weights, &opts, Some(warm_state)).unwrap();
        let dist = cold.s_hat.frobenius_distance(&other.s_hat);
        assert!(dist < 1e-6, "two starts disagree by {dist}");
    }
}

#[test]
fn inner_objective_trace_is_monotone_within_slack() {
    let mut rng = TestRng::new(55);
    for trial in 0..8 {
        let dim = 3 + (trial % 3);
        let sigma = random_spd(&mut rng, dim);
        let weights = random_weights(&mut rng, dim);
        let sol = solve_weighted_glasso(&sigma, 50, &weights, &SolverOptions::default(), None)
            .unwrap();
        for w in sol.objective_trace.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-9 * (1.0 + w[0].abs()),
                "trial {trial}: inner objective rose from {} to {}",
                w[0],
                w[1]
            );
        }
    }
}

#[test]
fn kkt_residual_is_zero_at_analytic_optimum() {
    // m=1: s* = N/(Nσ + 2w) has exact stationarity
    let sigma = SymMatrix::diagonal(&[2.0_f64]);
    let n = 30;
    let w = WeightMatrix::uniform(1, 4.0).unwrap();
    let s_star = SymMatrix::diagonal(&[n as f64 / (n as f64 * 2.0 + 8.0)]);
    let r = kkt_residual(&sigma, n, &w, &s_star).unwrap();
    assert!(r < 1e-12, "residual {r}");
}
