//! Reference implementations used as independent oracles by the integration
//! and acceptance tests. Everything here is deliberately written on top of
//! its own primitives (cyclic Jacobi eigensolver, proximal gradient) rather
//! than the library's kernels, so agreement between the two paths is
//! meaningful evidence.
#![allow(dead_code)]

use qkp_glasso_core::glasso::WeightMatrix;
use qkp_glasso_core::matrix::{Mat, SymMatrix};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns ascending eigenvalues and the matching eigenvector columns
/// (`vectors[r][k]` is component `r` of eigenvector `k`).
pub fn jacobi_eigh(s: &SymMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = s.dim();
    let mut a: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| s.get(r, c)).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();

    let off = |a: &Vec<Vec<f64>>| -> f64 {
        let mut acc = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                acc += a[p][q] * a[p][q];
            }
        }
        acc.sqrt()
    };
    let scale = (0..n).map(|i| s.get(i, i).abs()).fold(1e-300, f64::max);

    for _sweep in 0..100 {
        if off(&a) <= 1e-14 * scale.max(off(&a) * 0.0 + 1.0) * (n as f64) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                // A <- Jᵀ A J on rows/cols p, q
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - sn * vkq;
                    v[k][q] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> = (0..n)
        .map(|r| order.iter().map(|&k| v[r][k]).collect())
        .collect();
    (values, vectors)
}

pub fn jacobi_min_eig(s: &SymMatrix<f64>) -> f64 {
    jacobi_eigh(s).0[0]
}

pub fn jacobi_logdet(s: &SymMatrix<f64>) -> Option<f64> {
    let (vals, _) = jacobi_eigh(s);
    if vals[0] <= 0.0 {
        return None;
    }
    Some(vals.iter().map(|v| v.ln()).sum())
}

pub fn jacobi_inverse(s: &SymMatrix<f64>) -> SymMatrix<f64> {
    let n = s.dim();
    let (vals, vecs) = jacobi_eigh(s);
    SymMatrix::from_fn(n, |a, b| {
        (0..n).map(|k| vecs[a][k] * vecs[b][k] / vals[k]).sum()
    })
}

/// Moore-Penrose pseudoinverse through the Jacobi eigendecomposition,
/// dropping eigenvalues below `cut` relative to the largest.
pub fn jacobi_pinv(s: &SymMatrix<f64>, cut: f64) -> SymMatrix<f64> {
    let n = s.dim();
    let (vals, vecs) = jacobi_eigh(s);
    let vmax = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    SymMatrix::from_fn(n, |a, b| {
        (0..n)
            .filter(|&k| vals[k].abs() > cut * vmax)
            .map(|k| vecs[a][k] * vecs[b][k] / vals[k])
            .sum()
    })
}

fn soft(x: f64, k: f64) -> f64 {
    if x > k {
        x - k
    } else if x < -k {
        x + k
    } else {
        0.0
    }
}

/// Reference weighted-glasso solver: proximal gradient with backtracking on
/// the smooth part, positive definiteness guarded by the Jacobi minimum
/// eigenvalue. Slow and simple; used only on small instances.
pub fn ref_weighted_glasso(
    sigma: &SymMatrix<f64>,
    n_samples: usize,
    weights: &WeightMatrix<f64>,
    kkt_target: f64,
    max_iter: usize,
) -> SymMatrix<f64> {
    let m = sigma.dim();
    let half_n = n_samples as f64 / 2.0;
    let mut s = SymMatrix::from_fn(m, |a, b| {
        if a == b {
            1.0 / sigma.get(a, a)
        } else {
            0.0
        }
    });
    let mut step = 1.0 / half_n;

    let smooth = |s: &SymMatrix<f64>| -> Option<f64> {
        jacobi_logdet(s).map(|ld| half_n * (s.trace_product(sigma) - ld))
    };

    for _iter in 0..max_iter {
        let inv = jacobi_inverse(&s);
        let grad = SymMatrix::from_fn(m, |a, b| half_n * (sigma.get(a, b) - inv.get(a, b)));

        // KKT certificate at the current iterate
        let mut worst = 0.0_f64;
        for a in 0..m {
            for b in 0..m {
                let g = grad.get(a, b);
                let w = weights.get(a, b);
                let viol = if s.get(a, b) != 0.0 {
                    (g + w * s.get(a, b).signum()).abs()
                } else {
                    (g.abs() - w).max(0.0)
                };
                worst = worst.max(viol);
            }
        }
        if worst <= kkt_target {
            return s;
        }

        let g_s = smooth(&s).expect("iterate must stay positive definite");
        loop {
            let cand = SymMatrix::from_fn(m, |a, b| {
                soft(
                    s.get(a, b) - step * grad.get(a, b),
                    step * weights.get(a, b),
                )
            });
            if jacobi_min_eig(&cand) > 0.0 {
                if let Some(g_c) = smooth(&cand) {
                    let mut lin = 0.0;
                    let mut sq = 0.0;
                    for a in 0..m {
                        for b in 0..m {
                            let d = cand.get(a, b) - s.get(a, b);
                            lin += grad.get(a, b) * d;
                            sq += d * d;
                        }
                    }
                    if g_c <= g_s + lin + sq / (2.0 * step) + 1e-12 * (1.0 + g_s.abs()) {
                        s = cand;
                        break;
                    }
                }
            }
            step *= 0.5;
            assert!(step > 1e-18, "backtracking collapsed");
        }
        step *= 1.1;
    }
    s
}

/// Golden-section minimizer of a unimodal function on `[lo, hi]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo) > tol * (1.0 + lo.abs() + hi.abs()) {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}

/// The explicit log-domain design matrix
/// `A = [I ⊗ 1 ⊗ I ⊗ 1, 1 ⊗ I ⊗ 1 ⊗ I]` (column-major vectorization),
/// materialized for small shapes.
pub fn explicit_design_matrix(m1: usize, m2: usize) -> Mat<f64> {
    let m = m1 * m2;
    let rows = m * m;
    let cols = m1 * m1 + m2 * m2;
    let mut a = Mat::zeros(rows, cols);
    // row index: vec position of entry (r, c) of the m×m matrix, col-major:
    // idx = c*m + r with r = j*m2 + i, c = k*m2 + l
    for j in 0..m1 {
        for k in 0..m1 {
            for i in 0..m2 {
                for l in 0..m2 {
                    let r = j * m2 + i;
                    let c = k * m2 + l;
                    let row = c * m + r;
                    // W contribution: vec(W) col-major index = k*m1 + j
                    a.set(row, k * m1 + j, 1.0);
                    // Y contribution: vec(Y) col-major index = l*m2 + i
                    a.set(row, m1 * m1 + l * m2 + i, 1.0);
                }
            }
        }
    }
    a
}

/// Dense minimum-norm least squares `argmin_z ‖Az − b‖` via the
/// pseudoinverse of the normal equations: `z = pinv(AᵀA)·Aᵀb`.
pub fn dense_min_norm_lstsq(a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    let cols = a.cols();
    let rows = a.rows();
    assert_eq!(rows, b.len());
    let ata = SymMatrix::from_fn(cols, |x, y| {
        (0..rows).map(|r| a.get(r, x) * a.get(r, y)).sum()
    });
    let atb: Vec<f64> = (0..cols)
        .map(|x| (0..rows).map(|r| a.get(r, x) * b[r]).sum())
        .collect();
    let pinv = jacobi_pinv(&ata, 1e-10);
    (0..cols)
        .map(|x| (0..cols).map(|y| pinv.get(x, y) * atb[y]).sum())
        .collect()
}

/// Quantile by the explicit `h = (n−1)p` interpolation rule, written
/// directly from the definition as a cross-check for the harness.
pub fn ref_quantile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * p;
    let lo = h.floor();
    let idx = lo as usize;
    if idx + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[idx] * (1.0 - (h - lo)) + sorted[idx + 1] * (h - lo)
    }
}

/// Deterministic pseudo-random stream for test instance generation.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.wrapping_mul(2685821657736338717).wrapping_add(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        // xorshift64*
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(2685821657736338717)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

/// Random symmetric positive definite matrix with unit-scale diagonal.
pub fn random_spd(rng: &mut TestRng, dim: usize) -> SymMatrix<f64> {
    // G·Gᵀ + dim·I/2, scaled back toward unit diagonal
    let g: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.range(-1.0, 1.0)).collect())
        .collect();
    let base = SymMatrix::from_fn(dim, |a, b| {
        let dot: f64 = (0..dim).map(|k| g[a][k] * g[b][k]).sum();
        dot / dim as f64 + if a == b { 0.5 } else { 0.0 }
    });
    base
}
