//! Symmetric eigendecomposition.
//!
//! Householder tridiagonalization followed by implicit-shift QL iteration,
//! the classic EISPACK `tred2`/`tql2` pair. Eigenvalues come back in
//! ascending order with the eigenvectors as matching columns.

use super::{Mat, MatrixError, SymMatrix};
use crate::scalar::Scalar;

/// Eigendecomposition `S = V·diag(values)·Vᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Eigh<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors, one per column, matching `values`.
    pub vectors: Mat<T>,
}

const MAX_QL_ITERATIONS: usize = 64;

/// Full symmetric eigendecomposition.
pub fn eigh<T: Scalar>(s: &SymMatrix<T>) -> Result<Eigh<T>, MatrixError> {
    let n = s.dim();
    let mut v = Mat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            v.set(a, b, s.get(a, b));
        }
    }
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    Ok(Eigh {
        values: d,
        vectors: v,
    })
}

/// Rebuilds `Σ_k values[k]·v_k·v_kᵀ` from an orthonormal basis; the result is
/// exactly symmetric because only one triangle is computed and mirrored.
pub fn reconstruct_from_eigh<T: Scalar>(vectors: &Mat<T>, values: &[T]) -> SymMatrix<T> {
    let n = values.len();
    debug_assert_eq!(vectors.rows(), n);
    SymMatrix::from_fn(n, |a, b| {
        let ra = vectors.row(a);
        let rb = vectors.row(b);
        let mut acc = T::zero();
        for k in 0..n {
            acc += values[k] * ra[k] * rb[k];
        }
        acc
    })
}

// Householder reduction to tridiagonal form; transformations accumulate in v.
fn tred2<T: Scalar>(v: &mut Mat<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }

    for i in (1..n).rev() {
        // scale to avoid under/overflow
        let mut h = T::zero();
        let mut scale = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, T::zero());
                v.set(j, i, T::zero());
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = T::zero();
            }

            // apply similarity transformation to remaining rows
            for j in 0..i {
                let f = d[j];
                v.set(j, i, f);
                let mut g = e[j] + v.get(j, j) * f;
                for k in (j + 1)..i {
                    g += v.get(k, j) * d[k];
                    e[k] += v.get(k, j) * f;
                }
                e[j] = g;
            }
            let mut f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    let upd = v.get(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, upd);
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, T::zero());
            }
        }
        d[i] = h;
    }

    // accumulate transformations
    for i in 0..n - 1 {
        v.set(n - 1, i, v.get(i, i));
        v.set(i, i, T::one());
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v.get(k, i + 1) * v.get(k, j);
                }
                for k in 0..=i {
                    let upd = v.get(k, j) - g * d[k];
                    v.set(k, j, upd);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, T::zero());
        }
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
        v.set(n - 1, j, T::zero());
    }
    v.set(n - 1, n - 1, T::one());
    e[0] = T::zero();
}

// Implicit-shift QL iteration on the tridiagonal (d, e); rotations accumulate
// into the eigenvector columns of v. Sorts ascending at the end.
fn tql2<T: Scalar>(v: &mut Mat<T>, d: &mut [T], e: &mut [T]) -> Result<(), MatrixError> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let two = T::one() + T::one();

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(MatrixError::EigenNoConvergence);
                }

                // implicit shift
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;

                // implicit QL sweep
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        let h = v.get(k, i + 1);
                        v.set(k, i + 1, s * v.get(k, i) + c * h);
                        v.set(k, i, c * v.get(k, i) - s * h);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }

    // selection sort ascending, carrying the eigenvector columns along
    for i in 0..n - 1 {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in 0..n {
                let tmp = v.get(row, i);
                v.set(row, i, v.get(row, k));
                v.set(row, k, tmp);
            }
        }
    }
    Ok(())
}
