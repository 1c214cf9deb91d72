//! Householder QR: plain (for flow renormalization) and column-pivoted
//! (for rank decisions and frame construction).
//!
//! Both variants return Q with the positive-diagonal convention: the phases
//! of the R diagonal are absorbed into Q so that R_jj > 0. Propagation log
//! scales then accumulate as plain real logs.

use num_complex::Complex64;

use super::{ComplexMatrix, ONE, ZERO};

/// Thin QR of an m x k matrix (m >= k): returns (Q m x k, R k x k) with
/// orthonormal Q columns and R upper triangular with nonnegative diagonal.
pub fn qr_plain(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (q, r, _) = householder(a, false, 0.0);
    (q, r)
}

/// Column-pivoted QR used only for rank decisions: returns the orthonormal
/// basis of the column span (all k columns, pivot-ordered) and the numerical
/// rank at relative threshold `rank_rel`.
pub fn qr_rank(a: &ComplexMatrix, rank_rel: f64) -> (ComplexMatrix, usize) {
    let (q, r, _) = householder(a, true, rank_rel);
    let k = a.cols();
    let r00 = r[(0, 0)].norm();
    let mut rank = 0;
    for j in 0..k {
        if r[(j, j)].norm() > rank_rel * r00 && r[(j, j)].norm() > 0.0 {
            rank += 1;
        } else {
            break;
        }
    }
    (q, rank)
}

fn householder(
    a: &ComplexMatrix,
    pivot: bool,
    _rank_rel: f64,
) -> (ComplexMatrix, ComplexMatrix, Vec<usize>) {
    let m = a.rows();
    let k = a.cols();
    assert!(m >= k, "householder: need rows >= cols");
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..k).collect();
    // Accumulate Q by applying the reflectors to the identity afterwards;
    // store (v, beta) per step.
    let mut reflectors: Vec<(Vec<Complex64>, f64)> = Vec::with_capacity(k);

    let mut col_norms: Vec<f64> = (0..k)
        .map(|j| (0..m).map(|i| r[(i, j)].norm_sqr()).sum::<f64>())
        .collect();

    for step in 0..k {
        if pivot {
            let (best, _) = col_norms
                .iter()
                .enumerate()
                .skip(step)
                .fold((step, -1.0), |acc, (j, &n2)| if n2 > acc.1 { (j, n2) } else { acc });
            if best != step {
                for i in 0..m {
                    let tmp = r[(i, step)];
                    r[(i, step)] = r[(i, best)];
                    r[(i, best)] = tmp;
                }
                col_norms.swap(step, best);
                perm.swap(step, best);
            }
        }

        // Householder vector for column `step`, rows step..m.
        let norm_x: f64 = (step..m).map(|i| r[(i, step)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            reflectors.push((vec![ZERO; m - step], 0.0));
            continue;
        }
        let x0 = r[(step, step)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm_x;
        let mut v: Vec<Complex64> = (step..m).map(|i| r[(i, step)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
        // Apply (I - beta v v^H) to R[step.., step..].
        for j in step..k {
            let mut dot = ZERO;
            for i in step..m {
                dot += v[i - step].conj() * r[(i, j)];
            }
            let f = dot * beta;
            for i in step..m {
                let s = v[i - step] * f;
                r[(i, j)] -= s;
            }
        }
        r[(step, step)] = alpha;
        for i in step + 1..m {
            r[(i, step)] = ZERO;
        }
        reflectors.push((v, beta));
        if pivot {
            for (j, cn) in col_norms.iter_mut().enumerate().skip(step + 1) {
                *cn -= r[(step, j)].norm_sqr();
                if *cn < 0.0 {
                    *cn = 0.0;
                }
            }
        }
    }

    // Q = H_0 H_1 ... H_{k-1} applied to the first k columns of I.
    let mut q = ComplexMatrix::zeros(m, k);
    for j in 0..k {
        q[(j, j)] = ONE;
    }
    for step in (0..k).rev() {
        let (v, beta) = &reflectors[step];
        if *beta == 0.0 {
            continue;
        }
        for j in 0..k {
            let mut dot = ZERO;
            for i in step..m {
                dot += v[i - step].conj() * q[(i, j)];
            }
            let f = dot * *beta;
            for i in step..m {
                let s = v[i - step] * f;
                q[(i, j)] -= s;
            }
        }
    }

    // Positive-diagonal convention.
    let mut rt = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            rt[(i, j)] = r[(i, j)];
        }
    }
    for j in 0..k {
        let d = rt[(j, j)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for i in 0..m {
                q[(i, j)] = q[(i, j)] * ph;
            }
            for col in j..k {
                rt[(j, col)] = rt[(j, col)] * ph.conj();
            }
        }
    }
    (q, rt, perm)
}
