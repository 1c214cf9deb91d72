//! Complex Schur decomposition A = Q T Q^H with unitary Q and upper
//! triangular T, plus eigenvalue reordering by unitary adjacent swaps.
//!
//! Single-shift QR iteration with Wilkinson shifts and occasional
//! exceptional shifts; explicit Givens sweeps on the Hessenberg form.

use num_complex::Complex64;

use super::{ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Schur {
    /// Upper triangular factor; eigenvalues on the diagonal.
    pub t: ComplexMatrix,
    /// Unitary factor; columns are the Schur basis.
    pub q: ComplexMatrix,
}

/// Unitary Givens rotation G = [[c, s], [-conj(s), c]] with real c >= 0 such
/// that G [a, b]^T = [r, 0]^T.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    let an = a.norm();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let rho = (an * an + bn * bn).sqrt();
    let c = an / rho;
    let s = (a / an) * b.conj() / rho;
    (c, s)
}

fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    if n < 3 {
        return (h, q);
    }
    for col in 0..n - 2 {
        let norm_x: f64 = (col + 1..n).map(|i| h[(i, col)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = h[(col + 1, col)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm_x;
        let mut v: Vec<Complex64> = (col + 1..n).map(|i| h[(i, col)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // left: rows col+1..n
        for j in col..n {
            let mut dot = ZERO;
            for i in col + 1..n {
                dot += v[i - col - 1].conj() * h[(i, j)];
            }
            let f = dot * beta;
            for i in col + 1..n {
                let s = v[i - col - 1] * f;
                h[(i, j)] -= s;
            }
        }
        // right: columns col+1..n
        for i in 0..n {
            let mut dot = ZERO;
            for j in col + 1..n {
                dot += h[(i, j)] * v[j - col - 1];
            }
            let f = dot * beta;
            for j in col + 1..n {
                let s = f * v[j - col - 1].conj();
                h[(i, j)] -= s;
            }
        }
        // accumulate Q
        for i in 0..n {
            let mut dot = ZERO;
            for j in col + 1..n {
                dot += q[(i, j)] * v[j - col - 1];
            }
            let f = dot * beta;
            for j in col + 1..n {
                let s = f * v[j - col - 1].conj();
                q[(i, j)] -= s;
            }
        }
        h[(col + 1, col)] = alpha;
        for i in col + 2..n {
            h[(i, col)] = ZERO;
        }
    }
    (h, q)
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let m = (a + d) * 0.5;
    let disc = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
    let r1 = m + disc;
    let r2 = m - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Complex Schur decomposition of a square matrix.
pub fn schur(a: &ComplexMatrix) -> Result<Schur> {
    let n = a.require_square()?;
    if n == 0 {
        return Ok(Schur { t: ComplexMatrix::zeros(0, 0), q: ComplexMatrix::zeros(0, 0) });
    }
    let (mut h, mut q) = hessenberg(a);
    if n == 1 {
        return Ok(Schur { t: h, q });
    }
    let eps = f64::EPSILON;
    let hnorm = h.norm_inf().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iters_this_block = 0usize;
    let mut total = 0usize;
    let max_total = 60 * n;

    'outer: loop {
        // scan for a negligible subdiagonal above hi
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut tst = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if tst == 0.0 {
                tst = hnorm;
            }
            if sub <= eps * tst {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            if hi == 0 {
                break 'outer;
            }
            hi -= 1;
            iters_this_block = 0;
            continue;
        }

        iters_this_block += 1;
        total += 1;
        if iters_this_block > 50 || total > max_total {
            return Err(Error::SchurIterationFailure { size: n, iterations: total });
        }
        let sigma = if iters_this_block % 12 == 0 {
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };

        for i in lo..=hi {
            h[(i, i)] -= sigma;
        }
        let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let top = h[(k, j)];
                let bot = h[(k + 1, j)];
                h[(k, j)] = top * c + bot * s;
                h[(k + 1, j)] = -top * s.conj() + bot * c;
            }
            h[(k + 1, k)] = ZERO;
            rots.push((c, s));
        }
        for (idx, k) in (lo..hi).enumerate() {
            let (c, s) = rots[idx];
            let top_row = (k + 1).min(n - 1);
            for i in 0..=top_row {
                let left = h[(i, k)];
                let right = h[(i, k + 1)];
                h[(i, k)] = left * c + right * s.conj();
                h[(i, k + 1)] = -left * s + right * c;
            }
            for i in 0..n {
                let left = q[(i, k)];
                let right = q[(i, k + 1)];
                q[(i, k)] = left * c + right * s.conj();
                q[(i, k + 1)] = -left * s + right * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += sigma;
        }
    }

    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur { t: h, q })
}

/// Swap the adjacent diagonal entries at positions (k, k+1) of T by a
/// unitary similarity, updating Q.
fn swap_adjacent(dec: &mut Schur, k: usize) {
    let n = dec.t.rows();
    let a = dec.t[(k, k)];
    let b = dec.t[(k, k + 1)];
    let d = dec.t[(k + 1, k + 1)];
    // Eigenvector of the 2x2 block for eigenvalue d is [b, d - a].
    let v0 = b;
    let v1 = d - a;
    if v1.norm() == 0.0 {
        return; // equal eigenvalues: nothing to move
    }
    let (c, s) = givens(v0, v1);
    // rows k, k+1
    for j in k..n {
        let top = dec.t[(k, j)];
        let bot = dec.t[(k + 1, j)];
        dec.t[(k, j)] = top * c + bot * s;
        dec.t[(k + 1, j)] = -top * s.conj() + bot * c;
    }
    // columns k, k+1
    for i in 0..=k + 1 {
        let left = dec.t[(i, k)];
        let right = dec.t[(i, k + 1)];
        dec.t[(i, k)] = left * c + right * s.conj();
        dec.t[(i, k + 1)] = -left * s + right * c;
    }
    for i in 0..dec.q.rows() {
        let left = dec.q[(i, k)];
        let right = dec.q[(i, k + 1)];
        dec.q[(i, k)] = left * c + right * s.conj();
        dec.q[(i, k + 1)] = -left * s + right * c;
    }
    dec.t[(k + 1, k)] = ZERO;
    dec.t[(k, k)] = d;
    dec.t[(k + 1, k + 1)] = a;
}

/// Move the eigenvalues at the given T positions to the leading block by
/// adjacent swaps; after the call, slot `s` holds the eigenvalue that was at
/// position `select[s]`.
pub fn reorder_schur(dec: &mut Schur, select: &[usize]) {
    let n = dec.t.rows();
    // current[orig] = present position of the eigenvalue originally at orig
    let mut current: Vec<usize> = (0..n).collect();
    for (slot, &orig) in select.iter().enumerate() {
        let mut p = current[orig];
        while p > slot {
            swap_adjacent(dec, p - 1);
            for c in current.iter_mut() {
                if *c == p - 1 {
                    *c = p;
                } else if *c == p {
                    *c = p - 1;
                }
            }
            p -= 1;
        }
    }
}

/// Eigenvector of the original matrix for the eigenvalue at T position `j`,
/// by triangular back-substitution in the Schur basis.
pub fn eigvec_from_schur(dec: &Schur, j: usize) -> Vec<Complex64> {
    let n = dec.t.rows();
    let mu = dec.t[(j, j)];
    let scale = dec.t.norm_inf().max(1.0);
    let mut y = vec![ZERO; n];
    y[j] = ONE;
    for i in (0..j).rev() {
        let mut rhs = ZERO;
        for l in i + 1..=j {
            rhs += dec.t[(i, l)] * y[l];
        }
        let mut den = dec.t[(i, i)] - mu;
        if den.norm() < f64::EPSILON * scale {
            den = Complex64::new(f64::EPSILON * scale, 0.0);
        }
        y[i] = -rhs / den;
    }
    let mut v = dec.q.matvec(&y);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}
