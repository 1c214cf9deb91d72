use num_complex::Complex64;

use super::*;
use crate::rng::Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Roots of mu^2 + c mu - lambda = 0, the tail dispersion of the scalar
/// advection-diffusion reduction. Used as an independent oracle throughout.
pub fn quadratic_roots(cspeed: f64, lambda: Complex64) -> (Complex64, Complex64) {
    let disc = (Complex64::new(cspeed * cspeed, 0.0) + lambda * 4.0).sqrt();
    let half = Complex64::new(0.5, 0.0);
    ((-cspeed + disc) * half, (-cspeed - disc) * half)
}

/// Greedy multiset match: every element of `a` must have an unused partner
/// in `b` within `tol`.
pub fn multiset_close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for &x in a {
        let mut best: Option<(usize, f64)> = None;
        for (j, &y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, d)) if d <= tol => used[j] = true,
            _ => return false,
        }
    }
    true
}

#[test]
fn eig_sorted_symmetric_exchange() {
    let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
    let s = eig_sorted(&a, &tol()).unwrap();
    assert!((s.values[0] - c(1.0, 0.0)).norm() < 1e-12);
    assert!((s.values[1] - c(-1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn eig_sorted_rotation_tie_broken_by_im() {
    let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
    let s = eig_sorted(&a, &tol()).unwrap();
    assert!((s.values[0] - c(0.0, 1.0)).norm() < 1e-12, "expected +i first, got {}", s.values[0]);
    assert!((s.values[1] - c(0.0, -1.0)).norm() < 1e-12);
}

#[test]
fn eig_sorted_advection_tail() {
    // A = [[0,1],[lambda,-c]] with lambda = 0, c = 2: quadratic formula
    // gives mu = 0 and mu = -2.
    let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, -2.0]).unwrap();
    let s = eig_sorted(&a, &tol()).unwrap();
    let (m1, m2) = quadratic_roots(2.0, c(0.0, 0.0));
    assert!((s.values[0] - m1).norm() < 1e-12);
    assert!((s.values[1] - m2).norm() < 1e-12);
}

#[test]
fn eig_sorted_matches_companion_roots() {
    // Permutation-completeness against companion-matrix brute force.
    let mut rng = Rng::new(101);
    for _ in 0..40 {
        let n = 2 + rng.usize_below(5);
        let roots: Vec<Complex64> = (0..n).map(|_| rng.complex() * 2.0).collect();
        // expand monic polynomial with these roots
        let mut coeffs = vec![ONE];
        for &r in &roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (i, &co) in coeffs.iter().enumerate() {
                next[i] += co;
                next[i + 1] -= co * r;
            }
            coeffs = next;
        }
        // companion matrix: subdiagonal ones, last column -coeffs reversed
        let mut comp = ComplexMatrix::zeros(n, n);
        for i in 0..n - 1 {
            comp[(i + 1, i)] = ONE;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -coeffs[n - i];
        }
        let s = eig_sorted(&comp, &tol()).unwrap();
        assert!(multiset_close(&s.values, &roots, 1e-7), "roots {roots:?} vs {:?}", s.values);
    }
}

#[test]
fn eig_residuals_on_random_input() {
    let mut rng = Rng::new(33);
    for _ in 0..20 {
        let n = 3 + rng.usize_below(4);
        let data = (0..n * n).map(|_| rng.complex()).collect();
        let a = ComplexMatrix::new(n, n, data).unwrap();
        let dec = schur(&a).unwrap();
        for j in 0..n {
            let v = eigvec_from_schur(&dec, j);
            let av = a.matvec(&v);
            let mu = dec.t[(j, j)];
            let res: f64 =
                av.iter().zip(&v).map(|(x, y)| (x - mu * y).norm_sqr()).sum::<f64>().sqrt();
            assert!(res <= 1e-8 * a.norm_inf().max(1.0));
        }
    }
}

#[test]
fn invariant_subspace_diagonal() {
    let a = ComplexMatrix::diag(&[c(3.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
    let s1 = ordered_invariant_subspace(&a, 1, &tol()).unwrap();
    assert_eq!(s1.dim(), 1);
    assert!((s1.frame()[(0, 0)].norm() - 1.0).abs() < 1e-12);
    assert!(s1.frame()[(1, 0)].norm() < 1e-12);
    assert!(s1.frame()[(2, 0)].norm() < 1e-12);

    let s2 = ordered_invariant_subspace(&a, 2, &tol()).unwrap();
    assert_eq!(s2.dim(), 2);
    // span{e1, e2}: third row of the frame vanishes
    assert!(s2.frame()[(2, 0)].norm() < 1e-12);
    assert!(s2.frame()[(2, 1)].norm() < 1e-12);
}

#[test]
fn invariant_subspace_rejects_cluster_split() {
    let a = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
    match ordered_invariant_subspace(&a, 1, &tol()) {
        Err(Error::ClusterSplit { index: 1, .. }) => {}
        other => panic!("expected ClusterSplit, got {other:?}"),
    }
}

#[test]
fn invariant_subspace_residual_on_separated_spectra() {
    let mut rng = Rng::new(7);
    for _ in 0..20 {
        let n = 6;
        // Well-separated eigenvalues conjugated by a random unitary.
        let vals: Vec<Complex64> =
            (0..n).map(|i| c(3.0 - 1.1 * i as f64, rng.range(-1.0, 1.0))).collect();
        let raw = ComplexMatrix::new(n, n, (0..n * n).map(|_| rng.complex()).collect()).unwrap();
        let (q, _) = qr_plain(&raw);
        let a = q.mul(&ComplexMatrix::diag(&vals)).unwrap().mul(&q.adjoint()).unwrap();
        for k in [1usize, 2, 3, 5] {
            let sub = ordered_invariant_subspace(&a, k, &tol()).unwrap();
            let p = sub.frame();
            // invariance residual ||(I - P P^H) A P||
            let ap = a.mul(p).unwrap();
            let proj = p.mul(&p.adjoint().mul(&ap).unwrap()).unwrap();
            let res = ap.sub(&proj).unwrap().norm_fro();
            assert!(res <= 1e-8 * a.norm_inf(), "k={k} residual {res}");
        }
    }
}

#[test]
fn det_logscaled_examples() {
    let id = ComplexMatrix::identity(3);
    let (lm, ph) = det_logscaled(&id).unwrap();
    assert!(lm.abs() < 1e-14);
    assert!((ph - ONE).norm() < 1e-14);

    let d = ComplexMatrix::diag(&[c(2.0, 0.0), c(0.5, 0.0)]);
    let (lm, ph) = det_logscaled(&d).unwrap();
    assert!(lm.abs() < 1e-14);
    assert!((ph - ONE).norm() < 1e-14);

    let sing = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
    let (lm, _) = det_logscaled(&sing).unwrap();
    assert_eq!(lm, f64::NEG_INFINITY);
}

/// Cofactor-expansion determinant, the brute-force oracle.
fn det_direct(m: &ComplexMatrix) -> Complex64 {
    let n = m.rows();
    if n == 1 {
        return m[(0, 0)];
    }
    let mut acc = ZERO;
    let mut sign = ONE;
    for j in 0..n {
        let mut minor = ComplexMatrix::zeros(n - 1, n - 1);
        for i in 1..n {
            let mut cj = 0;
            for jj in 0..n {
                if jj == j {
                    continue;
                }
                minor[(i - 1, cj)] = m[(i, jj)];
                cj += 1;
            }
        }
        acc += sign * m[(0, j)] * det_direct(&minor);
        sign = -sign;
    }
    acc
}

#[test]
fn det_logscaled_matches_direct() {
    let mut rng = Rng::new(55);
    let mut checked = 0;
    while checked < 30 {
        let a = ComplexMatrix::new(4, 4, (0..16).map(|_| rng.complex()).collect()).unwrap();
        let exact = det_direct(&a);
        if !(1e-3..=1e3).contains(&exact.norm()) {
            continue;
        }
        checked += 1;
        let (lm, ph) = det_logscaled(&a).unwrap();
        let rebuilt = ph * lm.exp();
        assert!((rebuilt - exact).norm() <= 1e-10 * exact.norm());
    }
}

#[test]
fn intersection_dimension_examples() {
    let t = tol();
    let e1 = Subspace::span_of_basis_vector(2, 0);
    let e2 = Subspace::span_of_basis_vector(2, 1);
    assert_eq!(intersection_dimension(&e1, &e2, 1e-8).unwrap(), 0);
    assert_eq!(intersection_dimension(&e1, &e1, 1e-8).unwrap(), 1);

    // span{(1,0,1)/sqrt2, e2} vs span{(1,0,1)/sqrt2} in C^3
    let s = 1.0 / 2.0f64.sqrt();
    let u = Subspace::from_columns(
        &ComplexMatrix::from_real(3, 2, &[s, 0.0, 0.0, 1.0, s, 0.0]).unwrap(),
        &t,
    )
    .unwrap();
    let v = Subspace::from_columns(
        &ComplexMatrix::from_real(3, 1, &[s, 0.0, s]).unwrap(),
        &t,
    )
    .unwrap();
    assert_eq!(intersection_dimension(&u, &v, 1e-8).unwrap(), 1);
    // symmetry
    assert_eq!(intersection_dimension(&v, &u, 1e-8).unwrap(), 1);
}

#[test]
fn intersection_dimension_unitary_invariant() {
    let t = tol();
    let mut rng = Rng::new(77);
    let span = ComplexMatrix::new(4, 2, (0..8).map(|_| rng.complex()).collect()).unwrap();
    let u = Subspace::from_columns(&span, &t).unwrap();
    let v = Subspace::from_columns(
        &ComplexMatrix::new(4, 2, (0..8).map(|_| rng.complex()).collect()).unwrap(),
        &t,
    )
    .unwrap();
    let d0 = intersection_dimension(&u, &v, 1e-8).unwrap();
    // change of frame within u by a random 2x2 unitary
    let raw = ComplexMatrix::new(2, 2, (0..4).map(|_| rng.complex()).collect()).unwrap();
    let (qu, _) = qr_plain(&raw);
    let u2 = Subspace::from_orthonormal(u.frame().mul(&qu).unwrap(), &t).unwrap();
    assert_eq!(intersection_dimension(&u2, &v, 1e-8).unwrap(), d0);
}

#[test]
fn subspace_rejects_dependent_columns() {
    let t = tol();
    let m = ComplexMatrix::from_real(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
    assert!(matches!(Subspace::from_columns(&m, &t), Err(Error::RankDeficient { .. })));
}

#[test]
fn nonsquare_inputs_rejected() {
    let m = ComplexMatrix::zeros(2, 3);
    assert!(matches!(eig_sorted(&m, &tol()), Err(Error::NotSquare { .. })));
    assert!(matches!(det_logscaled(&m), Err(Error::NotSquare { .. })));
}

#[test]
fn nonfinite_entries_rejected() {
    assert!(matches!(
        ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]),
        Err(Error::NonFinite)
    ));
}
