//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured quantities. Tolerances and thresholds are pinned here.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeMap;
use std::time::Instant;

use absspec::config::Tolerances;
use absspec::counting::{covering_trace, endpoint_attraction, winding_count};
use absspec::exterior::{compound_matrix, pluecker, IndexBasis, PlueckerPoint};
use absspec::linalg::{
    det_logscaled, eig_sorted, expm, qr_plain, ComplexMatrix, Subspace, ONE,
};
use absspec::periodic::{center_endpoint, double_system, extrapolated_set_probe, periodic_count, SetClass};
use absspec::problem::{diagonal_subspace, ParameterDomain};
use absspec::problems::{builtin, BuiltinProblem};
use absspec::rng::Rng;
use absspec::spectra::{certify_nondegenerate, trace_locus, HalfDiskClass};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn c(re: f64, im: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(re, im)
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} - {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Criterion 1: the traced absolute-spectrum locus of the advection tail at
/// c = 2 on [-4,1]x[-i,i] lies within 1e-6 of the real ray left of -1, has
/// at least 60 vertices, and takes under 10 seconds.
#[test]
fn acceptance_01_locus_advection() {
    let t = tol();
    let started = Instant::now();
    let b = builtin("adv-diff", &params(&[("c", 2.0)])).unwrap();
    let domain = ParameterDomain::rect(-4.0, 1.0, -1.0, 1.0, 128).unwrap();
    let locus = trace_locus(&b.profile, &b.boundary, b.side, &domain, &t).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let count = locus.vertex_count();
    let mut worst_im = 0.0f64;
    let mut worst_re = f64::NEG_INFINITY;
    let mut worst_gap = 0.0f64;
    for v in locus.polylines.iter().flatten() {
        worst_im = worst_im.max(v.lambda.im.abs());
        worst_re = worst_re.max(v.lambda.re);
        worst_gap = worst_gap.max(v.signed_gap.abs());
    }
    let pass = count >= 60
        && worst_im <= 1e-6
        && worst_re <= -1.0 + 1e-6
        && worst_gap <= 1e-6
        && elapsed < 10.0;
    report(
        "1 (absolute-spectrum locus)",
        pass,
        &format!(
            "{count} vertices, max |Im| = {worst_im:.2e}, max Re = {worst_re:.6}, \
             max |gap| = {worst_gap:.2e}, {elapsed:.2} s"
        ),
    );
}

/// Criterion 2: winding counts in B(-1; 0.5) at ell = 10 pi, 20 pi, 40 pi
/// match the closed-form Dirichlet spectrum lambda_n = -(n pi / (2 ell))^2
/// exactly, in under 60 seconds. The enumerated counts are 10, 20, and 41.
#[test]
fn acceptance_02_accumulation_separated() {
    let t = tol();
    let started = Instant::now();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let center = c(-1.0, 0.0);
    let radius = 0.5;
    // frozen enumeration of the closed form; 40 pi holds n = 57..97
    let frozen: [i64; 3] = [10, 20, 41];
    let mut details = Vec::new();
    let mut pass = true;
    for (i, mult) in [10.0, 20.0, 40.0].iter().enumerate() {
        let ell = mult * std::f64::consts::PI;
        let oracle =
            b.oracle.dirichlet_eigenvalues_in(ell, center, radius).unwrap().len() as i64;
        assert_eq!(
            oracle, frozen[i],
            "closed-form enumeration drifted from the frozen count"
        );
        let got = winding_count(&b.profile, &b.boundary, ell, center, radius, &t)
            .unwrap()
            .winding;
        pass &= got == oracle;
        details.push(format!("ell = {:.0} pi: {got} (oracle {oracle})", mult));
    }
    let elapsed = started.elapsed().as_secs_f64();
    pass &= elapsed < 60.0;
    report(
        "2 (eigenvalue accumulation, separated)",
        pass,
        &format!("{}; {elapsed:.2} s", details.join(", ")),
    );
}

/// Criterion 3: periodic counts at c = 1 in B(-1+i; 0.3) match the
/// dispersion oracle exactly at ell = 20, 40, 80; the off-locus probe at
/// 1+i counts zero everywhere; classification matches membership in the
/// non-degenerate essential spectrum. Under 120 seconds.
#[test]
fn acceptance_03_accumulation_periodic() {
    let t = tol();
    let started = Instant::now();
    let b = builtin("periodic-adv-diff", &params(&[("c", 1.0)])).unwrap();
    let doubled = double_system(&b.profile, ONE).unwrap();
    let center = c(-1.0, 1.0);
    let radius = 0.3;
    let mut details = Vec::new();
    let mut pass = true;
    for ell in [20.0, 40.0, 80.0] {
        let oracle = b.oracle.gamma_eigenvalues_in(ell, ONE, center, radius).unwrap().len() as i64;
        let got = periodic_count(&doubled, ell, center, radius, &t).unwrap().report.winding;
        pass &= got == oracle;
        details.push(format!("ell = {ell}: {got} (oracle {oracle})"));
        let off = periodic_count(&doubled, ell, c(1.0, 1.0), radius, &t).unwrap().report.winding;
        pass &= off == 0;
    }
    let ells = [20.0, 40.0, 60.0, 80.0];
    let reports =
        extrapolated_set_probe(&doubled, &[center, c(1.0, 1.0)], radius, &ells, 3, &t).unwrap();
    pass &= reports[0].class == SetClass::In && reports[0].certified == Some(true);
    pass &= reports[1].class == SetClass::Out && reports[1].certified.is_none();
    let elapsed = started.elapsed().as_secs_f64();
    pass &= elapsed < 120.0;
    report(
        "3 (eigenvalue accumulation, periodic)",
        pass,
        &format!(
            "{}; on-locus class {:?}, off-locus class {:?}; {elapsed:.2} s",
            details.join(", "),
            reports[0].class,
            reports[1].class
        ),
    );
}

/// Criterion 4: compound eigenvalues are k-sums of base eigenvalues for 100
/// random matrices with N <= 6, k <= 3, to 1e-8 after multiset matching.
#[test]
fn acceptance_04_compound_eigenvalue_sums() {
    let t = tol();
    let mut rng = Rng::new(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = 2 + rng.usize_below(5);
        let k = 1 + rng.usize_below(n.min(3));
        let a = ComplexMatrix::new(n, n, (0..n * n).map(|_| rng.complex()).collect()).unwrap();
        let comp = compound_matrix(&a, k).unwrap();
        let base = eig_sorted(&a, &t).unwrap().values;
        let basis = IndexBasis::new(n, k).unwrap();
        let sums: Vec<num_complex::Complex64> = basis
            .subsets
            .iter()
            .map(|set| set.iter().map(|&i| base[i]).sum())
            .collect();
        let comp_eigs = eig_sorted(&comp, &t).unwrap().values;
        // greedy multiset matching
        let mut used = vec![false; sums.len()];
        for &x in &comp_eigs {
            let (j, d) = sums
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, &y)| (j, (x - y).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            used[j] = true;
            worst = worst.max(d);
        }
    }
    report(
        "4 (compound eigenvalues are k-sums)",
        worst <= 1e-8,
        &format!("worst multiset deviation {worst:.2e} over 100 draws"),
    );
}

/// Criterion 5: embedding a propagated subspace agrees with propagating the
/// embedded point, projectively to 1e-6, for 50 random constant systems
/// over unit length.
#[test]
fn acceptance_05_commuting_square() {
    let t = tol();
    let mut rng = Rng::new(4096);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 50 {
        let n = 2 + rng.usize_below(4);
        let k = 1 + rng.usize_below(n - 1);
        let basis = IndexBasis::new(n, k).unwrap();
        let a = ComplexMatrix::new(n, n, (0..n * n).map(|_| rng.complex()).collect()).unwrap();
        let span =
            ComplexMatrix::new(n, k, (0..n * k).map(|_| rng.complex()).collect()).unwrap();
        let Ok(u) = Subspace::from_columns(&span, &t) else { continue };
        checked += 1;
        let moved = Subspace::from_columns(&expm(&a).mul(u.frame()).unwrap(), &t).unwrap();
        let left = pluecker(&moved, &basis).unwrap();
        let comp = compound_matrix(&a, k).unwrap();
        let p0 = pluecker(&u, &basis).unwrap();
        let right = PlueckerPoint::new(expm(&comp).matvec(p0.coords())).unwrap();
        worst = worst.max(left.chordal_distance(&right));
    }
    report(
        "5 (commuting square)",
        worst <= 1e-6,
        &format!("worst projective distance {worst:.2e} over 50 systems"),
    );
}

/// Criterion 6: the doubled boundary determinant reproduces
/// det(Phi - gamma I) up to the recorded orthonormalization scalars, to
/// relative 1e-8, for 100 random invertible matrices with N <= 5.
#[test]
fn acceptance_06_doubled_determinant_identity() {
    let mut rng = Rng::new(777);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 100 {
        let n = 2 + rng.usize_below(4);
        let phi = ComplexMatrix::new(n, n, (0..n * n).map(|_| rng.complex()).collect()).unwrap();
        let (lm, _) = det_logscaled(&phi).unwrap();
        if lm < -3.0 {
            continue;
        }
        checked += 1;
        let gamma = c(0.0, rng.range(0.0, 2.0 * std::f64::consts::PI)).exp();
        let mut stacked = ComplexMatrix::zeros(2 * n, n);
        for i in 0..n {
            for j in 0..n {
                stacked[(i, j)] = phi[(i, j)];
            }
            stacked[(n + i, i)] = ONE;
        }
        let (q, r) = qr_plain(&stacked);
        let joint = q.hstack(diagonal_subspace(n, gamma).frame()).unwrap();
        let (lm_j, ph_j) = det_logscaled(&joint).unwrap();
        let det_r: f64 = (0..n).map(|j| r[(j, j)].re.ln()).sum();
        let rebuilt = ph_j * (lm_j + det_r + (n as f64) * 0.5 * 2.0f64.ln()).exp();
        let shifted = phi.sub(&ComplexMatrix::identity(n).scale(gamma)).unwrap();
        let (lm_d, ph_d) = det_logscaled(&shifted).unwrap();
        let direct = ph_d * lm_d.exp();
        let err =
            (rebuilt - direct).norm().min((rebuilt + direct).norm()) / direct.norm().max(1e-12);
        worst = worst.max(err);
    }
    report(
        "6 (doubled determinant identity)",
        worst <= 1e-8,
        &format!("worst relative deviation {worst:.2e} over 100 draws"),
    );
}

/// Criterion 7: along the locus segment [-2.25, -0.25] at ell = 10 the
/// covering trace wraps at least 6 times, agrees with the winding count of
/// the enclosing disk within +-2, and doubles (within +-1) when ell doubles.
#[test]
fn acceptance_07_covering_winding_coherence() {
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let segment: Vec<num_complex::Complex64> =
        (0..=96).map(|j| c(-2.25 + 2.0 * j as f64 / 96.0, 0.0)).collect();
    let t10 = covering_trace(&b.profile, &b.boundary, 10.0, &segment, None, &t).unwrap();
    let t20 = covering_trace(&b.profile, &b.boundary, 20.0, &segment, None, &t).unwrap();
    let winding = winding_count(&b.profile, &b.boundary, 10.0, c(-1.25, 0.0), 1.0, &t)
        .unwrap()
        .winding;
    let coherent = (t10.turn_count - winding as f64).abs() <= 2.0;
    let enough = t10.turn_count >= 6.0;
    let doubles = (t20.turn_count - 2.0 * t10.turn_count).abs() <= 1.0;
    report(
        "7 (covering/winding coherence)",
        coherent && enough && doubles,
        &format!(
            "turns(10) = {:.2}, winding = {winding}, turns(20) = {:.2}",
            t10.turn_count, t20.turn_count
        ),
    );
}

fn attractor_check_separated(b: &BuiltinProblem, t: &Tolerances) -> (bool, f64, f64) {
    let mut pass = true;
    let mut worst_b1 = 0.0f64;
    let mut worst_b2 = 0.0f64;
    for lambda in b.attractor_disk.b1_samples(10) {
        let mut prev = f64::INFINITY;
        for ell in [10.0, 20.0, 30.0] {
            let probe =
                endpoint_attraction(&b.profile, &b.boundary, b.side, ell, lambda, t).unwrap();
            pass &= probe.class == HalfDiskClass::B1;
            pass &= probe.dist_to_pn < prev;
            prev = probe.dist_to_pn;
            if ell == 30.0 {
                worst_b1 = worst_b1.max(probe.dist_to_pn);
            }
        }
    }
    for lambda in b.attractor_disk.b2_samples(10) {
        let mut prev = f64::INFINITY;
        for ell in [10.0, 20.0, 30.0] {
            let probe =
                endpoint_attraction(&b.profile, &b.boundary, b.side, ell, lambda, t).unwrap();
            pass &= probe.class == HalfDiskClass::B2;
            pass &= probe.dist_to_ps < prev;
            prev = probe.dist_to_ps;
            if ell == 30.0 {
                worst_b2 = worst_b2.max(probe.dist_to_ps);
            }
        }
    }
    pass &= worst_b1 <= 1e-6 && worst_b2 <= 1e-6;
    (pass, worst_b1, worst_b2)
}

/// Criterion 8: for ten sampled points in each half-disk of every built-in,
/// the projected endpoint reaches the attractor (resp. repeller) to 1e-6 by
/// ell = 30, decreasing monotonically over ell = 10, 20, 30.
#[test]
fn acceptance_08_attractor_repeller() {
    let t = tol();
    let mut pass = true;
    let mut details = Vec::new();
    for name in ["adv-diff", "adv-diff-front", "two-component"] {
        let b = builtin(name, &BTreeMap::new()).unwrap();
        let (ok, w1, w2) = attractor_check_separated(&b, &t);
        pass &= ok;
        details.push(format!("{name}: B1 {w1:.2e}, B2 {w2:.2e}"));
    }
    // periodic built-in: the tracked line in the doubled center subspace
    let b = builtin("periodic-adv-diff", &BTreeMap::new()).unwrap();
    let doubled = double_system(&b.profile, ONE).unwrap();
    let mut worst_b1 = 0.0f64;
    let mut worst_b2 = 0.0f64;
    for lambda in b.attractor_disk.b1_samples(10) {
        let mut prev = f64::INFINITY;
        for ell in [10.0, 20.0, 30.0] {
            let probe = center_endpoint(&doubled, ell, lambda, &t).unwrap();
            pass &= probe.crossing.re > 0.0;
            pass &= probe.dist_to_pn < prev;
            prev = probe.dist_to_pn;
            if ell == 30.0 {
                worst_b1 = worst_b1.max(probe.dist_to_pn);
            }
        }
    }
    for lambda in b.attractor_disk.b2_samples(10) {
        let mut prev = f64::INFINITY;
        for ell in [10.0, 20.0, 30.0] {
            let probe = center_endpoint(&doubled, ell, lambda, &t).unwrap();
            pass &= probe.crossing.re < 0.0;
            pass &= probe.dist_to_ps < prev;
            prev = probe.dist_to_ps;
            if ell == 30.0 {
                worst_b2 = worst_b2.max(probe.dist_to_ps);
            }
        }
    }
    pass &= worst_b1 <= 1e-6 && worst_b2 <= 1e-6;
    details.push(format!("periodic-adv-diff: B1 {worst_b1:.2e}, B2 {worst_b2:.2e}"));
    report("8 (attractor/repeller endpoints)", pass, &details.join("; "));
}

/// Criterion 9: the certified finite-difference derivative matches the
/// closed form 2 / sqrt(c^2 + 4 lambda) to relative 1e-6 at 20 locus points
/// for c = 2.
#[test]
fn acceptance_09_nondegeneracy_derivative() {
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 2.0)])).unwrap();
    let mut worst = 0.0f64;
    for j in 1..=20 {
        let lambda = c(-1.0 - 0.15 * j as f64, 0.0);
        let r = certify_nondegenerate(&b.profile, &b.boundary, b.side, lambda, &t).unwrap();
        let closed = b.oracle.gap_derivative(lambda).unwrap();
        worst = worst.max((r.derivative - closed).norm() / closed.norm());
    }
    report(
        "9 (non-degeneracy derivative)",
        worst <= 1e-6,
        &format!("worst relative error {worst:.2e} at 20 locus points"),
    );
}

/// Criterion 10: the full self-test suite finishes under 120 seconds and
/// the quick subset under 10.
#[test]
fn acceptance_10_selftest_wallclock() {
    let t = tol();
    let started = Instant::now();
    let quick = absspec::selftest::run(true, 0xA11CE, absspec::selftest::Fault::None, &t);
    let quick_elapsed = started.elapsed().as_secs_f64();
    let started = Instant::now();
    let full = absspec::selftest::run(false, 0xA11CE, absspec::selftest::Fault::None, &t);
    let full_elapsed = started.elapsed().as_secs_f64();
    let pass =
        quick.all_pass() && full.all_pass() && quick_elapsed < 10.0 && full_elapsed < 120.0;
    report(
        "10 (self-test wall clock)",
        pass,
        &format!("quick {quick_elapsed:.2} s, full {full_elapsed:.2} s, all checks pass"),
    );
}
