//! Desk-scale invariant suite behind the `selftest` subcommand: compound
//! eigenvalue sums, Pluecker relations, the commuting square, determinant
//! identities, and oracle matches on the built-in problems.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::exterior::{
    complement_pairing, compound_matrix, pluecker, projection_frame, wedge_minors, IndexBasis,
    PlueckerPoint,
};
use crate::flow::Propagator;
use crate::linalg::{det_logscaled, eig_sorted, expm, qr_plain, ComplexMatrix, Subspace, ONE};
use crate::problem::diagonal_subspace;
use crate::problems::builtin;
use crate::rng::Rng;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    /// Worst observed deviation, compared against the stated bound.
    pub margin: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<38} {:>6}  {:>12}  {:>9}", "invariant", "status", "margin", "bound");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<38} {:>6}  {:>12.3e}  {:>9.1e}",
                c.name,
                if c.pass { "pass" } else { "FAIL" },
                c.margin,
                c.bound
            );
        }
        out
    }
}

fn multiset_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
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
        if let Some((j, d)) = best {
            used[j] = true;
            worst = worst.max(d);
        } else {
            return f64::INFINITY;
        }
    }
    worst
}

fn random_matrix(rng: &mut Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::new(n, n, (0..n * n).map(|_| rng.complex()).collect()).unwrap()
}

/// Injectable perturbations, used to prove the suite actually detects
/// failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    None,
    /// Perturb one compound-matrix entry before the eigenvalue-sum check.
    CompoundEntry,
}

/// Compound eigenvalues are k-sums of base eigenvalues (100 random draws).
fn check_compound_sums(seed: u64, fault: Fault, tol: &Tolerances) -> CheckResult {
    let mut rng = Rng::new(seed ^ 0xC0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = 2 + rng.usize_below(5); // N <= 6
        let k = 1 + rng.usize_below(n.min(3)); // k <= 3
        let a = random_matrix(&mut rng, n);
        let mut comp = compound_matrix(&a, k).unwrap();
        if fault == Fault::CompoundEntry {
            let m = comp.rows();
            let i = rng.usize_below(m);
            let j = rng.usize_below(m);
            comp[(i, j)] += Complex64::new(1e-3, 0.0);
        }
        let base = eig_sorted(&a, tol).unwrap().values;
        let comp_eigs = eig_sorted(&comp, tol).unwrap().values;
        let sums = k_sums(&base, k);
        worst = worst.max(multiset_deviation(&comp_eigs, &sums));
    }
    CheckResult { name: "compound eigenvalues are k-sums", pass: worst <= 1e-8, margin: worst, bound: 1e-8 }
}

fn k_sums(values: &[Complex64], k: usize) -> Vec<Complex64> {
    let n = values.len();
    let basis = IndexBasis::new(n, k).unwrap();
    basis
        .subsets
        .iter()
        .map(|set| set.iter().map(|&i| values[i]).sum())
        .collect()
}

/// The three-term quadratic relation for N = 4, k = 2 embeddings.
fn check_pluecker_relation(seed: u64, tol: &Tolerances) -> CheckResult {
    let mut rng = Rng::new(seed ^ 0x50);
    let basis = IndexBasis::new(4, 2).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let span = ComplexMatrix::new(4, 2, (0..8).map(|_| rng.complex()).collect()).unwrap();
        let u = match Subspace::from_columns(&span, tol) {
            Ok(u) => u,
            Err(_) => continue,
        };
        let p = pluecker(&u, &basis).unwrap();
        let z = p.coords();
        let rel = (z[0] * z[5] - z[1] * z[4] + z[2] * z[3]).norm();
        worst = worst.max(rel);
    }
    CheckResult { name: "pluecker quadratic relation", pass: worst <= 1e-8, margin: worst, bound: 1e-8 }
}

/// Embedding a propagated subspace equals propagating the embedding.
fn check_commuting_square(seed: u64, tol: &Tolerances) -> CheckResult {
    let mut rng = Rng::new(seed ^ 0x5A);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = 2 + rng.usize_below(4); // N <= 5
        let k = 1 + rng.usize_below(n - 1);
        let basis = IndexBasis::new(n, k).unwrap();
        let a = random_matrix(&mut rng, n);
        let span = ComplexMatrix::new(n, k, (0..n * k).map(|_| rng.complex()).collect()).unwrap();
        let u = match Subspace::from_columns(&span, tol) {
            Ok(u) => u,
            Err(_) => continue,
        };
        let flow = expm(&a);
        let moved = Subspace::from_columns(&flow.mul(u.frame()).unwrap(), tol).unwrap();
        let left = pluecker(&moved, &basis).unwrap();
        let comp = compound_matrix(&a, k).unwrap();
        let p0 = pluecker(&u, &basis).unwrap();
        let right = PlueckerPoint::new(expm(&comp).matvec(p0.coords())).unwrap();
        worst = worst.max(left.chordal_distance(&right));
    }
    CheckResult { name: "commuting square (unit length)", pass: worst <= 1e-6, margin: worst, bound: 1e-6 }
}

/// Doubled boundary determinant vs det(Phi - gamma I) on synthetic data.
fn check_doubled_identity(seed: u64, _tol: &Tolerances) -> CheckResult {
    let mut rng = Rng::new(seed ^ 0xD0);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 100 {
        let n = 2 + rng.usize_below(4);
        let phi = random_matrix(&mut rng, n);
        let (lm, _) = det_logscaled(&phi).unwrap();
        if lm < -3.0 {
            continue;
        }
        checked += 1;
        let gamma = Complex64::new(0.0, rng.range(0.0, 2.0 * std::f64::consts::PI)).exp();
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
        let err = (rebuilt - direct).norm().min((rebuilt + direct).norm()) / direct.norm().max(1e-12);
        worst = worst.max(err);
    }
    CheckResult { name: "doubled determinant identity", pass: worst <= 1e-8, margin: worst, bound: 1e-8 }
}

/// Wedge pairing against the concatenated determinant.
fn check_pairing(seed: u64, tol: &Tolerances) -> CheckResult {
    let mut rng = Rng::new(seed ^ 0xFA);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = 3 + rng.usize_below(3);
        let k = 1 + rng.usize_below(n - 1);
        let basis = IndexBasis::new(n, k).unwrap();
        let g = match Subspace::from_columns(
            &ComplexMatrix::new(n, k, (0..n * k).map(|_| rng.complex()).collect()).unwrap(),
            tol,
        ) {
            Ok(u) => u,
            Err(_) => continue,
        };
        let u = match Subspace::from_columns(
            &ComplexMatrix::new(n, n - k, (0..n * (n - k)).map(|_| rng.complex()).collect())
                .unwrap(),
            tol,
        ) {
            Ok(u) => u,
            Err(_) => continue,
        };
        let pairing = complement_pairing(&wedge_minors(g.frame(), &basis), &u, &basis).unwrap();
        let (lm, ph) = det_logscaled(&g.frame().hstack(u.frame()).unwrap()).unwrap();
        let det = ph * lm.exp();
        worst = worst.max((pairing - det).norm() / (1.0 + det.norm()));
    }
    CheckResult { name: "wedge pairing equals determinant", pass: worst <= 1e-10, margin: worst, bound: 1e-10 }
}

/// Closed-form gap oracle on the advection family.
fn check_gap_oracle(tol: &Tolerances) -> CheckResult {
    let b = builtin("adv-diff", &BTreeMap::new()).unwrap();
    let mut worst = 0.0f64;
    for j in 0..20 {
        let lambda = Complex64::new(-3.0 + 0.3 * j as f64, if j % 2 == 0 { 0.4 } else { -0.7 });
        let g = crate::spectra::gap(&b.profile, &b.boundary, b.side, lambda, tol).unwrap();
        let oracle = b.oracle.gap(lambda).unwrap();
        worst = worst.max((g.unsigned - oracle).abs());
    }
    CheckResult { name: "gap matches dispersion oracle", pass: worst <= 1e-9, margin: worst, bound: 1e-9 }
}

/// Projection chart is the identity on the leading plane.
fn check_projection_identity(seed: u64, tol: &Tolerances) -> CheckResult {
    let mut rng = Rng::new(seed ^ 0x1D);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let m = 3 + rng.usize_below(4);
        let a = random_matrix(&mut rng, m);
        let frame = match projection_frame(&a, tol) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let za = rng.complex();
        let zb = rng.complex();
        let raw: Vec<Complex64> =
            (0..m).map(|i| za * frame.w1[i] + zb * frame.w2[i]).collect();
        let p = PlueckerPoint::new(raw).unwrap();
        let (z1, z2) = frame.project(&p);
        let cross = (z1 * zb - z2 * za).norm()
            / ((z1.norm_sqr() + z2.norm_sqr()).sqrt() * (za.norm_sqr() + zb.norm_sqr()).sqrt());
        worst = worst.max(cross);
    }
    CheckResult { name: "projection identity on leading plane", pass: worst <= 1e-9, margin: worst, bound: 1e-9 }
}

/// Log scales of constant diagonal flows track the restricted trace.
fn check_log_scale(tol: &Tolerances) -> CheckResult {
    let b = builtin("adv-diff", &BTreeMap::new()).unwrap();
    let lambda = Complex64::new(1.0, 0.0);
    let prop = Propagator::new(&b.profile, lambda, tol).unwrap();
    // at c = 2, lambda = 1: eigenvalues mu = (-2 +- sqrt(8))/2
    let mu1 = (-2.0 + 8.0f64.sqrt()) / 2.0;
    let span = ComplexMatrix::new(
        2,
        1,
        vec![ONE, Complex64::new(mu1, 0.0)],
    )
    .unwrap();
    let u = Subspace::from_columns(&span, tol).unwrap();
    let (_, log_scale) = prop.propagate_subspace(2.0, 7.0, &u).unwrap();
    let dev = (log_scale - 5.0 * mu1).abs();
    CheckResult { name: "log scale tracks invariant growth", pass: dev <= 1e-8, margin: dev, bound: 1e-8 }
}

/// Winding count against the Dirichlet oracle at desk scale.
fn check_winding_oracle(tol: &Tolerances) -> CheckResult {
    let mut params = BTreeMap::new();
    params.insert("c".to_string(), 0.0);
    let b = builtin("adv-diff", &params).unwrap();
    let ell = 4.0 * std::f64::consts::PI;
    let center = Complex64::new(-1.0, 0.0);
    let report =
        crate::counting::winding_count(&b.profile, &b.boundary, ell, center, 0.5, tol).unwrap();
    let oracle = b.oracle.dirichlet_eigenvalues_in(ell, center, 0.5).unwrap().len() as i64;
    let dev = (report.winding - oracle).abs() as f64;
    CheckResult { name: "winding matches Dirichlet oracle", pass: dev == 0.0, margin: dev, bound: 0.5 }
}

/// Periodic doubled count against the Fourier oracle at desk scale.
fn check_periodic_oracle(tol: &Tolerances) -> CheckResult {
    let mut params = BTreeMap::new();
    params.insert("c".to_string(), 1.0);
    let b = builtin("periodic-adv-diff", &params).unwrap();
    let d = crate::periodic::double_system(&b.profile, ONE).unwrap();
    let center = Complex64::new(-1.0, 1.0);
    let r = crate::periodic::periodic_count(&d, 15.0, center, 0.3, tol).unwrap();
    let oracle =
        b.oracle.gamma_eigenvalues_in(15.0, ONE, center, 0.3).unwrap().len() as i64;
    let dev = (r.report.winding - oracle).abs() as f64;
    let crosscheck_ok = r.monodromy_winding.map_or(false, |m| m == r.report.winding);
    CheckResult {
        name: "periodic winding + monodromy crosscheck",
        pass: dev == 0.0 && crosscheck_ok,
        margin: dev,
        bound: 0.5,
    }
}

/// Run the invariant suite. `quick` restricts to the kernel checks.
pub fn run(quick: bool, seed: u64, fault: Fault, tol: &Tolerances) -> SelftestReport {
    let mut checks = vec![
        check_compound_sums(seed, fault, tol),
        check_pluecker_relation(seed, tol),
        check_pairing(seed, tol),
        check_projection_identity(seed, tol),
    ];
    if !quick {
        checks.push(check_commuting_square(seed, tol));
        checks.push(check_doubled_identity(seed, tol));
        checks.push(check_gap_oracle(tol));
        checks.push(check_log_scale(tol));
        checks.push(check_winding_oracle(tol));
        checks.push(check_periodic_oracle(tol));
    }
    SelftestReport { checks }
}
