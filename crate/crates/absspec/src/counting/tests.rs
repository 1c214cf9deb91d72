use std::collections::BTreeMap;

use num_complex::Complex64;

use super::*;
use crate::problems::builtin;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn no_params() -> BTreeMap<String, f64> {
    BTreeMap::new()
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn winding_of_identity_and_square() {
    // synthetic injections: E(lambda) = lambda has winding 1 around the
    // origin, E = lambda^2 winding 2
    let t = tol();
    let value1 = |l: Complex64| Ok((l.norm().ln(), l / l.norm()));
    let r1 = winding_of(value1, c(0.0, 0.0), 1.0, &t).unwrap();
    assert_eq!(r1.winding, 1);
    let value2 = |l: Complex64| {
        let e = l * l;
        Ok((e.norm().ln(), e / e.norm()))
    };
    let r2 = winding_of(value2, c(0.0, 0.0), 1.0, &t).unwrap();
    assert_eq!(r2.winding, 2);
    // increments satisfied on the final sampling
    let mut phases: Vec<Complex64> = r2.samples.iter().map(|s| s.phase).collect();
    phases.push(r2.samples[0].phase);
    let (_, max_inc) = unwrap_phases(&phases);
    assert!(max_inc < std::f64::consts::FRAC_PI_2);
}

#[test]
fn winding_detects_zero_on_contour() {
    let t = tol();
    // E(lambda) = lambda - 1 vanishes on the unit circle at every attempted
    // radius perturbation of the unit disk? No: perturbed radii move the
    // contour off the zero, so the count flips between 0 and 1 but returns.
    // Construct a function vanishing on an annulus instead.
    let value = |l: Complex64| {
        let m = (l.norm() - 1.0).abs();
        if m < 0.05 {
            Ok((f64::NEG_INFINITY, c(1.0, 0.0)))
        } else {
            Ok((0.0, c(1.0, 0.0)))
        }
    };
    assert!(matches!(
        winding_of(value, c(0.0, 0.0), 1.0, &t),
        Err(Error::Contour { .. })
    ));
}

#[test]
fn dirichlet_count_at_moderate_length() {
    // c = 0: eigenvalues -(n pi / 2 ell)^2; disk B(-1, 0.5) at ell = 10 pi
    // holds n = 15..24, ten eigenvalues
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let ell = 10.0 * std::f64::consts::PI;
    let report =
        winding_count(&b.profile, &b.boundary, ell, c(-1.0, 0.0), 0.5, &t).unwrap();
    let oracle = b.oracle.dirichlet_eigenvalues_in(ell, c(-1.0, 0.0), 0.5).unwrap();
    assert_eq!(oracle.len(), 10);
    assert_eq!(report.winding, 10);
}

#[test]
fn off_spectrum_disk_is_empty() {
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let report = winding_count(
        &b.profile,
        &b.boundary,
        8.0,
        c(1.0, 0.0),
        0.5,
        &t,
    )
    .unwrap();
    assert_eq!(report.winding, 0);
}

#[test]
fn count_monotone_in_radius() {
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let ell = 4.0 * std::f64::consts::PI;
    let small =
        winding_count(&b.profile, &b.boundary, ell, c(-1.0, 0.0), 0.3, &t).unwrap();
    let large =
        winding_count(&b.profile, &b.boundary, ell, c(-1.0, 0.0), 0.5, &t).unwrap();
    assert!(small.winding <= large.winding);
}

#[test]
fn accumulation_reports_slope_and_certification() {
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let ells = [2.0 * std::f64::consts::PI, 4.0 * std::f64::consts::PI];
    let table = accumulation_experiment(
        &b.profile,
        &b.boundary,
        b.side,
        c(-1.0, 0.0),
        0.5,
        &ells,
        &t,
    )
    .unwrap();
    assert_eq!(table.certified, Some(true));
    for (row, &ell) in table.rows.iter().zip(ells.iter()) {
        let oracle = b.oracle.dirichlet_eigenvalues_in(ell, c(-1.0, 0.0), 0.5).unwrap();
        assert_eq!(row.count, oracle.len() as i64, "ell = {ell}");
    }
    assert!(table.slope > 0.0);
    // counts nondecreasing
    assert!(table.rows[1].count >= table.rows[0].count);
}

#[test]
fn accumulation_off_locus_is_zero_and_uncertified() {
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let table = accumulation_experiment(
        &b.profile,
        &b.boundary,
        b.side,
        c(1.0, 0.0),
        0.5,
        &[5.0, 10.0],
        &t,
    )
    .unwrap();
    assert_eq!(table.certified, None);
    assert!(table.rows.iter().all(|r| r.count == 0));
}

#[test]
fn covering_trace_turns_match_frequency_oracle() {
    // omega(lambda) = 2 sqrt|lambda| for c = 0; over [-2.25, -0.25] at
    // ell = 10 the projected coordinate should wrap about 6.4 times
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let ell = 10.0;
    let segment: Vec<Complex64> =
        (0..=96).map(|j| c(-2.25 + 2.0 * j as f64 / 96.0, 0.0)).collect();
    let trace = covering_trace(&b.profile, &b.boundary, ell, &segment, None, &t).unwrap();
    let expected = 2.0 * (1.5 - 0.5) * 2.0 * ell / (2.0 * std::f64::consts::PI);
    assert!(trace.turn_count >= 6.0, "turns {}", trace.turn_count);
    assert!(
        (trace.turn_count - expected).abs() <= 1.0,
        "turns {} vs oracle {expected}",
        trace.turn_count
    );
    // no sample wanders into the exclusion neighborhoods on this family
    assert!(trace.samples.iter().all(|s| !s.in_exclusion));
}

#[test]
fn covering_trace_turns_double_with_ell() {
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let segment: Vec<Complex64> =
        (0..=96).map(|j| c(-2.25 + 2.0 * j as f64 / 96.0, 0.0)).collect();
    let t1 = covering_trace(&b.profile, &b.boundary, 10.0, &segment, None, &t).unwrap();
    let t2 = covering_trace(&b.profile, &b.boundary, 20.0, &segment, None, &t).unwrap();
    assert!(
        (t2.turn_count - 2.0 * t1.turn_count).abs() <= 1.0,
        "{} vs doubled {}",
        t2.turn_count,
        2.0 * t1.turn_count
    );
}

#[test]
fn covering_and_winding_agree() {
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let ell = 10.0;
    let segment: Vec<Complex64> =
        (0..=96).map(|j| c(-2.25 + 2.0 * j as f64 / 96.0, 0.0)).collect();
    let trace = covering_trace(&b.profile, &b.boundary, ell, &segment, None, &t).unwrap();
    let report =
        winding_count(&b.profile, &b.boundary, ell, c(-1.25, 0.0), 1.0, &t).unwrap();
    assert!(
        (trace.turn_count - report.winding as f64).abs() <= 2.0,
        "turns {} vs winding {}",
        trace.turn_count,
        report.winding
    );
}

#[test]
fn attraction_probe_hits_pn_in_b1() {
    let t = tol();
    let b = builtin("adv-diff", &no_params()).unwrap();
    let lambda = b.attractor_disk.b1_samples(3)[1];
    let mut dists = Vec::new();
    for ell in [10.0, 20.0, 30.0] {
        let probe =
            endpoint_attraction(&b.profile, &b.boundary, b.side, ell, lambda, &t).unwrap();
        assert_eq!(probe.class, crate::spectra::HalfDiskClass::B1);
        dists.push(probe.dist_to_pn);
    }
    assert!(dists[2] <= 1e-6, "distance at ell = 30: {}", dists[2]);
    assert!(dists[0] > dists[1] && dists[1] > dists[2], "distances not decreasing: {dists:?}");
}

#[test]
fn attraction_probe_hits_ps_in_b2() {
    let t = tol();
    let b = builtin("adv-diff", &no_params()).unwrap();
    let lambda = b.attractor_disk.b2_samples(3)[1];
    let probe = endpoint_attraction(&b.profile, &b.boundary, b.side, 30.0, lambda, &t).unwrap();
    assert_eq!(probe.class, crate::spectra::HalfDiskClass::B2);
    assert!(probe.dist_to_ps <= 1e-6, "distance to repeller {}", probe.dist_to_ps);
}

#[test]
fn refine_finds_dirichlet_eigenvalues() {
    // ell = pi/2: zeros at lambda = -n^2
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let ell = std::f64::consts::FRAC_PI_2;
    let z = refine_eigenvalue(&b.profile, &b.boundary, ell, c(-1.1, 0.0), 0.4, &t).unwrap();
    assert!((z.lambda - c(-1.0, 0.0)).norm() < 1e-7, "refined to {}", z.lambda);
    assert!(z.residual <= 1e-10);
    assert_eq!(z.multiplicity, 1);

    let z4 = refine_eigenvalue(&b.profile, &b.boundary, ell, c(-4.2, 0.1), 0.5, &t).unwrap();
    assert!((z4.lambda - c(-4.0, 0.0)).norm() < 1e-7);
}

#[test]
fn refine_rejects_empty_seed_disk() {
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    assert!(matches!(
        refine_eigenvalue(&b.profile, &b.boundary, 2.0, c(1.0, 0.0), 0.3, &t),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn quadrisection_finds_all_zeros() {
    // disk around -2.5 radius 2 at ell = pi/2 holds lambda = -1 and -4
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let ell = std::f64::consts::FRAC_PI_2;
    let report = winding_count(&b.profile, &b.boundary, ell, c(-2.5, 0.0), 2.0, &t).unwrap();
    assert_eq!(report.winding, 2);
    let zeros =
        locate_zeros(&b.profile, &b.boundary, ell, c(-2.5, 0.0), 2.0, 4, &t).unwrap();
    assert_eq!(zeros.len(), 2, "zeros: {zeros:?}");
    let mut res: Vec<f64> =
        zeros.iter().map(|z| (z.lambda - c(-1.0, 0.0)).norm().min((z.lambda - c(-4.0, 0.0)).norm())).collect();
    res.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!(res[1] < 1e-6);
    for z in &zeros {
        assert!(z.residual <= 1e-10);
    }
}

#[test]
fn covering_trace_rejects_target_in_exclusion_zone() {
    // engineer U_+ aligned with the leading tail eigenvector at the segment
    // midpoint: the eigenvalue-target point collapses onto the attractor
    // and the covering count would be meaningless
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let mut span_p = crate::linalg::ComplexMatrix::zeros(2, 1);
    // w1 at lambda = -1 is proportional to (1, i)
    let s = 1.0 / 2.0f64.sqrt();
    span_p[(0, 0)] = c(s, 0.0);
    span_p[(1, 0)] = c(0.0, s);
    let u_plus = crate::linalg::Subspace::from_columns(&span_p, &t).unwrap();
    let boundary =
        crate::problem::BoundaryData::new(b.boundary.left.clone(), u_plus).unwrap();
    let segment: Vec<Complex64> = (0..=16).map(|j| c(-1.2 + 0.4 * j as f64 / 16.0, 0.0)).collect();
    match covering_trace(&b.profile, &boundary, 8.0, &segment, None, &t) {
        Err(Error::Config(msg)) => assert!(msg.contains("exclusion"), "{msg}"),
        other => panic!("expected ConfigError, got {:?}", other.map(|t| t.turn_count)),
    }
}

#[test]
fn quadrisection_handles_winding_three() {
    // B(-4.5; 5) at ell = pi/2 holds lambda = -1, -4, -9
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let ell = std::f64::consts::FRAC_PI_2;
    let report = winding_count(&b.profile, &b.boundary, ell, c(-4.5, 0.0), 5.0, &t).unwrap();
    assert_eq!(report.winding, 3);
    let zeros = locate_zeros(&b.profile, &b.boundary, ell, c(-4.5, 0.0), 5.0, 5, &t).unwrap();
    assert_eq!(zeros.len(), 3, "zeros: {zeros:?}");
    for expected in [-1.0, -4.0, -9.0] {
        assert!(
            zeros.iter().any(|z| (z.lambda - c(expected, 0.0)).norm() < 1e-6),
            "missing zero near {expected}"
        );
    }
    for z in &zeros {
        assert!(z.residual <= 1e-10);
        assert_eq!(z.multiplicity, 1);
    }
}

#[test]
fn two_component_counts_match_dispersion_oracle() {
    // 4-dimensional system with the order-2 compound active: exact counts
    // against the brute-force dispersion enumeration, slope within 10% of
    // the density analog.
    let t = tol();
    let b = builtin("two-component", &no_params()).unwrap();
    let (center, radius) = b.default_disk;
    let ells = [15.0, 25.0, 35.0];
    let table = accumulation_experiment(
        &b.profile, &b.boundary, b.side, center, radius, &ells, &t,
    )
    .unwrap();
    assert_eq!(table.certified, Some(true));
    for (row, &ell) in table.rows.iter().zip(ells.iter()) {
        let oracle = b.oracle.dirichlet_eigenvalues_in(ell, center, radius).unwrap();
        assert_eq!(row.count, oracle.len() as i64, "ell = {ell}");
    }
    // density analog: counts per unit ell from the k-window the disk cuts
    // out of the crossing dispersion branch
    let density = {
        let probe = |lam: f64| -> f64 {
            // kappa_min at real lambda for B = diag(1,2), J = [[-1,.5],[.5,-2]]
            let tr = (lam + 1.0) + (lam + 2.0) / 2.0;
            let det = (lam + 1.0) * (lam + 2.0) / 2.0 - 0.125;
            let disc = (tr * tr - 4.0 * det).sqrt();
            let kappa_min = (tr - disc) / 2.0;
            (-kappa_min).sqrt()
        };
        (probe(center.re - radius) - probe(center.re + radius)).abs() * 2.0
            / std::f64::consts::PI
    };
    let rel = (table.slope - density).abs() / density;
    assert!(rel <= 0.1, "slope {} vs density analog {density} (rel {rel})", table.slope);
}

#[test]
fn csv_schemas() {
    let t = tol();
    let b = builtin("adv-diff", &params(&[("c", 0.0)])).unwrap();
    let table = accumulation_experiment(
        &b.profile,
        &b.boundary,
        b.side,
        c(-1.0, 0.0),
        0.5,
        &[5.0],
        &t,
    )
    .unwrap();
    let csv = accumulation_csv(&table);
    assert!(csv.starts_with("# schema: absspec.counts.v1\nell,ell_bar,count\n"));

    let segment: Vec<Complex64> = (0..=8).map(|j| c(-1.5 + j as f64 / 8.0, 0.0)).collect();
    let trace = covering_trace(&b.profile, &b.boundary, 5.0, &segment, None, &t).unwrap();
    let tcsv = trace_csv(&trace);
    assert!(tcsv.starts_with("# schema: absspec.trace.v1\ns,re_lambda,"));
    assert_eq!(tcsv.lines().count(), 2 + trace.samples.len());
}
