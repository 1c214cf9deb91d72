use super::*;
use crate::problem::{problem_hash, problem_to_json, validate_hypotheses};
use crate::spectra::{gap, trace_locus};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn no_params() -> BTreeMap<String, f64> {
    BTreeMap::new()
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn adv_diff_ray_end_matches_discriminant() {
    let b = builtin("adv-diff", &params(&[("c", 2.0)])).unwrap();
    assert_eq!(b.oracle.abs_ray_end(), Some(-1.0));
    // default disk center sits on the locus
    let g = gap(&b.profile, &b.boundary, b.side, b.default_disk.0, &tol()).unwrap();
    assert!(g.unsigned.abs() < 1e-12);
}

#[test]
fn periodic_dispersion_oracle() {
    let b = builtin("periodic-adv-diff", &params(&[("c", 1.0)])).unwrap();
    // k = 1 point on the parabola
    let lambda = num_complex::Complex64::new(-1.0, 1.0);
    let eigs = b
        .oracle
        .gamma_eigenvalues_in(20.0, num_complex::Complex64::new(1.0, 0.0), lambda, 0.3)
        .unwrap();
    assert_eq!(eigs.len(), 2, "expected modes n = 6, 7 at ell = 20: {eigs:?}");
}

#[test]
fn two_component_hypotheses_pass_on_documented_domain() {
    let b = builtin("two-component", &no_params()).unwrap();
    let report = validate_hypotheses(&b.profile, &b.boundary, &b.documented_domain, 32, &tol());
    assert!(report.all_pass(), "failures: {}", report.failures);
}

#[test]
fn two_component_locus_is_real_segment() {
    let b = builtin("two-component", &no_params()).unwrap();
    let locus =
        trace_locus(&b.profile, &b.boundary, b.side, &b.documented_domain, &tol()).unwrap();
    assert!(!locus.is_empty());
    let end = b.oracle.abs_ray_end().unwrap();
    for v in locus.polylines.iter().flatten() {
        assert!(v.lambda.im.abs() < 1e-6, "two-component locus off axis: {}", v.lambda);
        assert!(v.lambda.re <= end + 1e-6);
    }
}

#[test]
fn builtin_round_trip_evaluations() {
    for name in ["adv-diff", "adv-diff-front", "two-component", "periodic-adv-diff"] {
        let b = builtin(name, &no_params()).unwrap();
        let json = problem_to_json(&b.profile, &b.boundary);
        let (p2, b2) = crate::problem::parse_problem_text(&json, "roundtrip", &tol()).unwrap();
        let mut rng = crate::rng::Rng::new(7);
        for _ in 0..100 {
            let x = rng.range(-8.0, 8.0);
            let (re0, re1, im0, im1) = b.profile.domain.bounds();
            let lambda = num_complex::Complex64::new(rng.range(re0, re1), rng.range(im0, im1));
            let a = b.profile.evaluate(x, lambda).unwrap();
            let a2 = p2.evaluate(x, lambda).unwrap();
            assert!(a.sub(&a2).unwrap().max_abs() < 1e-12, "{name} deviates at ({x}, {lambda})");
        }
        assert_eq!(problem_hash(&b.profile, &b.boundary), problem_hash(&p2, &b2));
    }
}

#[test]
fn unknown_builtin_rejected() {
    assert!(matches!(builtin("no-such", &no_params()), Err(Error::UnknownProblem(_))));
}

#[test]
fn load_spec_parses_builtin_params() {
    let (profile, _, b) = load_spec("builtin:adv-diff,c=0", &tol()).unwrap();
    assert!(profile.name.contains("c=0"));
    assert!(matches!(b.unwrap().oracle, Oracle::AdvDiff { c } if c == 0.0));
    assert!(load_spec("builtin:adv-diff,c=abc", &tol()).is_err());
}

#[test]
fn attractor_samples_stay_inside_disk() {
    for name in ["adv-diff", "adv-diff-front", "two-component", "periodic-adv-diff"] {
        let b = builtin(name, &no_params()).unwrap();
        let d = b.attractor_disk;
        for s in d.b1_samples(10).into_iter().chain(d.b2_samples(10)) {
            assert!((s - d.center).norm() <= d.radius + 1e-12, "{name} sample escapes disk");
        }
    }
}
