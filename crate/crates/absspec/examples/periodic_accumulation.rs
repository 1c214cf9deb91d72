//! Periodic boundary conditions through the doubling construction: count
//! gamma-eigenvalues in a disk on the dispersion parabola, cross-check the
//! doubled determinant against the direct monodromy criterion, and classify
//! candidate points by whether their counts stay bounded as the interval
//! grows.
//!
//! Run with: cargo run --release --example periodic_accumulation

use std::collections::BTreeMap;

use absspec::config::Tolerances;
use absspec::linalg::ONE;
use absspec::periodic::{double_system, extrapolated_set_probe, periodic_count};
use absspec::problems::builtin;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let mut params = BTreeMap::new();
    params.insert("c".to_string(), 1.0);
    let problem = builtin("periodic-adv-diff", &params)?;
    let doubled = double_system(&problem.profile, ONE)?;

    // disk center on the parabola lambda = -k^2 + i c k at k = 1
    let center = Complex64::new(-1.0, 1.0);
    let radius = 0.3;

    println!("{:>8} {:>8} {:>10} {:>8}", "ell", "count", "crosscheck", "oracle");
    for ell in [20.0, 40.0, 80.0] {
        let r = periodic_count(&doubled, ell, center, radius, &tol)?;
        let oracle = problem
            .oracle
            .gamma_eigenvalues_in(ell, ONE, center, radius)
            .map(|v| v.len().to_string())
            .unwrap_or_else(|| "-".into());
        let check = r
            .monodromy_winding
            .map(|w| w.to_string())
            .unwrap_or_else(|| "skipped".into());
        println!("{:>8} {:>8} {:>10} {:>8}", ell, r.report.winding, check, oracle);
    }

    // the point on the parabola attracts unboundedly many eigenvalues;
    // a hyperbolic point does not
    let candidates = [center, Complex64::new(1.0, 1.0)];
    let reports = extrapolated_set_probe(
        &doubled,
        &candidates,
        radius,
        &[20.0, 40.0, 60.0, 80.0],
        3,
        &tol,
    )?;
    for rep in &reports {
        println!(
            "candidate {:>10}: certified {:?}, counts {:?}, class {:?}",
            format!("{}", rep.lambda),
            rep.certified,
            rep.counts.iter().map(|&(_, n)| n).collect::<Vec<_>>(),
            rep.class
        );
    }
    Ok(())
}
