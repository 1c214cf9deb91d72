//! Along the locus, the propagated boundary subspace wraps the invariant
//! sphere of the compound flow: the argument variation of the projected
//! coordinate counts the wraps, doubles with the interval length, and
//! agrees with the eigenvalue count of the enclosing disk.
//!
//! Run with: cargo run --release --example covering_trace

use std::collections::BTreeMap;

use absspec::config::Tolerances;
use absspec::counting::{covering_trace, winding_count};
use absspec::problems::builtin;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let mut params = BTreeMap::new();
    params.insert("c".to_string(), 0.0);
    let problem = builtin("adv-diff", &params)?;

    // locus segment [-2.25, -0.25] on the real axis
    let segment: Vec<Complex64> =
        (0..=96).map(|j| Complex64::new(-2.25 + 2.0 * j as f64 / 96.0, 0.0)).collect();

    println!("{:>6} {:>12} {:>14}", "ell", "turn count", "omega oracle");
    for ell in [5.0, 10.0, 20.0] {
        let trace =
            covering_trace(&problem.profile, &problem.boundary, ell, &segment, None, &tol)?;
        // omega(lambda) = 2 sqrt|lambda|: the predicted wrap count is
        // (omega(-0.25) - omega(-2.25)) * 2 ell / 2 pi
        let omega = |l: Complex64| problem.oracle.omega(l).unwrap().abs();
        let predicted = (omega(segment[segment.len() - 1]) - omega(segment[0])).abs() * 2.0 * ell
            / (2.0 * std::f64::consts::PI);
        println!("{ell:>6} {:>12.3} {predicted:>14.3}", trace.turn_count);
    }

    let ell = 10.0;
    let trace = covering_trace(&problem.profile, &problem.boundary, ell, &segment, None, &tol)?;
    let disk = winding_count(
        &problem.profile,
        &problem.boundary,
        ell,
        Complex64::new(-1.25, 0.0),
        1.0,
        &tol,
    )?;
    println!(
        "at ell = {ell}: turns {:.2} vs winding {} of the enclosing disk",
        trace.turn_count, disk.winding
    );
    println!(
        "worst leading-plane fraction along the trace: {:.3} (flow transversality margin)",
        trace.min_leading_fraction
    );
    Ok(())
}
