//! Locate individual eigenvalues: quadrisect a disk until each piece winds
//! once, then polish by secant iteration on the normalized determinant.
//!
//! Run with: cargo run --release --example refine_eigenvalues

use std::collections::BTreeMap;

use absspec::config::Tolerances;
use absspec::counting::{locate_zeros, winding_count};
use absspec::problems::builtin;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let mut params = BTreeMap::new();
    params.insert("c".to_string(), 0.0);
    let problem = builtin("adv-diff", &params)?;

    // at ell = pi/2 the Dirichlet eigenvalues sit at lambda = -n^2
    let ell = std::f64::consts::FRAC_PI_2;
    let center = Complex64::new(-2.5, 0.0);
    let radius = 2.0;

    let winding = winding_count(&problem.profile, &problem.boundary, ell, center, radius, &tol)?;
    println!("disk B({center}; {radius}) at ell = pi/2 winds {} times", winding.winding);

    let zeros = locate_zeros(&problem.profile, &problem.boundary, ell, center, radius, 4, &tol)?;
    println!("{:>24} {:>12} {:>6}", "refined eigenvalue", "residual", "mult");
    for z in &zeros {
        println!(
            "{:>24} {:>12.2e} {:>6}",
            format!("{:.10}", z.lambda),
            z.residual,
            z.multiplicity
        );
    }
    println!("closed form: -1 and -4");
    Ok(())
}
