//! Eigenvalues of the truncated boundary-value problem accumulate on the
//! absolute spectrum as the interval grows: count them in a fixed disk by
//! the winding of the Evans-type determinant and watch the count scale
//! linearly with the interval half-length.
//!
//! Run with: cargo run --release --example eigenvalue_accumulation

use std::collections::BTreeMap;

use absspec::config::Tolerances;
use absspec::counting::accumulation_experiment;
use absspec::problems::builtin;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let mut params = BTreeMap::new();
    params.insert("c".to_string(), 0.0);
    let problem = builtin("adv-diff", &params)?;

    let center = Complex64::new(-1.0, 0.0);
    let radius = 0.5;
    let ells: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|m| m * std::f64::consts::PI).collect();

    let table = accumulation_experiment(
        &problem.profile,
        &problem.boundary,
        problem.side,
        center,
        radius,
        &ells,
        &tol,
    )?;

    println!("disk B({center}; {radius}), center certified: {:?}", table.certified);
    println!("{:>12} {:>8} {:>8}", "ell", "count", "oracle");
    for row in &table.rows {
        let oracle = problem
            .oracle
            .dirichlet_eigenvalues_in(row.ell, center, radius)
            .map(|v| v.len().to_string())
            .unwrap_or_else(|| "-".into());
        println!("{:>12.4} {:>8} {:>8}", row.ell, row.count, oracle);
    }
    println!("fitted slope count/ell: {:.6}", table.slope);

    // the same disk away from the spectrum stays empty
    let off = accumulation_experiment(
        &problem.profile,
        &problem.boundary,
        problem.side,
        Complex64::new(1.0, 0.0),
        radius,
        &[ells[0], ells[1]],
        &tol,
    )?;
    println!(
        "off-spectrum disk at +1: counts {:?}",
        off.rows.iter().map(|r| r.count).collect::<Vec<_>>()
    );
    Ok(())
}
