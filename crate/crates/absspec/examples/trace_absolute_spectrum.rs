//! Trace the absolute spectrum of the scalar advection-diffusion tail as
//! the zero locus of the eigenvalue gap, and compare against the closed
//! form: the real ray left of -c^2/4.
//!
//! Run with: cargo run --example trace_absolute_spectrum

use std::collections::BTreeMap;

use absspec::config::Tolerances;
use absspec::problem::ParameterDomain;
use absspec::problems::builtin;
use absspec::spectra::{locus_csv, trace_locus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let mut params = BTreeMap::new();
    params.insert("c".to_string(), 2.0);
    let problem = builtin("adv-diff", &params)?;

    let domain = ParameterDomain::rect(-4.0, 1.0, -1.0, 1.0, 96)?;
    let locus = trace_locus(&problem.profile, &problem.boundary, problem.side, &domain, &tol)?;

    println!("problem: {}", problem.name);
    println!("closed-form ray end: {}", problem.oracle.abs_ray_end().unwrap());
    println!("arcs: {}, vertices: {}", locus.polylines.len(), locus.vertex_count());

    let mut worst_im = 0.0f64;
    let mut right_end = f64::NEG_INFINITY;
    for v in locus.polylines.iter().flatten() {
        worst_im = worst_im.max(v.lambda.im.abs());
        right_end = right_end.max(v.lambda.re);
    }
    println!("max |Im lambda| over vertices: {worst_im:.2e}");
    println!("rightmost vertex: {right_end:.6}");

    let nondeg = locus.nondegenerate_vertices().count();
    println!("non-degenerate vertices (the dense certified subset): {nondeg}");

    // first few CSV rows, as the CLI would emit them
    let csv = locus_csv(&locus);
    for line in csv.lines().take(5) {
        println!("{line}");
    }
    Ok(())
}
