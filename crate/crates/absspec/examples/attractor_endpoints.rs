//! On either side of the locus the projected endpoint of the propagated
//! boundary subspace settles exponentially onto one of two distinguished
//! points of the invariant sphere: the leading-direction point in the
//! order-preserved half-disk, its partner in the order-exchanged one.
//!
//! Run with: cargo run --release --example attractor_endpoints

use std::collections::BTreeMap;

use absspec::config::Tolerances;
use absspec::counting::endpoint_attraction;
use absspec::linalg::ONE;
use absspec::periodic::{center_endpoint, double_system};
use absspec::problems::builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();

    for name in ["adv-diff", "adv-diff-front", "two-component"] {
        let problem = builtin(name, &BTreeMap::new())?;
        let b1 = problem.attractor_disk.b1_samples(3)[1];
        let b2 = problem.attractor_disk.b2_samples(3)[1];
        println!("{name}: sample {b1:.4} (order preserved) / {b2:.4} (order exchanged)");
        println!("{:>6} {:>14} {:>14}", "ell", "dist to P_n", "dist to P_s");
        for ell in [10.0, 20.0, 30.0] {
            let pn = endpoint_attraction(
                &problem.profile, &problem.boundary, problem.side, ell, b1, &tol,
            )?;
            let ps = endpoint_attraction(
                &problem.profile, &problem.boundary, problem.side, ell, b2, &tol,
            )?;
            println!("{ell:>6} {:>14.3e} {:>14.3e}", pn.dist_to_pn, ps.dist_to_ps);
        }
        println!();
    }

    // periodic case: the tracked line in the doubled center subspace
    let problem = builtin("periodic-adv-diff", &BTreeMap::new())?;
    let doubled = double_system(&problem.profile, ONE)?;
    let b1 = problem.attractor_disk.b1_samples(3)[1];
    println!("periodic-adv-diff: sample {b1:.4}");
    println!("{:>6} {:>12} {:>14}", "ell", "Re mu_0^k", "dist to P_n");
    for ell in [10.0, 20.0, 30.0] {
        let probe = center_endpoint(&doubled, ell, b1, &tol)?;
        println!("{ell:>6} {:>12.4} {:>14.3e}", probe.crossing.re, probe.dist_to_pn);
    }
    Ok(())
}
