//! Validate the structural requirements of each built-in problem over its
//! documented rectangle: the leading invariant subspaces of the tails and
//! the boundary subspaces must span the ambient space, meeting in exactly
//! one dimension.
//!
//! Run with: cargo run --example hypothesis_report

use std::collections::BTreeMap;

use absspec::config::Tolerances;
use absspec::problem::validate_hypotheses;
use absspec::problems::builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    for name in ["adv-diff", "adv-diff-front", "two-component", "periodic-adv-diff"] {
        let problem = builtin(name, &BTreeMap::new())?;
        let report = validate_hypotheses(
            &problem.profile,
            &problem.boundary,
            &problem.documented_domain,
            32,
            &tol,
        );
        println!(
            "{name:<22} samples {:>3}, failures {:>2}, cluster-flagged {:>2}",
            report.samples.len(),
            report.failures,
            report.flagged
        );
        // show one sample's margins
        if let Some(s) = report.samples.first() {
            println!(
                "  e.g. lambda = {:>18}: span margins {:.2e}/{:.2e}, intersections {}/{}",
                format!("{:.4}", s.lambda),
                s.sum_margin_plus,
                s.sum_margin_minus,
                s.intersect_plus,
                s.intersect_minus
            );
        }
    }
    Ok(())
}
