//! Define a problem in the JSON file format, load it back, and trace its
//! locus: coefficient matrices are small expressions in lambda and x, and
//! the loader validates seam continuity and boundary dimensions with
//! positioned error messages.
//!
//! Run with: cargo run --example custom_problem_file

use absspec::config::Tolerances;
use absspec::problem::{parse_problem_text, ParameterDomain};
use absspec::spectra::{trace_locus, Side};

const PROBLEM: &str = r#"{
  "name": "drifted-front",
  "N": 2,
  "ell0": 4.0,
  "kind": "separated-asymptotic",
  "constants": {"cm": 2.5, "cp": 1.5},
  "A_minus": [["0", "1"], ["lambda", "-cm"]],
  "A_plus":  [["0", "1"], ["lambda", "-cp"]],
  "middle":  [["0", "1"], ["lambda", "-(0.5*(cm+cp) + 0.5*(cp-cm)*tanh(3*x))"]],
  "U_minus": [[[0, 0], [1, 0]]],
  "U_plus":  [[[0, 0], [1, 0]]],
  "domain":  {"re": [-20, 5], "im": [-4, 4], "resolution": 16}
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let (profile, boundary) = parse_problem_text(PROBLEM, "drifted-front.json", &tol)?;
    println!("loaded '{}', N = {}, ell0 = {}", profile.name, profile.dim, profile.ell0);

    let lambda = num_complex::Complex64::new(-1.0, 0.0);
    let mid = profile.evaluate(0.0, lambda)?;
    println!("A(0; -1) = [[{}, {}], [{}, {}]]", mid[(0, 0)], mid[(0, 1)], mid[(1, 0)], mid[(1, 1)]);

    // plus-side locus: real ray left of -cp^2/4 = -0.5625
    let domain = ParameterDomain::rect(-3.0, 0.5, -0.8, 0.8, 48)?;
    let locus = trace_locus(&profile, &boundary, Side::Plus, &domain, &tol)?;
    let rightmost = locus
        .polylines
        .iter()
        .flatten()
        .map(|v| v.lambda.re)
        .fold(f64::NEG_INFINITY, f64::max);
    println!(
        "plus-side locus: {} vertices, rightmost at {:.4} (branch point at -0.5625)",
        locus.vertex_count(),
        rightmost
    );

    // a deliberately broken file: unknown identifier in an entry
    let broken = PROBLEM.replace("\"lambda\", \"-cm\"", "\"lambda\", \"-speed\"");
    match parse_problem_text(&broken, "broken.json", &tol) {
        Err(e) => println!("broken file rejected: {e}"),
        Ok(_) => println!("unexpected: broken file accepted"),
    }
    Ok(())
}
