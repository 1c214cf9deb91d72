//! Command-line front end: locus tracing, eigenvalue counting, the problem
//! catalog, and the self-test suite. Every run writes a manifest next to
//! its outputs.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 input/validation,
//! 3 numerical (contour) failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::counting;
use crate::error::Error;
use crate::manifest::RunManifest;
use crate::periodic;
use crate::problem::{problem_hash, ParameterDomain};
use crate::problems::{catalog, load_spec};
use crate::selftest;
use crate::spectra::{self, Side};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Contour { .. }
        | Error::Inconsistency(_)
        | Error::IntegratorFailure { .. }
        | Error::NonConvergence { .. } => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

struct Flags {
    values: BTreeMap<String, Vec<String>>,
    switches: Vec<String>,
}

impl Flags {
    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).and_then(|v| v.last()).map(|s| s.as_str())
    }

    fn get_all(&self, key: &str) -> Vec<&str> {
        self.values.get(key).map(|v| v.iter().map(|s| s.as_str()).collect()).unwrap_or_default()
    }

    fn has(&self, key: &str) -> bool {
        self.switches.iter().any(|s| s == key)
    }

    fn require(&self, key: &str) -> Result<&str, String> {
        self.get(key).ok_or_else(|| format!("missing required flag --{key}"))
    }
}

const SWITCHES: &[&str] = &["gnuplot", "trace", "dump-trajectory", "quick", "help"];

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut values: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut switches = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        let Some(key) = arg.strip_prefix("--") else {
            return Err(format!("unexpected positional argument '{arg}'"));
        };
        if SWITCHES.contains(&key) {
            switches.push(key.to_string());
            i += 1;
            continue;
        }
        let value = args.get(i + 1).ok_or_else(|| format!("flag --{key} needs a value"))?;
        values.entry(key.to_string()).or_default().push(value.clone());
        i += 2;
    }
    Ok(Flags { values, switches })
}

fn parse_complex_pair(text: &str, what: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("{what}: expected re,im but got '{text}'"));
    }
    let re: f64 = parts[0].trim().parse().map_err(|_| format!("{what}: bad number '{}'", parts[0]))?;
    let im: f64 = parts[1].trim().parse().map_err(|_| format!("{what}: bad number '{}'", parts[1]))?;
    Ok(Complex64::new(re, im))
}

fn parse_side(text: &str) -> Result<Side, String> {
    match text {
        "plus" => Ok(Side::Plus),
        "minus" => Ok(Side::Minus),
        "zero" => Ok(Side::Zero),
        other => Err(format!("unknown side '{other}' (expected plus, minus, or zero)")),
    }
}

fn common_setup(flags: &Flags) -> Result<(Tolerances, PathBuf, u64), String> {
    let tol = Tolerances::from_env().map_err(|e| e.to_string())?;
    let out = PathBuf::from(flags.get("out").unwrap_or("."));
    std::fs::create_dir_all(&out).map_err(|e| format!("cannot create output dir: {e}"))?;
    if let Some(jobs) = flags.get("jobs") {
        let n: usize = jobs.parse().map_err(|_| format!("bad --jobs value '{jobs}'"))?;
        crate::par::set_jobs(n);
    } else {
        crate::par::set_jobs(1);
    }
    let seed: u64 = match flags.get("seed") {
        Some(s) => s.parse().map_err(|_| format!("bad --seed value '{s}'"))?,
        None => 0,
    };
    Ok((tol, out, seed))
}

/// Run the CLI; `args` is the full argv.
pub fn run(args: &[String]) -> i32 {
    if args.len() < 2 || args[1] == "--help" || args[1] == "help" {
        print_usage();
        return if args.len() < 2 { EXIT_INPUT } else { EXIT_OK };
    }
    let sub = args[1].as_str();
    let rest = &args[2..];
    match sub {
        "absspec" => cmd_absspec(rest),
        "count" => cmd_count(rest),
        "problems" => cmd_problems(rest),
        "selftest" => cmd_selftest(rest),
        other => {
            eprintln!("unknown subcommand '{other}'");
            print_usage();
            EXIT_INPUT
        }
    }
}

fn print_usage() {
    println!(
        "absspec: spectra of linear ODE systems on truncated intervals

USAGE:
  absspec absspec  --problem SPEC --side plus|minus|zero --domain re0,re1,im0,im1 --res N
                   [--out DIR] [--gnuplot] [--jobs N] [--seed S]
  absspec count    --problem SPEC --lambda-c re,im --delta D --ell L [--ell L ...]
                   [--bc separated|periodic|gamma=TURNS] [--ncap N] [--trace]
                   [--dump-trajectory] [--out DIR] [--gnuplot] [--jobs N] [--seed S]
  absspec problems list
  absspec selftest [--quick] [--seed S] [--inject-fault NAME]

PROBLEM SPECS:
  builtin:NAME[,key=value...]   e.g. builtin:adv-diff,c=2
  PATH                          a problem file (JSON)

Set ABSSPEC_TOL_FILE to a JSON file to override numerical tolerances."
    );
}

fn fail_input(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_INPUT
}

fn fail_error(err: &Error) -> i32 {
    eprintln!("error: {err}");
    if let Error::Contour { log, .. } = err {
        for line in log {
            eprintln!("  {line}");
        }
    }
    exit_code_for(err)
}

// ---------------------------------------------------------------------------
// absspec: locus tracing
// ---------------------------------------------------------------------------

fn cmd_absspec(args: &[String]) -> i32 {
    let flags = match parse_flags(args) {
        Ok(f) => f,
        Err(m) => return fail_input(&m),
    };
    if flags.has("help") {
        print_usage();
        return EXIT_OK;
    }
    let started = Instant::now();
    let inner = || -> Result<(PathBuf, RunManifest), (i32, String)> {
        let (tol, out, seed) = common_setup(&flags).map_err(|m| (EXIT_INPUT, m))?;
        let spec = flags.require("problem").map_err(|m| (EXIT_INPUT, m))?;
        let side = parse_side(flags.require("side").map_err(|m| (EXIT_INPUT, m))?)
            .map_err(|m| (EXIT_INPUT, m))?;
        let domain_text = flags.require("domain").map_err(|m| (EXIT_INPUT, m))?;
        let parts: Vec<f64> = domain_text
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| (EXIT_INPUT, format!("bad --domain '{domain_text}'")))?;
        if parts.len() != 4 {
            return Err((EXIT_INPUT, format!("--domain needs re0,re1,im0,im1, got '{domain_text}'")));
        }
        let res: usize = flags
            .require("res")
            .map_err(|m| (EXIT_INPUT, m))?
            .parse()
            .map_err(|_| (EXIT_INPUT, "bad --res value".to_string()))?;
        let (profile, boundary, _) =
            load_spec(spec, &tol).map_err(|e| (exit_code_for(&e), e.to_string()))?;
        let domain = ParameterDomain::rect(parts[0], parts[1], parts[2], parts[3], res)
            .map_err(|e| (EXIT_INPUT, e.to_string()))?;
        let locus = spectra::trace_locus(&profile, &boundary, side, &domain, &tol)
            .map_err(|e| (exit_code_for(&e), e.to_string()))?;
        let csv = spectra::locus_csv(&locus);
        let csv_path = out.join("absspec-locus.csv");
        std::fs::write(&csv_path, &csv).map_err(|e| (EXIT_INPUT, e.to_string()))?;

        let mut manifest =
            RunManifest::new("absspec", &profile.name, problem_hash(&profile, &boundary), &tol);
        manifest.seed = seed;
        manifest.param("problem", spec);
        manifest.param("side", format!("{side:?}"));
        manifest.param("domain", parts);
        manifest.param("res", res);
        manifest.param("vertices", locus.vertex_count());
        manifest.record_output(&csv_path, "absspec.locus.v1");
        if flags.has("gnuplot") {
            let gp = out.join("absspec-locus.gp");
            let script = format!(
                "set datafile separator ','\nset xlabel 're(lambda)'\nset ylabel 'im(lambda)'\n\
                 plot '{}' using 1:2 with points pt 7 ps 0.5 title 'locus'\npause -1\n",
                csv_path.display()
            );
            std::fs::write(&gp, script).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            manifest.record_output(&gp, "gnuplot");
        }
        Ok((out, manifest))
    };
    match inner() {
        Ok((out, mut manifest)) => {
            manifest.timing_seconds = started.elapsed().as_secs_f64();
            match manifest.write(&out) {
                Ok(path) => {
                    println!("wrote {}", path.display());
                    EXIT_OK
                }
                Err(e) => fail_error(&e),
            }
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

// ---------------------------------------------------------------------------
// count: eigenvalue counting
// ---------------------------------------------------------------------------

enum BoundaryMode {
    Separated,
    Twisted(Complex64),
}

fn parse_bc(text: &str) -> Result<BoundaryMode, String> {
    if text == "separated" {
        return Ok(BoundaryMode::Separated);
    }
    if text == "periodic" {
        return Ok(BoundaryMode::Twisted(Complex64::new(1.0, 0.0)));
    }
    if let Some(turns) = text.strip_prefix("gamma=") {
        let t: f64 = turns.parse().map_err(|_| format!("bad gamma turns '{turns}'"))?;
        let theta = 2.0 * std::f64::consts::PI * t;
        return Ok(BoundaryMode::Twisted(Complex64::new(0.0, theta).exp()));
    }
    Err(format!("unknown --bc '{text}' (expected separated, periodic, or gamma=TURNS)"))
}

fn cmd_count(args: &[String]) -> i32 {
    let flags = match parse_flags(args) {
        Ok(f) => f,
        Err(m) => return fail_input(&m),
    };
    if flags.has("help") {
        print_usage();
        return EXIT_OK;
    }
    let started = Instant::now();
    let inner = || -> Result<(PathBuf, RunManifest), (i32, String)> {
        let (tol, out, seed) = common_setup(&flags).map_err(|m| (EXIT_INPUT, m))?;
        let spec = flags.require("problem").map_err(|m| (EXIT_INPUT, m))?;
        let center = parse_complex_pair(
            flags.require("lambda-c").map_err(|m| (EXIT_INPUT, m))?,
            "--lambda-c",
        )
        .map_err(|m| (EXIT_INPUT, m))?;
        let delta: f64 = flags
            .require("delta")
            .map_err(|m| (EXIT_INPUT, m))?
            .parse()
            .map_err(|_| (EXIT_INPUT, "bad --delta value".to_string()))?;
        let ells: Vec<f64> = flags
            .get_all("ell")
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| (EXIT_INPUT, "bad --ell value".to_string()))?;
        if ells.is_empty() {
            return Err((EXIT_INPUT, "at least one --ell is required".to_string()));
        }
        let bc = parse_bc(flags.get("bc").unwrap_or("separated")).map_err(|m| (EXIT_INPUT, m))?;
        let n_cap: i64 = flags
            .get("ncap")
            .map(|s| s.parse::<i64>())
            .transpose()
            .map_err(|_| (EXIT_INPUT, "bad --ncap value".to_string()))?
            .unwrap_or(3);
        let (profile, boundary, builtin) =
            load_spec(spec, &tol).map_err(|e| (exit_code_for(&e), e.to_string()))?;

        let mut manifest =
            RunManifest::new("count", &profile.name, problem_hash(&profile, &boundary), &tol);
        manifest.seed = seed;
        manifest.param("problem", spec);
        manifest.param("lambda_c", [center.re, center.im]);
        manifest.param("delta", delta);
        manifest.param("ell", &ells);

        match bc {
            BoundaryMode::Separated => {
                let side =
                    builtin.as_ref().map(|b| b.side).unwrap_or(crate::spectra::Side::Plus);
                let table = counting::accumulation_experiment(
                    &profile, &boundary, side, center, delta, &ells, &tol,
                )
                .map_err(|e| (exit_code_for(&e), e.to_string()))?;
                let csv_path = out.join("count-counts.csv");
                std::fs::write(&csv_path, counting::accumulation_csv(&table))
                    .map_err(|e| (EXIT_INPUT, e.to_string()))?;
                manifest.param("slope", table.slope);
                manifest.param("certified", format!("{:?}", table.certified));
                manifest.record_output(&csv_path, "absspec.counts.v1");
                for row in &table.rows {
                    println!("ell = {:10.4}  count = {}", row.ell, row.count);
                }

                if flags.has("trace") {
                    let disk = ParameterDomain::disk(center, delta, 48)
                        .map_err(|e| (EXIT_INPUT, e.to_string()))?;
                    let locus = spectra::trace_locus(&profile, &boundary, side, &disk, &tol)
                        .map_err(|e| (exit_code_for(&e), e.to_string()))?;
                    let segment: Vec<Complex64> = locus
                        .polylines
                        .iter()
                        .max_by_key(|p| p.len())
                        .map(|p| {
                            p.iter()
                                .map(|v| v.lambda)
                                .filter(|l| (l - center).norm() <= delta)
                                .collect()
                        })
                        .unwrap_or_default();
                    if segment.len() < 2 {
                        return Err((
                            EXIT_INPUT,
                            "no locus arc inside the disk to trace".to_string(),
                        ));
                    }
                    let ell_max = ells.iter().cloned().fold(f64::MIN, f64::max);
                    let trace = counting::covering_trace(
                        &profile, &boundary, ell_max, &segment, None, &tol,
                    )
                    .map_err(|e| (exit_code_for(&e), e.to_string()))?;
                    let trace_path = out.join("count-trace.csv");
                    std::fs::write(&trace_path, counting::trace_csv(&trace))
                        .map_err(|e| (EXIT_INPUT, e.to_string()))?;
                    manifest.param("turn_count", trace.turn_count);
                    manifest.record_output(&trace_path, "absspec.trace.v1");
                    println!("turn count = {:.3}", trace.turn_count);
                }
            }
            BoundaryMode::Twisted(gamma) => {
                if flags.has("trace") {
                    return Err((
                        EXIT_INPUT,
                        "--trace requires separated boundary conditions".to_string(),
                    ));
                }
                let doubled = periodic::double_system(&profile, gamma)
                    .map_err(|e| (exit_code_for(&e), e.to_string()))?;
                manifest.param("gamma", [gamma.re, gamma.im]);
                let mut rows = Vec::new();
                for &ell in &ells {
                    let r = periodic::periodic_count(&doubled, ell, center, delta, &tol)
                        .map_err(|e| (exit_code_for(&e), e.to_string()))?;
                    println!(
                        "ell = {:10.4}  count = {}  (monodromy crosscheck: {})",
                        ell,
                        r.report.winding,
                        match r.monodromy_winding {
                            Some(w) => format!("{w}"),
                            None => "skipped".to_string(),
                        }
                    );
                    rows.push((ell, r.report.winding));
                }
                let mut csv = String::from("# schema: absspec.counts.v1\nell,ell_bar,count\n");
                for &(ell, count) in &rows {
                    csv.push_str(&format!(
                        "{:.16e},{:.16e},{}\n",
                        ell,
                        ell - profile.ell0,
                        count
                    ));
                }
                let csv_path = out.join("count-counts.csv");
                std::fs::write(&csv_path, csv).map_err(|e| (EXIT_INPUT, e.to_string()))?;
                manifest.record_output(&csv_path, "absspec.counts.v1");

                if ells.len() >= 4 {
                    let reports = periodic::extrapolated_set_probe(
                        &doubled,
                        &[center],
                        delta,
                        &ells,
                        n_cap,
                        &tol,
                    )
                    .map_err(|e| (exit_code_for(&e), e.to_string()))?;
                    let mut csv =
                        String::from("# schema: absspec.class.v1\nre_lambda,im_lambda,ell,count,class\n");
                    for rep in &reports {
                        for &(ell, count) in &rep.counts {
                            csv.push_str(&format!(
                                "{:.16e},{:.16e},{:.16e},{},{:?}\n",
                                rep.lambda.re, rep.lambda.im, ell, count, rep.class
                            ));
                        }
                        println!("classification at {} = {:?}", rep.lambda, rep.class);
                    }
                    let class_path = out.join("count-classification.csv");
                    std::fs::write(&class_path, csv).map_err(|e| (EXIT_INPUT, e.to_string()))?;
                    manifest.record_output(&class_path, "absspec.class.v1");
                }
            }
        }

        if flags.has("dump-trajectory") {
            let ell_max = ells.iter().cloned().fold(f64::MIN, f64::max);
            let prop = crate::flow::Propagator::new(&profile, center, &tol)
                .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            let record =
                crate::flow::record_trajectory(&prop, -ell_max, ell_max, &boundary.left, 64)
                    .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            let mut csv = String::from("# schema: absspec.trajectory.v1\n");
            let n = profile.dim;
            let k = boundary.i_minus();
            let m = record.samples[0].pluecker.len();
            csv.push_str("x");
            for j in 0..k {
                for i in 0..n {
                    csv.push_str(&format!(",re_f{i}{j},im_f{i}{j}"));
                }
            }
            for i in 0..m {
                csv.push_str(&format!(",re_p{i},im_p{i}"));
            }
            csv.push_str(",log_scale_subspace,log_scale_pluecker\n");
            for s in &record.samples {
                csv.push_str(&format!("{:.16e}", s.x));
                for j in 0..k {
                    for i in 0..n {
                        let z = s.subspace.frame()[(i, j)];
                        csv.push_str(&format!(",{:.16e},{:.16e}", z.re, z.im));
                    }
                }
                for i in 0..m {
                    let z = s.pluecker.coords()[i];
                    csv.push_str(&format!(",{:.16e},{:.16e}", z.re, z.im));
                }
                csv.push_str(&format!(
                    ",{:.16e},{:.16e}\n",
                    s.log_scale_subspace, s.log_scale_pluecker
                ));
            }
            let traj_path = out.join("count-trajectory.csv");
            std::fs::write(&traj_path, csv).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            manifest.record_output(&traj_path, "absspec.trajectory.v1");
        }

        if flags.has("gnuplot") {
            let gp = out.join("count-counts.gp");
            let script = format!(
                "set datafile separator ','\nset xlabel 'ell'\nset ylabel 'count'\n\
                 plot '{}' using 1:3 with linespoints title 'eigenvalues in disk'\npause -1\n",
                out.join("count-counts.csv").display()
            );
            std::fs::write(&gp, script).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            manifest.record_output(&gp, "gnuplot");
        }
        Ok((out, manifest))
    };
    match inner() {
        Ok((out, mut manifest)) => {
            manifest.timing_seconds = started.elapsed().as_secs_f64();
            match manifest.write(&out) {
                Ok(path) => {
                    println!("wrote {}", path.display());
                    EXIT_OK
                }
                Err(e) => fail_error(&e),
            }
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

// ---------------------------------------------------------------------------
// problems / selftest
// ---------------------------------------------------------------------------

fn cmd_problems(args: &[String]) -> i32 {
    if args.first().map(|s| s.as_str()) != Some("list") {
        return fail_input("usage: absspec problems list");
    }
    println!("built-in problems:");
    for (name, desc) in catalog() {
        println!("  {name:<22} {desc}");
    }
    EXIT_OK
}

fn cmd_selftest(args: &[String]) -> i32 {
    let flags = match parse_flags(args) {
        Ok(f) => f,
        Err(m) => return fail_input(&m),
    };
    let tol = match Tolerances::from_env() {
        Ok(t) => t,
        Err(e) => return fail_error(&e),
    };
    let seed: u64 = match flags.get("seed") {
        Some(s) => match s.parse() {
            Ok(v) => v,
            Err(_) => return fail_input(&format!("bad --seed value '{s}'")),
        },
        None => 0xA11CE,
    };
    let fault = match flags.get("inject-fault") {
        None => selftest::Fault::None,
        Some("compound-entry") => selftest::Fault::CompoundEntry,
        Some(other) => return fail_input(&format!("unknown fault '{other}'")),
    };
    let started = Instant::now();
    let report = selftest::run(flags.has("quick"), seed, fault, &tol);
    print!("{}", report.table());
    println!("elapsed: {:.2} s", started.elapsed().as_secs_f64());
    if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_SELFTEST
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_parsing() {
        let args: Vec<String> =
            ["--problem", "builtin:adv-diff", "--ell", "1", "--ell", "2", "--gnuplot"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        let f = parse_flags(&args).unwrap();
        assert_eq!(f.get("problem"), Some("builtin:adv-diff"));
        assert_eq!(f.get_all("ell"), vec!["1", "2"]);
        assert!(f.has("gnuplot"));
        assert!(parse_flags(&["positional".to_string()]).is_err());
    }

    #[test]
    fn bc_parsing() {
        assert!(matches!(parse_bc("separated"), Ok(BoundaryMode::Separated)));
        match parse_bc("gamma=0.5") {
            Ok(BoundaryMode::Twisted(g)) => assert!((g - Complex64::new(-1.0, 0.0)).norm() < 1e-12),
            other => panic!("expected antiperiodic, got {:?}", other.is_ok()),
        }
        assert!(parse_bc("nonsense").is_err());
    }

    #[test]
    fn side_parsing() {
        assert!(matches!(parse_side("plus"), Ok(Side::Plus)));
        assert!(parse_side("up").is_err());
    }
}

impl std::fmt::Debug for BoundaryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryMode::Separated => write!(f, "Separated"),
            BoundaryMode::Twisted(g) => write!(f, "Twisted({g})"),
        }
    }
}
