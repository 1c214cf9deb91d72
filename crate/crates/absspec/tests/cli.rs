//! End-to-end tests of the `absspec` binary: exit codes, CSV outputs, and
//! run manifests.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_absspec"))
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("absspec_cli_{name}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|_| panic!("missing {}", path.display()))
}

#[test]
fn locus_subcommand_writes_csv_and_manifest() {
    let dir = temp_dir("locus");
    let status = bin()
        .args([
            "absspec",
            "--problem",
            "builtin:adv-diff,c=2",
            "--side",
            "plus",
            "--domain",
            "-4,1,-1,1",
            "--res",
            "64",
            "--out",
        ])
        .arg(&dir)
        .arg("--gnuplot")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(&dir.join("absspec-locus.csv"));
    assert!(csv.starts_with("# schema: absspec.locus.v1\n"));
    assert!(csv.lines().count() > 10);
    let manifest = read(&dir.join("absspec-manifest.json"));
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["subcommand"], "absspec");
    assert!(v["parameters"]["vertices"].as_u64().unwrap() > 10);
    assert!(dir.join("absspec-locus.gp").exists());
}

#[test]
fn empty_locus_exits_zero_with_header_only_csv() {
    let dir = temp_dir("empty");
    let status = bin()
        .args([
            "absspec",
            "--problem",
            "builtin:adv-diff,c=2",
            "--side",
            "plus",
            "--domain",
            "0,1,-0.4,0.4",
            "--res",
            "16",
            "--out",
        ])
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(&dir.join("absspec-locus.csv"));
    assert_eq!(csv.lines().count(), 2, "expected only schema + header lines");
}

#[test]
fn malformed_domain_exits_two() {
    let dir = temp_dir("badflag");
    let status = bin()
        .args([
            "absspec",
            "--problem",
            "builtin:adv-diff,c=2",
            "--side",
            "plus",
            "--domain",
            "nonsense",
            "--res",
            "16",
            "--out",
        ])
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_builtin_exits_two() {
    let status = bin()
        .args([
            "count",
            "--problem",
            "builtin:no-such-problem",
            "--lambda-c",
            "-1,0",
            "--delta",
            "0.5",
            "--ell",
            "5",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn count_separated_matches_direct_run() {
    let dir = temp_dir("count");
    let out = bin()
        .args([
            "count",
            "--problem",
            "builtin:adv-diff,c=0",
            "--lambda-c",
            "-1,0",
            "--delta",
            "0.5",
            "--ell",
            "12.566370614359172",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = read(&dir.join("count-counts.csv"));
    let last = csv.lines().last().unwrap();
    assert!(last.ends_with(",4"), "expected 4 eigenvalues at ell = 4 pi, got line '{last}'");
}

#[test]
fn count_periodic_emits_classification() {
    let dir = temp_dir("periodic");
    let status = bin()
        .args([
            "count",
            "--problem",
            "builtin:periodic-adv-diff,c=1",
            "--lambda-c",
            "-1,1",
            "--delta",
            "0.3",
            "--bc",
            "periodic",
            "--ncap",
            "2",
            "--ell",
            "10",
            "--ell",
            "20",
            "--ell",
            "30",
            "--ell",
            "40",
            "--out",
        ])
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let class = read(&dir.join("count-classification.csv"));
    assert!(class.starts_with("# schema: absspec.class.v1\n"));
    assert!(class.lines().last().unwrap().ends_with("In"));
}

#[test]
fn gamma_in_turns_accepted() {
    let dir = temp_dir("gamma");
    let status = bin()
        .args([
            "count",
            "--problem",
            "builtin:periodic-adv-diff,c=0",
            "--lambda-c",
            "-1,0",
            "--delta",
            "0.45",
            "--bc",
            "gamma=0.5",
            "--ell",
            "10",
            "--out",
        ])
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn forced_zero_determinant_exits_three() {
    // U_- = U_+ = an invariant axis of a constant diagonal system: the
    // boundary determinant vanishes identically, so every contour hits
    // zeros and radius perturbation cannot help.
    let dir = temp_dir("contour");
    let problem = r#"{
  "name": "forced-intersection",
  "N": 2,
  "ell0": 1.0,
  "kind": "separated-asymptotic",
  "A_minus": [["1","0"],["0","-1"]],
  "A_plus": [["1","0"],["0","-1"]],
  "middle": [["1","0"],["0","-1"]],
  "U_minus": [[[1,0],[0,0]]],
  "U_plus": [[[1,0],[0,0]]],
  "domain": {"re": [-10, 10], "im": [-10, 10], "resolution": 8}
}"#;
    let path = dir.join("forced.json");
    std::fs::write(&path, problem).unwrap();
    let out = bin()
        .args(["count", "--problem"])
        .arg(&path)
        .args(["--lambda-c", "0,0", "--delta", "0.5", "--ell", "3", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("contour"), "stderr: {stderr}");
}

#[test]
fn problem_file_round_trip_through_cli() {
    let dir = temp_dir("file");
    let problem = r#"{
  "name": "scalar-advection",
  "N": 2,
  "ell0": 1.0,
  "kind": "separated-asymptotic",
  "constants": {"c": 2.0},
  "A_minus": [["0","1"],["lambda","-c"]],
  "A_plus": [["0","1"],["lambda","-c"]],
  "middle": [["0","1"],["lambda","-c"]],
  "U_minus": [[[0,0],[1,0]]],
  "U_plus": [[[0,0],[1,0]]],
  "domain": {"re": [-20, 5], "im": [-5, 5], "resolution": 16}
}"#;
    let path = dir.join("adv.json");
    std::fs::write(&path, problem).unwrap();
    let status = bin()
        .args(["absspec", "--problem"])
        .arg(&path)
        .args(["--side", "plus", "--domain", "-4,1,-1,1", "--res", "32", "--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(&dir.join("absspec-locus.csv"));
    assert!(csv.lines().count() > 5);
}

#[test]
fn schema_violation_reports_position_and_exits_two() {
    let dir = temp_dir("schema");
    let path = dir.join("bad.json");
    std::fs::write(&path, "{\n  \"name\": 3,\n}").unwrap();
    let out = bin()
        .args(["absspec", "--problem"])
        .arg(&path)
        .args(["--side", "plus", "--domain", "-1,1,-1,1", "--res", "16"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":2:") || stderr.contains("line"), "stderr: {stderr}");
}

#[test]
fn selftest_quick_passes_and_fault_fails() {
    let status = bin().args(["selftest", "--quick"]).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let status =
        bin().args(["selftest", "--quick", "--inject-fault", "compound-entry"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn problems_list_prints_catalog() {
    let out = bin().args(["problems", "list"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in ["adv-diff", "adv-diff-front", "two-component", "periodic-adv-diff"] {
        assert!(stdout.contains(name));
    }
}

#[test]
fn manifest_reruns_bit_identically() {
    let dir_a = temp_dir("repro_a");
    let dir_b = temp_dir("repro_b");
    for dir in [&dir_a, &dir_b] {
        let status = bin()
            .args([
                "absspec",
                "--problem",
                "builtin:adv-diff,c=2",
                "--side",
                "plus",
                "--domain",
                "-3,0,-1,1",
                "--res",
                "24",
                "--jobs",
                "1",
                "--out",
            ])
            .arg(dir)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = read(&dir_a.join("absspec-locus.csv"));
    let b = read(&dir_b.join("absspec-locus.csv"));
    assert_eq!(a, b, "sequential reruns must be bit-identical");
}

#[test]
fn tolerance_override_env_is_recorded() {
    let dir = temp_dir("tolenv");
    let tolfile = dir.join("tol.json");
    std::fs::write(&tolfile, r#"{"contour_start": 32}"#).unwrap();
    let status = bin()
        .args([
            "count",
            "--problem",
            "builtin:adv-diff,c=0",
            "--lambda-c",
            "1,0",
            "--delta",
            "0.2",
            "--ell",
            "4",
            "--out",
        ])
        .arg(&dir)
        .env("ABSSPEC_TOL_FILE", &tolfile)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let manifest = read(&dir.join("count-manifest.json"));
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["tolerances"]["contour_start"], 32);
}

#[test]
fn trajectory_dump_written() {
    let dir = temp_dir("traj");
    let status = bin()
        .args([
            "count",
            "--problem",
            "builtin:adv-diff,c=0",
            "--lambda-c",
            "-1,0",
            "--delta",
            "0.5",
            "--ell",
            "6",
            "--dump-trajectory",
            "--out",
        ])
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(&dir.join("count-trajectory.csv"));
    assert!(csv.starts_with("# schema: absspec.trajectory.v1\n"));
    assert_eq!(csv.lines().count(), 2 + 65);
}
