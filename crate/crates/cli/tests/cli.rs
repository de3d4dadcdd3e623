use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mmslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmslab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", &path]);
    let o = mmslab(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_and_exact_variance() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "p.json", &["two_point", "d=2", "p=0.5"]);
    let o = mmslab(&["invariant", &p, "--kind", "var", "--exact"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["value"], 1.0);
    assert_eq!(v["certificate"], "exact");
}

#[test]
fn invariant_csv_has_header_and_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "p.json", &["two_point", "d=3", "p=0.25"]);
    let o = mmslab(&["--format", "csv", "invariant", &p, "--kind", "sep", "--kappa", "0.2,0.2"]);
    assert_eq!(stdout(&o), "invariant,parameter,value,certificate\nseparation,kappa=0.2;0.2,3,exact\n");
}

#[test]
fn infinite_separation_prints_inf() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "p.json", &["two_point", "d=1", "p=0.5"]);
    let o = mmslab(&["invariant", &p, "--kind", "sep", "--kappa", "0.5"]);
    assert_eq!(json(&o)["value"], "inf");
}

#[test]
fn box_exact_identical_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "p.json", &["two_point", "d=2", "p=0.5"]);
    let v = json(&mmslab(&["box", &p, &p, "--exact"]));
    assert_eq!(v["lower"], 0.0);
    assert_eq!(v["upper"], 0.0);
    assert_eq!(v["certificate"], "exact");
}

#[test]
fn box_exact_size_limit_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.json", &["interval_grid", "m=5"]);
    let o = mmslab(&["box", &a, &a, "--exact"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn dominates_one_way() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "p.json", &["two_point", "d=1", "p=0.5"]);
    let one = write(dir.path(), "one.json", r#"{"points":["o"],"dist":[[0]],"mass":[1]}"#);
    let yes = json(&mmslab(&["dominates", &p, &one]));
    assert_eq!(yes["map"], serde_json::json!([0, 0]));
    let no = json(&mmslab(&["dominates", &one, &p]));
    assert_eq!(no["result"], "refused");
}

#[test]
fn atoms_subcommands() {
    let v = json(&mmslab(&["atoms", "product", "0.5,0.5", "0.5,0.25"]));
    assert_eq!(v["entries"], serde_json::json!([0.25, 0.25, 0.125, 0.125]));
    let v = json(&mmslab(&["atoms", "contract", "0.5,0.25,0.25", "0.5,0.5"]));
    assert_eq!(v["contraction"], true);
    let v = json(&mmslab(&["atoms", "contract", "0.5,0.5", "0.7,0.3"]));
    assert_eq!(v["contraction"], false);
    let v = json(&mmslab(&["atoms", "product", r#"{"entries":[0.5,0.5]}"#, "1"]));
    assert_eq!(v["entries"], serde_json::json!([0.5, 0.5]));
}

#[test]
fn atoms_member_and_dissipate() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "p.json", &["two_point", "d=1", "p=0.5"]);
    let v = json(&mmslab(&["atoms", "member", &p, "0.5,0.4,0.1"]));
    assert_eq!(v["member"], true);
    let v = json(&mmslab(&["atoms", "member", &p, "0.4,0.4,0.2"]));
    assert_eq!(v["member"], false);
    let v = json(&mmslab(&["atoms", "dissipate", "0.5,0.25,0.25", "--delta", "1", "--steps", "4"]));
    assert_eq!(v["accepted"], true);
}

#[test]
fn bad_atoms_are_input_errors() {
    let o = mmslab(&["atoms", "product", "0.9,0.9", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectral_table() {
    let o = mmslab(&["--format", "csv", "spectral", "--space", "interval", "--size", "128"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "intervals,c22");
    assert_eq!(lines.len(), 3);
    let last: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((last - 1.0 / std::f64::consts::PI).abs() < 1e-3);
}

#[test]
fn compare_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "p.json", &["two_point", "d=2", "p=0.25"]);
    let v = json(&mmslab(&["compare", &p, &p]));
    assert_eq!(v["box_upper"], 0.0);
    assert_eq!(v["box_certificate"], "exact");
    assert_eq!(v["a_dominates_b"], true);
    assert_eq!(v["b_dominates_a"], true);
}

#[test]
fn run_empty_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write(dir.path(), "plan.json", r#"{"name":"e","seed":7,"output":{"csv":"out.csv"}}"#);
    let o = mmslab(&["--format", "csv", "run", &plan]);
    assert!(o.status.success());
    let header = "space,invariant,parameter,value,certificate\n";
    assert_eq!(stdout(&o), header);
    assert_eq!(std::fs::read_to_string(dir.path().join("out.csv")).unwrap(), header);
}

#[test]
fn run_failing_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write(
        dir.path(),
        "plan.json",
        r#"{"name":"f","seed":1,
            "spaces":[{"name":"P","generator":{"kind":"two_point","d":2.0,"p":0.5}}],
            "invariants":[{"id":"v","space":"P","invariant":"variance","mode":"exact"}],
            "assertions":[{"lhs":"v","op":"close","rhs":0.9}]}"#,
    );
    let o = mmslab(&["run", &plan]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("v close 0.9"));
    let o = mmslab(&["--tol", "0.2", "run", &plan]);
    assert!(o.status.success());
}

#[test]
fn run_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write(
        dir.path(),
        "plan.json",
        r#"{"name":"d","seed":3,
            "spaces":[{"name":"G","generator":{"kind":"gaussian_sample","n_points":40,"dim":2,"seed":3}},
                      {"name":"I","generator":{"kind":"interval_grid","m":6}}],
            "invariants":[{"space":"G","invariant":"variance"},
                          {"space":"G","invariant":"obs_diam","kappa":0.2},
                          {"space":"I","invariant":"variance","mode":"exact"},
                          {"space":"I","invariant":"separation","kappa":[0.3,0.3]}]}"#,
    );
    let a = mmslab(&["--format", "csv", "run", &plan]);
    let b = mmslab(&["--format", "csv", "--threads", "3", "run", &plan]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 5);
}

#[test]
fn bundled_plan_needs_seed() {
    let o = mmslab(&["run", "--bundled", "cube_vs_gaussian"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mmslab(&["run", "--bundled", "nonexistent", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bundled_cube_vs_gaussian_passes() {
    let o = mmslab(&["--format", "csv", "run", "--bundled", "cube_vs_gaussian", "--seed", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_file_is_input_error() {
    let o = mmslab(&["invariant", "/nonexistent/space.json", "--kind", "diam"]);
    assert_eq!(o.status.code(), Some(2));
}
