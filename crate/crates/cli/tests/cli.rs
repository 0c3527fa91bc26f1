use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pssc_core::Polyhedron;
use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.toml"))
}

fn pssc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pssc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = pssc(args);
    assert!(
        out.status.success(),
        "pssc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(name: &Path, out: &Path, extra: &[&str]) {
    let mut args = vec!["simulate", "--scenario", s(name), "--out", s(out)];
    args.extend_from_slice(extra);
    run_ok(&args);
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn metrics_validator() -> jsonschema::Validator {
    let schema = json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/metrics.schema.json"));
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_valid(validator: &jsonschema::Validator, doc: &Value) {
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn fig2_writes_one_row_per_cycle() {
    let dir = tempdir();
    let out = dir.path().join("run");
    simulate(&scenario("fig2"), &out, &[]);
    let csv = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 80);
    assert!(csv.starts_with("k,x1,x2,x3,x4,x1_est,"));
    let metrics = json(&out.join("metrics.json"));
    assert_valid(&metrics_validator(), &metrics);
    assert_eq!(metrics["cycles"], 80);
    assert!(fs::read_to_string(out.join("metrics.txt"))
        .unwrap()
        .contains("IMEP"));
    assert!(out.join("scenario.resolved.toml").exists());
}

#[test]
fn echo_reproduces_the_run_bitwise() {
    let dir = tempdir();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    simulate(&scenario("fig5"), &first, &["--seed", "11"]);
    simulate(&first.join("scenario.resolved.toml"), &second, &[]);
    let a = fs::read(first.join("trace.csv")).unwrap();
    let b = fs::read(second.join("trace.csv")).unwrap();
    assert!(a == b, "echoed scenario produced a different trace");
    assert_eq!(
        fs::read_to_string(first.join("scenario.resolved.toml")).unwrap(),
        fs::read_to_string(second.join("scenario.resolved.toml")).unwrap()
    );
}

#[test]
fn missing_file_is_an_io_error_naming_the_path() {
    let dir = tempdir();
    let missing = dir.path().join("no-such-scenario.toml");
    let out = pssc(&[
        "simulate",
        "--scenario",
        s(&missing),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("no-such-scenario.toml"));
}

#[test]
fn unstable_beta_is_rejected_before_running() {
    let dir = tempdir();
    let text = fs::read_to_string(scenario("scalar")).unwrap() + "\n[sliding]\nbeta = [[1.0]]\n";
    let path = dir.path().join("bad.toml");
    fs::write(&path, text).unwrap();
    let out_dir = dir.path().join("o");
    let out = pssc(&["simulate", "--scenario", s(&path), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sliding.beta"), "{}", stderr(&out));
    assert!(!out_dir.exists());
}

#[test]
fn every_schema_violation_is_listed() {
    let dir = tempdir();
    let path = dir.path().join("bad.toml");
    fs::write(
        &path,
        "cycles = 10\nhorizon = 5\n[pssc]\nlambda = 1.0\n[reference]\nbreakpoints = []\n",
    )
    .unwrap();
    let out = pssc(&[
        "simulate",
        "--scenario",
        s(&path),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("horizon: unknown key"), "{err}");
    assert!(err.contains("pssc.lambda: unknown key"), "{err}");
}

#[test]
fn controller_override_is_applied_and_echoed() {
    let dir = tempdir();
    let out = dir.path().join("run");
    simulate(&scenario("fig2"), &out, &["--controller", "dsmc"]);
    assert_eq!(json(&out.join("metrics.json"))["controller"], "dsmc");
    let echo = fs::read_to_string(out.join("scenario.resolved.toml")).unwrap();
    assert!(echo.contains("controller = \"dsmc\""));
}

#[test]
fn fig3_compare_shows_dsmc_saturating() {
    let dir = tempdir();
    let out = dir.path().join("cmp");
    run_ok(&[
        "compare",
        "--scenario",
        s(&scenario("fig3")),
        "--out",
        s(&out),
    ]);
    let report = json(&out.join("comparison.json"));
    let validator = metrics_validator();
    let runs = report["runs"].as_array().unwrap();
    for run in runs {
        assert_valid(&validator, run);
    }
    assert_eq!(runs[0]["controller"], "pssc");
    assert_eq!(runs[1]["controller"], "dsmc");
    assert_eq!(runs[0]["saturation_cycles"], 0);
    assert!(runs[1]["saturation_cycles"].as_u64().unwrap() > 0);
    let table = fs::read_to_string(out.join("comparison.txt")).unwrap();
    for row in [
        "saturation cycles",
        "IMEP overshoot",
        "IMEP steady-state error",
        "CA50 mean |error|",
    ] {
        assert!(table.contains(row), "{row} missing from\n{table}");
    }
    assert!(out.join("pssc/trace.csv").exists() && out.join("dsmc/trace.csv").exists());
}

#[test]
fn identical_controllers_give_identical_columns() {
    let dir = tempdir();
    let out = dir.path().join("cmp");
    run_ok(&[
        "compare",
        "--scenario",
        s(&scenario("fig2")),
        "--out",
        s(&out),
        "--left",
        "pssc",
        "--right",
        "pssc",
    ]);
    let report = json(&out.join("comparison.json"));
    assert_eq!(report["runs"][0], report["runs"][1]);
    let a = fs::read(out.join("pssc-left/trace.csv")).unwrap();
    let b = fs::read(out.join("pssc-right/trace.csv")).unwrap();
    assert!(a == b);
}

#[test]
fn seed_only_changes_noisy_runs() {
    let dir = tempdir();
    let trace = |name: &str, seed: &str| {
        let out = dir.path().join(format!("{name}-{seed}"));
        simulate(&scenario(name), &out, &["--seed", seed]);
        fs::read_to_string(out.join("trace.csv")).unwrap()
    };
    assert_ne!(trace("fig5", "1"), trace("fig5", "2"));
    assert_eq!(trace("fig2", "1"), trace("fig2", "2"));
}

fn invariant_set(scenario_path: &Path, out: &Path) -> String {
    let res = run_ok(&[
        "invariant-set",
        "--scenario",
        s(scenario_path),
        "--out",
        s(out),
    ]);
    String::from_utf8(res.stdout).unwrap()
}

fn summary_value(summary: &str, key: &str) -> String {
    summary
        .lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("{key} missing from\n{summary}"))
        .trim()
        .to_string()
}

#[test]
fn scalar_invariant_set_is_finitely_determined() {
    let dir = tempdir();
    let out = dir.path().join("t");
    let summary = invariant_set(&scenario("scalar"), &out);
    assert!(
        summary_value(&summary, "iterations")
            .parse::<usize>()
            .unwrap()
            >= 1
    );
    assert_eq!(summary_value(&summary, "determined"), "true");
    assert_eq!(summary_value(&summary, "empty"), "false");
    let t = Polyhedron::from_text(&fs::read_to_string(out.join("T.txt")).unwrap(), 2).unwrap();
    assert!(!t.is_empty().unwrap());
    let z = Polyhedron::from_text(&fs::read_to_string(out.join("Z.txt")).unwrap(), 1).unwrap();
    assert!(z.contains(&pssc_core::DVector::zeros(1)));
    assert_eq!(
        fs::read_to_string(out.join("summary.txt")).unwrap(),
        summary
    );
}

#[test]
fn tightened_set_is_contained_in_untightened() {
    let dir = tempdir();
    let tight_path = dir.path().join("tight.toml");
    let text =
        fs::read_to_string(scenario("scalar")).unwrap() + "\n[invariant_set]\nlambda = 0.99\n";
    fs::write(&tight_path, text).unwrap();
    invariant_set(&scenario("scalar"), &dir.path().join("full"));
    let summary = invariant_set(&tight_path, &dir.path().join("tight"));
    assert_eq!(summary_value(&summary, "lambda"), "0.99");
    let read = |sub: &str| {
        Polyhedron::from_text(
            &fs::read_to_string(dir.path().join(sub).join("T.txt")).unwrap(),
            2,
        )
        .unwrap()
    };
    let (full, tight) = (read("full"), read("tight"));
    assert!(full.contains_set(&tight).unwrap());
    assert!(!tight.contains_set(&full).unwrap());
}

#[test]
fn empty_state_box_gives_certified_empty_report() {
    let dir = tempdir();
    let text = fs::read_to_string(scenario("scalar"))
        .unwrap()
        .replace("state_lower = [-1.0]", "state_lower = [2.0]");
    let path = dir.path().join("empty.toml");
    fs::write(&path, text).unwrap();
    let out = dir.path().join("t");
    let summary = invariant_set(&path, &out);
    assert_eq!(summary_value(&summary, "empty"), "true");
    assert!(summary.contains("certified empty"));
    let t = Polyhedron::from_text(&fs::read_to_string(out.join("T.txt")).unwrap(), 2).unwrap();
    assert!(t.is_certified_empty());
    // The same file is a schema error for a closed-loop run.
    let sim = pssc(&[
        "simulate",
        "--scenario",
        s(&path),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(sim.status.code(), Some(2));
}

#[test]
fn iteration_cap_is_a_numeric_failure_with_guidance() {
    let dir = tempdir();
    let text =
        fs::read_to_string(scenario("scalar")).unwrap() + "\n[invariant_set]\nmax_iterations = 2\n";
    let path = dir.path().join("capped.toml");
    fs::write(&path, text).unwrap();
    let out = pssc(&[
        "invariant-set",
        "--scenario",
        s(&path),
        "--out",
        s(&dir.path().join("t")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(
        err.contains("2 iterations") && err.contains("lambda"),
        "{err}"
    );
}
