use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_piterbarg"));
    c.env_remove("PITERBARG_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("json error line");
    serde_json::from_str(line).unwrap()
}

const SMALL: &str = r#"{
    "schema_version": 1,
    "process": {"components": [{"alpha": 1.0, "c": 1.0}]},
    "grids": [{"form": "ConstantSpacing", "delta0": 1.0},
              {"form": "PowerLogSpacing", "beta": 2.0}],
    "case": {"case": "T21_iv"},
    "experiment": {"t_values": [55.0], "reps": 200, "seed": 3},
    "output": {"plots": true}
}"#;

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.json");
    let out = dir.join("out");
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    v["output"]["dir"] = serde_json::Value::String(out.to_string_lossy().into_owned());
    std::fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

#[test]
fn constants_missing_alpha_is_usage_error() {
    let o = run(&["constants", "--kind", "H"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["exit_code"], 2);
}

#[test]
fn constants_repeatable() {
    let args = ["constants", "--alpha", "1", "--kind", "H_D", "--d1", "0.5", "--lambda", "8", "--reps", "300", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("kind,alpha,D1,D2"));
}

#[test]
fn constants_equal_spacings_rejected() {
    let o = run(&["constants", "--alpha", "1", "--kind", "H_D1D2", "--d1", "1", "--d2", "1", "--reps", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "EqualSpacings");
}

#[test]
fn offsets_lattice_rows() {
    let o = run(&[
        "constants", "--alpha", "1", "--kind", "H_xy", "--d1", "1", "--lambda", "4",
        "--reps", "100", "--offsets-lattice", "-1:1:0.5",
    ]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 6);
}

#[test]
fn simulate_emits_csv() {
    let o = run(&["simulate", "--alpha", "1.5", "--horizon", "1", "--mesh", "0.25", "--reps", "2"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() > 2);
}

#[test]
fn verify_plot_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = run(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("T=55 sup_dist="));
    assert!(stdout.trim_end().ends_with("reps=200"));
    let out = dir.path().join("out");
    for f in ["report.json", "report.csv", "cdf_slices.svg", "distance_vs_lnT.svg"] {
        assert!(std::fs::metadata(out.join(f)).unwrap().len() > 0, "{f}");
    }
    // single horizon: one marker
    let svg = std::fs::read_to_string(out.join("distance_vs_lnT.svg")).unwrap();
    assert_eq!(svg.matches("class=\"marker\"").count(), 1);

    let p1 = dir.path().join("p1");
    let p2 = dir.path().join("p2");
    for p in [&p1, &p2] {
        let o = run(&["plot", out.join("report.csv").to_str().unwrap(), "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    for f in ["cdf_slices.svg", "distance_vs_lnT.svg"] {
        assert_eq!(std::fs::read(p1.join(f)).unwrap(), std::fs::read(p2.join(f)).unwrap());
        assert_eq!(std::fs::read(p1.join(f)).unwrap(), std::fs::read(out.join(f)).unwrap());
    }

    let o = run(&["report", out.join("report.csv").to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success());
    assert_eq!(o.stdout, std::fs::read(out.join("report.json")).unwrap());
}

#[test]
fn verify_dry_run_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = run(&["verify", cfg.to_str().unwrap(), "--dry-run"]);
    assert!(o.status.success());
    assert!(!dir.path().join("out").exists());

    let bad = SMALL.replace("\"T21_iv\"", "\"T21_i\"");
    let cfg = write_config(dir.path(), &bad);
    let o = run(&["verify", cfg.to_str().unwrap(), "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "ConfigMismatch");
}

#[test]
fn verify_acceptance_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let strict = SMALL.replace(
        "\"seed\": 3}",
        "\"seed\": 3, \"acceptance\": {\"max_final_distance\": 0.0}}",
    );
    let cfg = write_config(dir.path(), &strict);
    let o = run(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_json(&o)["error"], "AcceptanceFailed");
}

#[test]
fn sweep_needs_three_horizons() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = run(&["sweep", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "Precondition");
}

#[test]
fn plot_rejects_malformed_report() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("r.json");
    std::fs::write(&bad, "{\"not\": \"a report\"}").unwrap();
    let o = run(&["plot", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "MalformedReport");
}

#[test]
fn invalid_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("\"reps\": 200", "\"reps\": 200, \"bogus\": 1"));
    let o = run(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn constants_h2_near_known_value() {
    let o = run(&["constants", "--alpha", "2", "--kind", "H", "--lambda", "64", "--reps", "20000", "--seed", "7"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let (v, se): (f64, f64) = (row[10].parse().unwrap(), row[11].parse().unwrap());
    assert!((v - 0.5641895835477563).abs() < 0.05 * 0.5642, "{v} ± {se}");
}
