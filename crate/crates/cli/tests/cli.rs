use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn morl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = morl(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn front_indices(front: &Value) -> Vec<u64> {
    front["entries"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|e| e["tied_policies"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()))
        .collect()
}

fn error_kind(out: &Output) -> String {
    let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).expect("stderr is JSON");
    err["error"].as_str().unwrap().to_string()
}

#[test]
fn pareto_fronts_of_builtin_bandits() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ex");
    ok(&["pareto", "example-3.1", "--out", out.to_str().unwrap()]);
    assert_eq!(front_indices(&read_json(&out.join("pareto.json"))), vec![3]);
    assert_eq!(front_indices(&read_json(&out.join("weak_pareto.json"))), vec![1, 3]);
    let csv = fs::read_to_string(out.join("values.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);

    let out = dir.path().join("c2");
    ok(&["pareto", "appendix-c2", "--out", out.to_str().unwrap()]);
    assert_eq!(front_indices(&read_json(&out.join("pareto.json"))), vec![0, 1, 3]);
}

#[test]
fn pareto_is_deterministic_for_random_envs() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["pareto", "random:3:2:2:2:7", "--out", a.to_str().unwrap()]);
    ok(&["pareto", "random:3:2:2:2:7", "--out", b.to_str().unwrap()]);
    for f in ["pareto.json", "weak_pareto.json", "values.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn pareto_accepts_model_files() {
    let dir = TempDir::new().unwrap();
    let model = serde_json::to_string(&morl_core::envs::appendix_c2()).unwrap();
    let path = write_config(dir.path(), "model.json", &model);
    let out = dir.path().join("f");
    ok(&["pareto", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(front_indices(&read_json(&out.join("pareto.json"))), vec![0, 1, 3]);
}

#[test]
fn tchrl_run_reports_small_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"env": "figure-1", "rounds": 20000, "preference": [0.5, 0.5], "seed": 1}"#,
    );
    let out = dir.path().join("r");
    ok(&["run", "tchrl", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let summary = read_json(&out.join("summary.json"));
    assert!(summary["final_error"].as_f64().unwrap() <= 0.05);
    assert_eq!(summary["episodes_sampled"], 60000);
    assert_eq!(summary["config"]["seed"], 1);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 20001);
}

#[test]
fn explore_then_plan_samples_nothing_more() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "pf.json",
        r#"{"env": "figure-1", "rounds": 20000, "preference": [0.3, 0.7], "planning_rounds": 2000}"#,
    );
    let explore = dir.path().join("explore");
    ok(&["run", "explore", "--config", &cfg, "--out", explore.to_str().unwrap()]);
    assert_eq!(read_json(&explore.join("summary.json"))["episodes_sampled"], 20000);
    let dataset = explore.join("dataset.json");
    let plan = dir.path().join("plan");
    ok(&[
        "run",
        "plan-tch",
        "--config",
        &cfg,
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        plan.to_str().unwrap(),
    ]);
    let summary = read_json(&plan.join("summary.json"));
    assert_eq!(summary["episodes_sampled"], 0);
    assert_eq!(summary["rounds"], 2000);
    assert!(summary["final_error"].as_f64().unwrap() <= 0.08);
}

#[test]
fn forced_step_size_violation_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"env": "figure-1", "rounds": 10, "preference": [0.5, 0.5], "mu": 1.0, "eta_schedule": {"fixed": 2.0}}"#,
    );
    let out = morl(&["run", "stchrl", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(error_kind(&out), "config");
}

#[test]
fn input_errors_are_reported_as_json() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    let missing_env = write_config(dir.path(), "a.json", r#"{"rounds": 10}"#);
    let out = morl(&["run", "tchrl", "--config", &missing_env, "--out", d]);
    assert_eq!(error_kind(&out), "config");

    let malformed = write_config(dir.path(), "b.json", "{\n  \"env\": \"figure-1\",\n  \"rounds\": ,\n}");
    let out = morl(&["run", "tchrl", "--config", &malformed, "--out", d]);
    assert_eq!(error_kind(&out), "json");
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let unknown = write_config(dir.path(), "c.json", r#"{"env": "figure-1", "rounds": 10, "bogus": 1}"#);
    assert_eq!(error_kind(&morl(&["run", "tchrl", "--config", &unknown, "--out", d])), "json");

    let plan = write_config(dir.path(), "d.json", r#"{"env": "figure-1", "rounds": 10, "preference": [0.5, 0.5]}"#);
    let out = morl(&["run", "plan-tch", "--config", &plan, "--out", d]);
    assert_eq!(error_kind(&out), "config");

    let out = morl(&["run", "nonsense", "--config", &plan]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "usage");

    let out = morl(&["oracle", "figure-1", "--lambda", "0.5,0.6"]);
    assert_eq!(error_kind(&out), "domain");

    let out = morl(&["sweep", "plan-tch", "--config", &plan, "--grid", "0.3", "--out", d]);
    assert_eq!(error_kind(&out), "usage");
}

fn distance_to_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn sweep_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn planning_sweep_traces_the_figure_1_front() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "pf.json",
        r#"{"env": "figure-1", "rounds": 20000, "planning_rounds": 2000, "seed": 5}"#,
    );
    let a = dir.path().join("a");
    ok(&["sweep", "plan-tch", "--config", &cfg, "--grid", "0.05", "--out", a.to_str().unwrap()]);
    let rows = sweep_rows(&a.join("sweep.csv"));
    assert_eq!(rows.len(), 21);
    for r in &rows {
        assert!(distance_to_segment([r[3], r[4]], [0.2, 0.8], [0.8, 0.2]) <= 0.08);
        assert_eq!(r[8], 0.0);
    }
    assert_eq!(read_json(&a.join("sweep.json"))["total_episodes_sampled"], 20000);
    assert_eq!(fs::read_dir(a.join("points")).unwrap().count(), 21);

    let b = dir.path().join("b");
    ok(&["sweep", "plan-tch", "--config", &cfg, "--grid", "0.05", "--out", b.to_str().unwrap()]);
    assert_eq!(fs::read(a.join("sweep.csv")).unwrap(), fs::read(b.join("sweep.csv")).unwrap());
}

#[test]
fn extreme_preferences_approach_per_objective_optima() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"env": "figure-1", "rounds": 5000, "seed": 2}"#,
    );
    let out = dir.path().join("s");
    ok(&["sweep", "tchrl", "--config", &cfg, "--grid", "0.5", "--out", out.to_str().unwrap()]);
    let rows = sweep_rows(&out.join("sweep.csv"));
    // λ = (0, 1) favours the second objective, λ = (1, 0) the first.
    assert!((rows[0][4] - 0.8).abs() <= 0.05);
    assert!((rows[2][3] - 0.8).abs() <= 0.05);
    assert_eq!(read_json(&out.join("sweep.json"))["total_episodes_sampled"], 3 * 3 * 5000);
}

#[test]
fn reexplore_costs_one_exploration_per_point() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"env": "figure-1", "rounds": 300}"#);
    let out = dir.path().join("s");
    ok(&["sweep", "plan-tch", "--config", &cfg, "--grid", "0.25", "--reexplore", "--out", out.to_str().unwrap()]);
    assert_eq!(read_json(&out.join("sweep.json"))["total_episodes_sampled"], 5 * 300);
}

#[test]
fn oracle_reports_the_minimizer() {
    let out = ok(&["oracle", "figure-1", "--lambda", "0.5,0.5"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["objective"].as_f64().unwrap() - 0.5 * 0.301).abs() < 1e-12);
    assert!(v["witness"]["mixture"].is_object());

    let out = ok(&["oracle", "appendix-e1", "--lambda", "0.3,0.7", "--mu", "0.01", "--iota", "0.01", "--class", "deterministic"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["witness"]["deterministic"]["policies"], serde_json::json!([1]));
}
