use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use liftreach_core::{ContainmentReport, Dataset, Dictionary, KoopmanModel, ReachResult};
use serde_json::{json, Value};
use tempfile::TempDir;

fn liftreach(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liftreach"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = liftreach(dir, args);
    assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
}

fn read<T: serde::de::DeserializeOwned>(p: PathBuf) -> T {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn write(p: PathBuf, v: &Value) {
    fs::write(p, serde_json::to_string(v).unwrap()).unwrap();
}

/// Toy data, model and scenario in a fresh directory.
fn toy_workspace() -> TempDir {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "preset",
            "--system",
            "toy",
            "--scenario",
            "sc.json",
            "--config",
            "cfg.json",
        ],
    );
    ok(
        d,
        &[
            "simulate",
            "--system",
            "toy",
            "--config",
            "cfg.json",
            "--seed",
            "3",
            "--out",
            "data.json",
        ],
    );
    ok(
        d,
        &[
            "identify",
            "--data",
            "data.json",
            "--dictionary",
            "toy-quadratic",
            "--out",
            "model.json",
        ],
    );
    tmp
}

#[test]
fn simulate_is_reproducible_and_rejects_unknown_systems() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write(d.join("cfg.json"), &json!({"trajectories": 4, "length": 7}));
    ok(
        d,
        &[
            "simulate", "--system", "cstr", "--config", "cfg.json", "--seed", "5", "--out", "a.json",
        ],
    );
    ok(
        d,
        &[
            "simulate", "--system", "cstr", "--config", "cfg.json", "--seed", "5", "--out", "b.json",
        ],
    );
    assert_eq!(fs::read(d.join("a.json")).unwrap(), fs::read(d.join("b.json")).unwrap());
    let data: Dataset = read(d.join("a.json"));
    assert_eq!((data.trajectories().len(), data.total_transitions()), (4, 28));

    let bad = liftreach(
        d,
        &["simulate", "--system", "pendulum", "--seed", "1", "--out", "c.json"],
    );
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("pendulum"));
    write(d.join("bad.json"), &json!({"trajectories": 2, "lengths": [3]}));
    let bad = liftreach(
        d,
        &["simulate", "--system", "toy", "--config", "bad.json", "--out", "c.json"],
    );
    assert_eq!(code(&bad), 2);
}

#[test]
fn identify_recovers_the_toy_model_and_round_trips() {
    let tmp = toy_workspace();
    let d = tmp.path();
    let model: KoopmanModel = read(d.join("model.json"));
    let data: Dataset = read(d.join("data.json"));
    let fresh = KoopmanModel::identify(&data, &Dictionary::toy_quadratic(), 0.0).unwrap();
    assert_eq!(model, fresh);
    // toy defaults mu = 0.9, lambda = 0.5, delta = 1
    let a = [[0.9, 0.0, 0.0], [0.0, 0.5, -0.5], [0.0, 0.0, 0.81]];
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!(
                (model.a()[(i, j)] - v).abs() < 1e-8,
                "A[{i},{j}] = {}",
                model.a()[(i, j)]
            );
        }
    }
    for (i, v) in [0.0, 1.0, 0.0].iter().enumerate() {
        assert!((model.b()[(i, 0)] - v).abs() < 1e-8);
    }

    // CSV trajectories give the same model
    ok(
        d,
        &[
            "simulate",
            "--system",
            "toy",
            "--config",
            "cfg.json",
            "--seed",
            "3",
            "--out",
            "again.json",
            "--csv-dir",
            "csv",
        ],
    );
    ok(
        d,
        &[
            "identify",
            "--data",
            "csv",
            "--dictionary",
            "toy-quadratic",
            "--out",
            "from_csv.json",
        ],
    );
    assert_eq!(read::<KoopmanModel>(d.join("from_csv.json")), model);
}

#[test]
fn identify_input_errors() {
    let tmp = toy_workspace();
    let d = tmp.path();
    write(
        d.join("empty.json"),
        &json!({"trajectories": [], "state_dim": 2, "input_dim": 1}),
    );
    let out = liftreach(
        d,
        &[
            "identify",
            "--data",
            "empty.json",
            "--dictionary",
            "toy-quadratic",
            "--out",
            "m.json",
        ],
    );
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    write(
        d.join("dict3.json"),
        &json!({"phi": ["x1", "x2", "x3"], "nu": ["u1"], "state_dim": 3, "input_dim": 1}),
    );
    let out = liftreach(
        d,
        &[
            "identify",
            "--data",
            "data.json",
            "--dictionary",
            "dict3.json",
            "--out",
            "m.json",
        ],
    );
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("dimension"));
}

#[test]
fn reach_writes_result_and_hull_csv() {
    let tmp = toy_workspace();
    let d = tmp.path();
    ok(
        d,
        &[
            "reach",
            "--model",
            "model.json",
            "--data",
            "data.json",
            "--scenario",
            "sc.json",
            "--horizon",
            "4",
            "--out",
            "r.json",
        ],
    );
    let r: ReachResult = read(d.join("r.json"));
    assert_eq!(r.projected_sets.len(), 4);
    let csv = fs::read_to_string(d.join("r.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,dim,lower,upper,width");
    assert_eq!(lines.len(), 1 + 4 * 2);

    // idempotent
    let first = fs::read(d.join("r.json")).unwrap();
    ok(
        d,
        &[
            "reach",
            "--model",
            "model.json",
            "--data",
            "data.json",
            "--scenario",
            "sc.json",
            "--horizon",
            "4",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(fs::read(d.join("r.json")).unwrap(), first);

    ok(
        d,
        &[
            "reach",
            "--model",
            "model.json",
            "--data",
            "data.json",
            "--scenario",
            "sc.json",
            "--horizon",
            "0",
            "--out",
            "r0.json",
        ],
    );
    assert!(read::<ReachResult>(d.join("r0.json")).projected_sets.is_empty());

    let out = liftreach(
        d,
        &[
            "reach",
            "--model",
            "nope.json",
            "--data",
            "data.json",
            "--scenario",
            "sc.json",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn reach_failure_exits_with_computation_code() {
    let tmp = toy_workspace();
    let d = tmp.path();
    write(
        d.join("tan.json"),
        &json!({"phi": ["x1", "x2", "x1^2"], "nu": ["tan(u1)"], "state_dim": 2, "input_dim": 1}),
    );
    ok(
        d,
        &[
            "identify",
            "--data",
            "data.json",
            "--dictionary",
            "tan.json",
            "--out",
            "tan_model.json",
        ],
    );
    let mut sc: Value = read(d.join("sc.json"));
    sc["U"] = json!({"center": [1.5], "generators": [[0.2]]});
    write(d.join("pole.json"), &sc);
    let out = liftreach(
        d,
        &[
            "reach",
            "--model",
            "tan_model.json",
            "--data",
            "data.json",
            "--scenario",
            "pole.json",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("step 0"), "{}", stderr(&out));
}

#[test]
fn verify_passes_and_detects_shrunk_sets() {
    let tmp = toy_workspace();
    let d = tmp.path();
    ok(
        d,
        &[
            "reach",
            "--model",
            "model.json",
            "--data",
            "data.json",
            "--scenario",
            "sc.json",
            "--out",
            "r.json",
        ],
    );
    ok(
        d,
        &[
            "verify",
            "--result",
            "r.json",
            "--system",
            "toy",
            "--scenario",
            "sc.json",
            "--samples",
            "200",
            "--seed",
            "4",
            "--out",
            "rep.json",
        ],
    );
    let rep: Value = read(d.join("rep.json"));
    for key in ["samples", "seed", "horizon", "steps", "first_violation"] {
        assert!(rep.get(key).is_some(), "missing {key}");
    }
    let rep: ContainmentReport = read(d.join("rep.json"));
    assert!(rep.all_contained());

    let out = liftreach(
        d,
        &[
            "verify",
            "--result",
            "r.json",
            "--system",
            "toy",
            "--scenario",
            "sc.json",
            "--samples",
            "200",
            "--seed",
            "4",
            "--shrink",
            "0.5",
            "--out",
            "shrunk.json",
        ],
    );
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let rep: ContainmentReport = read(d.join("shrunk.json"));
    assert!(rep.total_violations() > 0 && rep.first_violation.is_some());
}

#[test]
fn compare_and_export_plot() {
    let tmp = toy_workspace();
    let d = tmp.path();
    let mut sc: Value = read(d.join("sc.json"));
    sc["horizon"] = json!(3);
    sc["dictionary"] = json!("identity-lti");
    write(d.join("same.json"), &sc);
    ok(
        d,
        &[
            "compare",
            "--data",
            "data.json",
            "--scenario",
            "same.json",
            "--out",
            "cmp.csv",
        ],
    );
    let csv = fs::read_to_string(d.join("cmp.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("k,dim,width_koopman,width_baseline"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 2);
    assert!(rows.iter().all(|r| r.ends_with(",1.0") || r.ends_with(",1")), "{csv}");

    ok(
        d,
        &[
            "reach",
            "--model",
            "model.json",
            "--data",
            "data.json",
            "--scenario",
            "sc.json",
            "--out",
            "r.json",
        ],
    );
    ok(d, &["export-plot", "--result", "r.json", "--out", "plot.csv"]);
    let plot = fs::read_to_string(d.join("plot.csv")).unwrap();
    assert_eq!(plot.lines().count(), 1 + 10 * 2);
    assert_eq!(plot, fs::read_to_string(d.join("r.csv")).unwrap());
}
