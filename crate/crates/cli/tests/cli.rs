use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spatiocv")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A synthetic task written by the CLI itself.
fn synth_task(dir: &TempDir, n: usize) -> PathBuf {
    let path = dir.path().join("task.csv");
    let n = n.to_string();
    let o = run(&["synth", "--n", &n, "--seed", "9", "--out", p(&path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

fn plan(dir: &TempDir, task: &Path, method: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(format!("{method}.json"));
    let mut args = vec!["partition", "--method", method, "--input", p(task), "--positive", "1", "--out", p(&path)];
    args.extend(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

#[test]
fn synth_partition_resample_pipeline() {
    let dir = TempDir::new().unwrap();
    let task = synth_task(&dir, 150);
    let header = std::fs::read_to_string(&task).unwrap();
    assert!(header.starts_with("label,x,y,signal,noise1,noise2\n"));

    let plan_path = plan(&dir, &task, "spcv_coords", &["--folds", "4", "--repeats", "2"]);
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&plan_path).unwrap()).unwrap();
    assert_eq!(plan["repeats"], 2);
    assert_eq!(plan["folds"].as_array().unwrap().len(), 8);

    let o = run(&[
        "resample", "--plan", p(&plan_path), "--input", p(&task), "--positive", "1", "--k-neighbors", "3", "--json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let res: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(res["measure"], "auroc");
    assert_eq!(res["per_fold"].as_array().unwrap().len(), 8);
    let agg = res["aggregate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&agg));
}

#[test]
fn json_summary_goes_to_stdout_when_writing_a_file() {
    let dir = TempDir::new().unwrap();
    let task = synth_task(&dir, 60);
    let out = dir.path().join("p.json");
    let o = run(&[
        "partition", "--method", "cv", "--folds", "3", "--input", p(&task), "--out", p(&out), "--json",
    ]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["method"], "cv");
    assert_eq!(summary["k_per_repeat"], 3);
    assert_eq!(summary["n"], 60);
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let task = synth_task(&dir, 40);
    for args in [
        vec!["partition", "--method", "spcv_nothing", "--input", p(&task)],
        vec!["partition", "--method", "cv", "--input", p(&task), "--bogus"],
        vec!["partition", "--method", "cv", "--input", p(&task), "--param", "folds"],
        vec!["partition", "--method", "spcv_buffer", "--input", p(&task)],
        vec!["nonsense"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn runtime_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let task = synth_task(&dir, 40);
    let missing = dir.path().join("missing.csv");
    let o = run(&["partition", "--method", "cv", "--input", p(&missing)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: "));

    let o = run(&["partition", "--method", "cv", "--input", p(&task), "--response", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope"), "{}", stderr(&o));

    // Deterministic methods refuse repeats.
    let o = run(&["partition", "--method", "spcv_tiles", "--nsplit", "2x2", "--repeats", "2", "--input", p(&task)]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn validate_rejects_a_tampered_plan() {
    let dir = TempDir::new().unwrap();
    let task = synth_task(&dir, 50);
    let plan_path = plan(&dir, &task, "cv", &["--folds", "5"]);
    let o = run(&["validate", "--plan", p(&plan_path), "--input", p(&task)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("ok: 5 folds"));

    let mut plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&plan_path).unwrap()).unwrap();
    let stolen = plan["folds"][1]["test"][0].clone();
    plan["folds"][0]["train"].as_array_mut().unwrap().push(stolen);
    std::fs::write(&plan_path, serde_json::to_string(&plan).unwrap()).unwrap();
    let o = run(&["validate", "--plan", p(&plan_path), "--input", p(&task)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("repeat 1, fold 1"), "{}", stdout(&o));
}

#[test]
fn plan_for_another_task_is_refused() {
    let dir = TempDir::new().unwrap();
    let task = synth_task(&dir, 50);
    let plan_path = plan(&dir, &task, "cv", &["--folds", "5"]);
    let other = dir.path().join("other.csv");
    assert!(run(&["synth", "--n", "49", "--out", p(&other)]).status.success());
    let o = run(&["resample", "--plan", p(&plan_path), "--input", p(&other), "--positive", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("plan/task mismatch"), "{}", stderr(&o));
}

#[test]
fn plot_writes_svg_with_blocks() {
    let dir = TempDir::new().unwrap();
    let task = synth_task(&dir, 80);
    let plan_path = plan(&dir, &task, "spcv_block", &["--rows-cols", "3x3", "--folds", "3"]);
    let svg_path = dir.path().join("plot.svg");
    let o = run(&[
        "plot", "--plan", p(&plan_path), "--input", p(&task), "--show-blocks", "--fold-ids", "1,2", "--out", p(&svg_path),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("class=\"panel\"").count(), 2);
    assert!(svg.contains("class=\"block\""));
    assert!(svg.contains("class=\"test\""));

    let o = run(&["plot", "--plan", p(&plan_path), "--input", p(&task), "--fold-ids", "9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn geojson_input() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("pts.geojson");
    let features: Vec<String> = (0..12)
        .map(|i| {
            format!(
                r#"{{"type":"Feature","geometry":{{"type":"Point","coordinates":[{},{}]}},"properties":{{"label":"{}","elev":{}}}}}"#,
                i % 4,
                i / 4,
                if i % 3 == 0 { "TRUE" } else { "FALSE" },
                100 + i
            )
        })
        .collect();
    std::fs::write(&path, format!(r#"{{"type":"FeatureCollection","features":[{}]}}"#, features.join(","))).unwrap();
    let o = run(&["partition", "--method", "spcv_tiles", "--nsplit", "2x2", "--input", p(&path), "--positive", "TRUE"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let plan: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(plan["n"], 12);
    assert_eq!(plan["folds"].as_array().unwrap().len(), 4);
}

#[test]
fn nested_and_range() {
    let dir = TempDir::new().unwrap();
    let task = synth_task(&dir, 120);
    let outer = plan(&dir, &task, "spcv_coords", &["--folds", "3"]);
    let o = run(&[
        "nested", "--plan", p(&outer), "--input", p(&task), "--positive", "1", "--grid", "1,5,15", "--inner-method",
        "cv", "--inner-param", "folds=3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let res: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(res["choices"].as_array().unwrap().len(), 3);

    let o = run(&["range", "--input", p(&task), "--variable", "signal", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let est: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(est["bins"].as_array().unwrap().len(), 12);
    assert!(est["range"].as_f64().unwrap() > 0.0);
}
