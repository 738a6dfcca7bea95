use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dpero(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpero"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn generate(dir: &Path, extra: &[&str]) -> String {
    let path = dir.join("scenario.json");
    let path_s = path.to_str().unwrap().to_string();
    let mut args = vec![
        "generate",
        "--seed",
        "7",
        "--defenders",
        "15",
        "--out",
        &path_s,
    ];
    args.extend_from_slice(extra);
    let out = dpero(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path_s
}

#[test]
fn generate_writes_scenario_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), &[]);
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["node_count"], 225);
    assert_eq!(doc["edges"].as_array().unwrap().len(), 840);
    assert_eq!(doc["edges"][0].as_array().unwrap().len(), 3);
    assert_eq!(doc["start"], 0);
    assert_eq!(doc["exits"], serde_json::json!([210, 213, 217, 220, 224]));
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["meta"]["defender_count"], 15);
    assert_eq!(doc["meta"]["rows"], 15);
    let placed = doc["capture_prob"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| p.as_f64().unwrap() > 0.0)
        .count();
    assert_eq!(placed, 15);

    // same flags, same bytes
    let again = dpero(&["generate", "--seed", "7", "--defenders", "15"]);
    assert_eq!(
        String::from_utf8(again.stdout).unwrap(),
        fs::read_to_string(&path).unwrap()
    );
}

#[test]
fn solve_baseline_compare_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), &["--rows", "8", "--cols", "9"]);

    let solved = stdout_json(&dpero(&["solve", &path]));
    assert_eq!(solved["converged"], true);
    assert_eq!(solved["value_table"].as_array().unwrap().len(), 72);
    assert_eq!(solved["path"]["nodes"][0], 0);
    let survival = solved["path"]["survival_prob"].as_f64().unwrap();

    let base = stdout_json(&dpero(&["baseline", &path]));
    assert_eq!(base["travel_time"], 7.0);
    assert_eq!(base["nodes"].as_array().unwrap().last().unwrap(), 63);
    assert!(base["survival_prob"].as_f64().unwrap() <= survival);

    let record = stdout_json(&dpero(&["compare", &path]));
    assert_eq!(record["dpero_survival"].as_f64().unwrap(), survival);
    assert_eq!(record["status"], "ok");
    assert_eq!(record["defender_count"], 15);

    let report = stdout_json(&dpero(&["verify", &path, "--trials", "20000"]));
    for check in report["checks"].as_array().unwrap() {
        assert_ne!(check["passed"], false, "{check}");
    }
}

#[test]
fn sweep_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report");
    let out_s = out.to_str().unwrap();
    let run = dpero(&[
        "sweep",
        "--rows",
        "6",
        "--cols",
        "6",
        "--defenders",
        "2,4",
        "--replications",
        "3",
        "--seed",
        "1",
        "--self-check",
        "--out",
        out_s,
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let csv = fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("scenario_id,defender_count,dpero_survival,baseline_survival,dpero_time,baseline_time,dpero_cost,sweeps,wall_clock_ms,status\n"));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 2);
    assert!(out.join("plot.csv").exists());
}

#[test]
fn failures_emit_machine_readable_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"node_count": 2, "edges": [[0, 5, 1.0]], "capture_prob": [0.0, 0.0], "start": 0, "exits": [1]}"#,
    )
    .unwrap();
    let out = dpero(&["solve", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    let line: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(line["error"]["kind"], "dangling_edge");

    let blocked = dir.path().join("blocked.json");
    fs::write(
        &blocked,
        r#"{"node_count": 3, "edges": [[0, 1, 1.0], [1, 2, 1.0]], "capture_prob": [0.0, 1.0, 0.0], "start": 0, "exits": [2]}"#,
    )
    .unwrap();
    let out = dpero(&["solve", blocked.to_str().unwrap()]);
    assert!(!out.status.success());
    let line: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(line["error"]["kind"], "no_escape_route");

    // the comparison records the missing route instead of failing
    let record = stdout_json(&dpero(&["compare", blocked.to_str().unwrap()]));
    assert_eq!(record["status"], "dpero_no_route");
    assert_eq!(record["baseline_survival"], 0.0);

    let out = dpero(&["generate", "--rows", "1"]);
    assert!(!out.status.success());
    let line: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(line["error"]["kind"], "config");
}
