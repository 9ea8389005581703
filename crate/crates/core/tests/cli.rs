use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const REFERENCE: &str = r#"{
  "tasks": [
    {"wcet": 1, "period": 5},
    {"wcet": 3, "period": 16},
    {"wcet": 3, "period": 19},
    {"wcet": 4, "period": 22}
  ],
  "overhead": {"num": 1, "den": 5}
}"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cyclosched"));
    cmd.env_remove("CYCLOSCHED_SEED");
    cmd
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.ends_with('\n'));
    serde_json::from_str(&text).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn optimize_check_agrees_on_reference() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "set.json", REFERENCE);
    let v = json(&run(&["optimize", "-i", p(&input), "--check"]));
    assert_eq!(v["best_base_period"], 5);
    assert_eq!(v["best"]["f"]["num"], 19461);
    assert_eq!(v["best"]["f"]["den"], 83600);
    assert_eq!(v["method"], "bnb");
}

#[test]
fn optimize_oracle_writes_output_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "set.json", REFERENCE);
    let output = dir.path().join("out.json");
    let out = run(&["optimize", "-i", p(&input), "--oracle", "-o", p(&output)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(v["best_base_period"], 5);
    assert_eq!(v["table"].as_array().unwrap().len(), 5);
}

#[test]
fn decimal_overhead_is_accepted() {
    let dir = TempDir::new().unwrap();
    let body = REFERENCE.replace(r#"{"num": 1, "den": 5}"#, r#""0.2""#);
    let input = write(&dir, "set.json", &body);
    let v = json(&run(&["optimize", "-i", p(&input)]));
    assert_eq!(v["best"]["f2"]["num"], 4);
    assert_eq!(v["best"]["f2"]["den"], 25);
}

#[test]
fn table_text_and_json() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "set.json", REFERENCE);
    let out = run(&["table", "-i", p(&input), "--precision", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let l_row = text.lines().next().unwrap();
    assert_eq!(l_row, "L\t5\t4\t3\t2\t1");
    assert!(text
        .lines()
        .any(|l| l == "F2\t0.160\t0.200\t0.267\t0.400\t0.800"));

    let v = json(&run(&["table", "-i", p(&input), "--json"]));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(
        rows[0]["quantized_periods"],
        serde_json::json!([5, 15, 15, 20])
    );
    assert_eq!(rows[4]["f1"]["num"], 0);
}

#[test]
fn schedule_gantt_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "set.json", REFERENCE);
    let gantt = run(&[
        "schedule",
        "-i",
        p(&input),
        "--gantt",
        "--gantt-cycles",
        "3",
    ]);
    assert!(gantt.status.success());
    let text = String::from_utf8(gantt.stdout).unwrap();
    assert!(text.contains("cycle  0"), "{text}");
    assert!(text.contains("more identical cycles"), "{text}");

    let sched_path = dir.path().join("sched.json");
    let out = run(&["schedule", "-i", p(&input), "-o", p(&sched_path)]);
    assert!(out.status.success());
    let sched: Value =
        serde_json::from_str(&std::fs::read_to_string(&sched_path).unwrap()).unwrap();
    assert_eq!(sched["base_period"], 5);
    assert_eq!(sched["hyperperiod"], 60);

    let report = json(&run(&["simulate", "-i", p(&sched_path)]));
    assert_eq!(report["passed"], true);
    assert_eq!(report["deadlines_met"], true);
    assert_eq!(report["events"], 48);
}

#[test]
fn simulate_from_task_set_with_explicit_base() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "set.json", REFERENCE);
    let report = json(&run(&["simulate", "-i", p(&input), "-L", "3"]));
    assert_eq!(report["passed"], true);
    assert_eq!(report["condition4_no_overlap"]["passed"], true);
}

#[test]
fn invalid_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let zero = write(
        &dir,
        "zero.json",
        r#"{"tasks":[{"wcet":0,"period":5}],"overhead":"0.1"}"#,
    );
    let out = run(&["optimize", "-i", p(&zero)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let broken = write(
        &dir,
        "broken.json",
        "{\n  \"tasks\": [\n    {\"wcet\": 1,, }\n",
    );
    let out = run(&["optimize", "-i", p(&broken)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let unknown = write(
        &dir,
        "unknown.json",
        r#"{"tasks":[{"wcet":1,"period":5,"x":1}],"overhead":"0"}"#,
    );
    assert_eq!(run(&["optimize", "-i", p(&unknown)]).status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["table", "-i", p(&missing)]).status.code(), Some(2));
}

#[test]
fn infeasible_set_exits_one() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "heavy.json",
        r#"{"tasks":[{"wcet":2,"period":5},{"wcet":5,"period":9}],"overhead":"0.5"}"#,
    );
    let out = run(&["optimize", "-i", p(&input)]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn base_period_out_of_range_exits_two() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "set.json", REFERENCE);
    assert_eq!(
        run(&["schedule", "-i", p(&input), "-L", "6"]).status.code(),
        Some(2)
    );
}

#[test]
fn bench_writes_csv_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("runs.csv");
    let args = [
        "bench",
        "--runs",
        "12",
        "--seed",
        "7",
        "--csv",
        p(&csv_path),
    ];
    let first = json(&run(&args));
    assert_eq!(first["records"].as_array().unwrap().len(), 12);
    assert_eq!(first["mismatches"], 0);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,run,m,t1,best_l,steps_bf,steps_bnb,efficiency,digest"
    );
    assert_eq!(lines.count(), 12);

    let second = json(&run(&args));
    assert_eq!(first, second);

    let overridden = bin()
        .args(args)
        .env("CYCLOSCHED_SEED", "8")
        .output()
        .unwrap();
    assert_ne!(json(&overridden)["records"], first["records"]);
}

#[test]
fn bench_rejects_bad_config() {
    let out = run(&[
        "bench",
        "--kind",
        "fibonacci",
        "--start-index",
        "1",
        "--runs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["bench", "--period-min", "5", "--period-max", "6", "-m", "4"]);
    assert_eq!(out.status.code(), Some(2));
}
