mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::config_path;
use tempfile::TempDir;

fn placesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_placesim"))
        .args(args)
        .env_remove("PLACESIM_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn table1() -> String {
    config_path("table1.toml").to_string_lossy().into_owned()
}

/// Writes a scenario file into `dir` that points at the shipped catalog.
fn scenario_file(dir: &TempDir, name: &str, sim_extra: &str, tail: &str) -> String {
    let text = format!(
        r#"catalog = "{catalog}"

[scenario]
gap_m = 300.0
speed_mph = 40.0
vehicle = "car"

[detection]
detection_range_m = 120.0
visibility_range_m = 140.0

[sim]
model = "YOLO11x"
platform = "a5000"
{sim_extra}
{tail}
"#,
        catalog = table1().replace('\\', "/"),
    );
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn place_selects_expected_pairs() {
    let o = placesim(&["place", &table1()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("device: YOLO11m @ jetson_orin"), "{text}");
    assert!(text.contains("cloud: YOLO11x @ a5000"), "{text}");
    assert!(text.contains("rejected (deadline)"));
}

#[test]
fn place_accepts_config_flag_and_csv() {
    let o = placesim(&["--format", "csv", "--config", &table1(), "place"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("model,platform,kind,"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn place_empty_catalog_exits_two() {
    let o = placesim(&["place", path_str(&config_path("empty.toml"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
}

#[test]
fn place_amortized_flags_unstable_device_models() {
    let o = placesim(&["--format", "jsonl", "place", &table1(), "--amortized"]);
    assert_eq!(o.status.code(), Some(2));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    for model in ["YOLO11x", "YOLO11l"] {
        let row = lines
            .iter()
            .find(|v| v["model_id"] == model && v["platform_id"] == "jetson_orin")
            .unwrap();
        assert_eq!(row["reject_reason"], "unstable");
    }
}

#[test]
fn place_percentile_and_rtt_override() {
    let o = placesim(&["--format", "jsonl", "place", &table1(), "--percentile", "p90"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"network_delay\":0.06"));
    let o = placesim(&["place", &table1(), "--rtt", "0.09"]);
    assert_eq!(o.status.code(), Some(2), "every cloud pair misses the deadline");
    let o = placesim(&["place", &table1(), "--percentile", "p75"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn analyze_reports_break_even_and_budget() {
    let o = placesim(&["analyze", &table1(), "--break-even"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("1.87342"), "{text}");
    assert!(!text.contains("reaction-time budget"));

    let o = placesim(&["analyze", &table1(), "--kinematics"]);
    let text = stdout(&o);
    assert!(text.contains("4.10221"), "{text}");
    assert!(!text.contains("break-even"));
}

#[test]
fn analyze_flags_hopeless_scenarios() {
    let o = placesim(&["analyze", &table1(), "--kinematics", "--available-m", "50"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("infeasible at zero delay"));
}

#[test]
fn analyze_with_scenario_uses_its_kinematics() {
    let o = placesim(&[
        "--format",
        "jsonl",
        "analyze",
        &table1(),
        "--kinematics",
        "--scenario",
        path_str(&config_path("baseline.toml")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let first: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first["available_m"], 120.0);
    assert_eq!(first["vehicle"], "car");
}

#[test]
fn simulate_baseline_is_safe_and_writes_csvs() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("trace.csv");
    let summary = dir.path().join("summary.csv");
    let o = placesim(&[
        "simulate",
        path_str(&config_path("baseline.toml")),
        "--trace-out",
        path_str(&trace),
        "--summary-out",
        path_str(&summary),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("safe: d_stop=91.8379 m"));

    let t = fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("run_id,time_s,event,frame,position_m,obstacle_distance_m\n"));
    assert!(t.contains("BrakeIssued"));
    let s = fs::read_to_string(&summary).unwrap();
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("# placesim "));
    assert!(lines[0].contains("seed=0"));
    assert!(lines[1].starts_with("run_id,model,platform,speed_mps,"));
    assert!(lines[2].ends_with(",safe"));
    assert!(lines[2].contains(",91.8379,"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let scenario = scenario_file(
        &dir,
        "noisy.toml",
        "rtt = \"sampler\"\nservice = \"exponential\"\nbackground_rate_hz = 3.0\nseed = 11",
        "",
    );
    let mut files = Vec::new();
    for i in 0..2 {
        let trace = dir.path().join(format!("t{i}.csv"));
        let summary = dir.path().join(format!("s{i}.csv"));
        placesim(&["simulate", &scenario, "--trace-out", path_str(&trace), "--summary-out", path_str(&summary)]);
        files.push((fs::read(&trace).unwrap(), fs::read(&summary).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn seed_flag_and_environment_agree() {
    let dir = TempDir::new().unwrap();
    let scenario = scenario_file(&dir, "noisy.toml", "rtt = \"sampler\"\nservice = \"exponential\"", "");
    let via_flag = dir.path().join("flag.csv");
    let via_env = dir.path().join("env.csv");
    placesim(&["--seed", "99", "simulate", &scenario, "--summary-out", path_str(&via_flag)]);
    let o = Command::new(env!("CARGO_BIN_EXE_placesim"))
        .args(["simulate", &scenario, "--summary-out", path_str(&via_env)])
        .env("PLACESIM_SEED", "99")
        .output()
        .unwrap();
    assert!(o.status.success() || o.status.code() == Some(3));
    let a = fs::read_to_string(&via_flag).unwrap();
    assert_eq!(a, fs::read_to_string(&via_env).unwrap());
    assert!(a.lines().next().unwrap().ends_with("seed=99"));
}

#[test]
fn long_round_trip_collides_with_exit_three() {
    let dir = TempDir::new().unwrap();
    let slow = scenario_file(&dir, "slow.toml", "rtt = 6.0", "");
    let o = placesim(&["simulate", &slow]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("collision"));

    // 5 s still stops short: the boundary for this scenario is about 5.158 s.
    let edge = scenario_file(&dir, "edge.toml", "rtt = 5.0", "");
    assert_eq!(placesim(&["simulate", &edge]).status.code(), Some(0));
}

#[test]
fn simulate_config_errors_exit_one() {
    let o = placesim(&["simulate", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let dir = TempDir::new().unwrap();
    let bad = scenario_file(&dir, "bad.toml", "rtt = 0.02\nconfirm_frames = 0", "");
    assert_eq!(placesim(&["simulate", &bad]).status.code(), Some(1));
    let unknown = scenario_file(&dir, "unknown.toml", "typo_field = 1", "");
    assert_eq!(placesim(&["simulate", &unknown]).status.code(), Some(1));
}

#[test]
fn sweep_row_count_and_order_independent_of_jobs() {
    let dir = TempDir::new().unwrap();
    let spec = scenario_file(
        &dir,
        "grid.toml",
        "rtt = 0.022",
        r#"[grid]
speeds_mph = [20.0, 40.0, 60.0]
deployments = [
  { model = "YOLO11m", platform = "jetson_orin" },
  { model = "YOLO11x", platform = "a5000" },
]
"#,
    );
    let one = dir.path().join("one.csv");
    let many = dir.path().join("many.csv");
    let o = placesim(&["sweep", &spec, "--jobs", "1", "--out", path_str(&one)]);
    assert_eq!(o.status.code(), Some(0));
    placesim(&["sweep", &spec, "--jobs", "4", "--out", path_str(&many)]);
    let text = fs::read_to_string(&one).unwrap();
    assert_eq!(text, fs::read_to_string(&many).unwrap());

    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 6);
    assert!(text.lines().next().unwrap().starts_with("# placesim "));
    assert!(text.lines().nth(1).unwrap().ends_with(",outcome,error"));
    let models: Vec<&str> = rows.iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(models, ["YOLO11m", "YOLO11x", "YOLO11m", "YOLO11x", "YOLO11m", "YOLO11x"]);
    for pair in rows.chunks(2) {
        let d_stop = |r: &str| r.split(',').nth(14).unwrap().parse::<f64>().unwrap();
        assert!(d_stop(pair[1]) > d_stop(pair[0]), "cloud should stop further out");
    }
}

#[test]
fn sweep_with_invalid_point_exits_five() {
    let dir = TempDir::new().unwrap();
    let spec = scenario_file(
        &dir,
        "grid.toml",
        "rtt = 0.022",
        "[grid]\nspeeds_mps = [5.0, 10.0, 15.0, 20.0, 25.0, 0.0]\n",
    );
    let o = placesim(&["sweep", &spec]);
    assert_eq!(o.status.code(), Some(5));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 6);
    let errors: Vec<&&str> = rows.iter().filter(|r| !r.ends_with(',')).collect();
    assert_eq!(errors.len(), 1);
    assert!(errors[0].starts_with("5,"));
    for r in &rows {
        assert_eq!(csv_fields(r), 19, "{r}");
    }
}

/// Field count of one CSV record, honouring double-quoted fields.
fn csv_fields(line: &str) -> usize {
    let mut quoted = false;
    1 + line
        .chars()
        .filter(|&c| {
            if c == '"' {
                quoted = !quoted;
            }
            c == ',' && !quoted
        })
        .count()
}

#[test]
fn validate_queue_exit_codes() {
    let o = placesim(&["validate-queue", "--rho", "0.5", "--service", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));

    let o = placesim(&["validate-queue", "--rho", "0.99", "--customers", "1000"]);
    assert_eq!(o.status.code(), Some(6));

    let o = placesim(&["validate-queue", "--rho", "1.2", "--strict"]);
    assert_eq!(o.status.code(), Some(1));

    let o = placesim(&["--format", "jsonl", "validate-queue", "--rho", "1.2", "--customers", "10000"]);
    assert_eq!(o.status.code(), Some(6));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["diverged"], true);
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(placesim(&["--help"]).status.code(), Some(0));
    assert_eq!(placesim(&["--version"]).status.code(), Some(0));
    assert_eq!(placesim(&["teleport"]).status.code(), Some(1));
    assert_eq!(placesim(&["place"]).status.code(), Some(1));
}
