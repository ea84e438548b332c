use std::path::PathBuf;
use std::process::{Command, Output};

use ncx::{parse_scenario, run, RunOptions, Status};

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scenario(name: &str) -> PathBuf {
    scenario_dir().join(name)
}

fn ncx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncx"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(name: &str, extra: &[&str]) -> Output {
    let path = scenario(name);
    let mut args = vec!["run", "--scenario", path.to_str().unwrap(), "--format", "json"];
    args.extend_from_slice(extra);
    ncx(&args)
}

#[test]
fn shipped_scenarios_pass_in_process() {
    for name in [
        "pauli.json",
        "cyclic_shift.json",
        "two_orbit.json",
        "block_swap_model.json",
        "lattice.json",
        "explicit_finite.json",
    ] {
        let text = std::fs::read_to_string(scenario(name)).unwrap();
        let sc = parse_scenario(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let report = run(&sc, &RunOptions::default());
        assert!(report.summary.all_passed, "{name}:\n{}", report.to_text());
        assert_eq!(report.summary.executed, sc.tasks.len());
    }
}

#[test]
fn every_shipped_scenario_parses() {
    for entry in std::fs::read_dir(scenario_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = std::fs::read_to_string(&path).unwrap();
            parse_scenario(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
    }
}

#[test]
fn json_reports_are_byte_identical_across_runs_and_parallelism() {
    let a = run_json("cyclic_shift.json", &[]);
    let b = run_json("cyclic_shift.json", &[]);
    let c = run_json("cyclic_shift.json", &["--parallel"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["environment"]["seed"], 7);
    assert_eq!(v["summary"]["all_passed"], true);
}

#[test]
fn seed_override_changes_random_inputs_only() {
    let a = run_json("cyclic_shift.json", &["--seed", "11"]);
    let b = run_json("cyclic_shift.json", &["--seed", "12"]);
    let va: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let vb: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(va["environment"]["seed"], 11);
    // Task 0 has a fixed input, task 1 a random one.
    assert_eq!(va["tasks"][0]["result"], vb["tasks"][0]["result"]);
    assert_ne!(va["tasks"][1]["result"], vb["tasks"][1]["result"]);
}

#[test]
fn out_flag_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run_json("pauli.json", &["--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["environment"]["group"], "finite(order 4)");
    assert_eq!(v["tasks"][2]["result"]["oracle_value"], 2.0);
}

#[test]
fn text_format_is_a_table() {
    let path = scenario("lattice.json");
    let o = ncx(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("group     Z^2"));
    assert!(text.contains("schedule  right box"));
    assert!(text.trim_end().ends_with("ALL PASSED"));
}

#[test]
fn k_max_and_tol_overrides_reach_the_environment() {
    let o = run_json("lattice.json", &["--k-max", "64", "--tol", "0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["environment"]["k_max"], 64);
    assert_eq!(v["environment"]["tolerances"]["tol"], 0.5);
    assert_eq!(v["tasks"][0]["k"], 64);
}

#[test]
fn failing_task_does_not_stop_later_tasks() {
    let o = run_json("fail_soft.json", &[]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tasks"][0]["status"], "failed");
    assert!(v["tasks"][0]["error"].as_str().unwrap().contains("infeasible"));
    assert_eq!(v["tasks"][1]["status"], "ok");
    assert_eq!(v["tasks"][1]["pass"], true);
    assert!(v["falsification"].is_null());
}

#[test]
fn falsification_truncates_the_run() {
    let o = run_json("falsified.json", &[]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["falsification"]["task"], 1);
    assert_eq!(v["summary"]["tasks"], 3);
    assert_eq!(v["summary"]["executed"], 2);
    assert_eq!(v["summary"]["all_passed"], false);
}

#[test]
fn in_process_statuses_match_the_binary() {
    let text = std::fs::read_to_string(scenario("fail_soft.json")).unwrap();
    let report = run(&parse_scenario(&text).unwrap(), &RunOptions::default());
    assert_eq!(report.tasks[0].status, Status::Failed);
    assert_eq!(report.tasks[1].status, Status::Ok);
}

#[test]
fn invalid_scenario_exits_2_with_the_offending_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"action":{"builtin":"cyclic_shift","params":{"n":3}},
            "tasks":[{"type":"gauge","a":{"diag":[1,2]}}]}"#,
    )
    .unwrap();
    let o = ncx(&["run", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("tasks[0].a"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn mismatched_lattice_algebra_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("lattice.json");
    std::fs::write(
        &bad,
        r#"{"algebra":{"blocks":[1,1,1,1]},
            "action":{"builtin":"lattice_product","params":{"factors":[
                {"builtin":"cyclic_shift","params":{"n":2}},
                {"builtin":"cyclic_shift","params":{"n":2}}]}},
            "tasks":[]}"#,
    )
    .unwrap();
    let o = ncx(&["run", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_and_bad_overrides_exit_2() {
    assert_eq!(ncx(&["run", "--scenario", "/nonexistent/x.json"]).status.code(), Some(2));
    let path = scenario("pauli.json");
    let o = ncx(&["run", "--scenario", path.to_str().unwrap(), "--k-max", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_runs_a_single_suite() {
    let o = ncx(&["check", "--suite", "jordan"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("PASS"));
    assert!(text.contains("1/1 criteria passed"));
}

#[test]
fn check_rejects_unknown_suite() {
    let o = ncx(&["check", "--suite", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("unknown suite"));
}
