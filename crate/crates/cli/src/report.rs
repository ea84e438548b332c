//! Report records and their JSON and text renderings.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::scenario::Tolerances;

/// Everything a number in the report depends on besides the task itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub system: String,
    pub algebra: Vec<usize>,
    pub group: String,
    pub schedule: String,
    pub seed: u64,
    pub k_max: usize,
    pub tolerances: Tolerances,
    pub version: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRecord {
    pub index: usize,
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub status: Status,
    /// Følner index the numbers were evaluated at, when one applies.
    pub k: Option<usize>,
    /// Tolerance of the pass verdict.
    pub tolerance: Option<f64>,
    /// Verdict of check-type tasks.
    pub pass: Option<bool>,
    pub headline: String,
    pub result: Option<Value>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Falsification {
    pub task: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub tasks: usize,
    pub executed: usize,
    pub ok: usize,
    pub failed: usize,
    pub checks: usize,
    pub checks_passed: usize,
    /// No failed task, no failed check and no falsification.
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub environment: Environment,
    pub tasks: Vec<TaskRecord>,
    pub summary: Summary,
    pub falsification: Option<Falsification>,
}

impl Report {
    pub fn new(environment: Environment, declared: usize, tasks: Vec<TaskRecord>, falsification: Option<Falsification>) -> Self {
        let ok = tasks.iter().filter(|t| t.status == Status::Ok).count();
        let checks = tasks.iter().filter(|t| t.pass.is_some()).count();
        let checks_passed = tasks.iter().filter(|t| t.pass == Some(true)).count();
        let summary = Summary {
            tasks: declared,
            executed: tasks.len(),
            ok,
            failed: tasks.len() - ok,
            checks,
            checks_passed,
            all_passed: ok == tasks.len() && checks == checks_passed && falsification.is_none(),
        };
        Self {
            environment,
            tasks,
            summary,
            falsification,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Fixed-layout summary table.
    pub fn to_text(&self) -> String {
        let e = &self.environment;
        let t = &e.tolerances;
        let mut out = String::new();
        let _ = writeln!(out, "system    {} on blocks {:?}", e.system, e.algebra);
        let _ = writeln!(out, "group     {}", e.group);
        let _ = writeln!(out, "schedule  {}", e.schedule);
        let _ = writeln!(
            out,
            "seed {}  k_max {}  tol {:.1e}  exact_tol {:.1e}  cauchy {:.1e}  cluster {:.1e}",
            e.seed, e.k_max, t.tol, t.exact_tol, t.cauchy, t.cluster
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:>3}  {:<20}  {:<6}  {:<4}  {:>8}  {:>8}  result",
            "#", "task", "status", "pass", "k", "tol"
        );
        for r in &self.tasks {
            let status = match r.status {
                Status::Ok => "ok",
                Status::Failed => "FAILED",
            };
            let pass = match r.pass {
                Some(true) => "yes",
                Some(false) => "NO",
                None => "-",
            };
            let k = r.k.map_or("-".to_string(), |k| k.to_string());
            let tol = r.tolerance.map_or("-".to_string(), |t| format!("{t:.1e}"));
            let text = match &r.error {
                Some(err) => err.as_str(),
                None => r.headline.as_str(),
            };
            let _ = writeln!(
                out,
                "{:>3}  {:<20}  {:<6}  {:<4}  {:>8}  {:>8}  {}",
                r.index, r.kind, status, pass, k, tol, text
            );
        }
        let _ = writeln!(out);
        if let Some(f) = &self.falsification {
            let _ = writeln!(out, "FALSIFIED at task {}: {}", f.task, f.message);
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} of {} tasks run, {} ok, {} failed; checks {}/{} passed; {}",
            s.executed,
            s.tasks,
            s.ok,
            s.failed,
            s.checks_passed,
            s.checks,
            if s.all_passed { "ALL PASSED" } else { "NOT PASSED" }
        );
        out
    }
}
