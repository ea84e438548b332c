//! Task execution.

use ncerg::optimize::OptimizeOptions;
use ncerg::{
    commutator_decay, exposing_observable, extreme_invariant_states, functional_norm, gauge,
    is_tracial, jordan_decompose, krylov_bogolyubov, m_max, maximizing_face, model_check,
    quotient_correspondence_check, strict_ergodicity, subadditivity_check, unique_ergodicity,
    ConvexBodySpec, FolnerSchedule, GaugeOptions, GroupWord, HermitianFunctional,
    ModelCheckOptions, ScheduleKind, Side, State, UniqueErgodicityOptions,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::report::{Environment, Falsification, Report, Status, TaskRecord};
use crate::scenario::{task_rng, Scenario, ScenarioError, TaskSpec};

/// Lengths sampled by `subadditivity_check` when none are given.
pub const DEFAULT_PAIRS: &[(usize, usize)] = &[(1, 1), (1, 2), (2, 3), (3, 5), (4, 4), (5, 8), (7, 13), (16, 16)];

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Run tasks on the rayon pool; the report is identical either way.
    pub parallel: bool,
    /// Keep full convergence traces in the results.
    pub verbose: bool,
}

struct Outcome {
    k: Option<usize>,
    tolerance: Option<f64>,
    pass: Option<bool>,
    headline: String,
    result: Value,
}

enum Failure {
    Core(ncerg::Error),
    Input(ScenarioError),
}

impl From<ncerg::Error> for Failure {
    fn from(e: ncerg::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Input(e)
    }
}

impl Failure {
    fn falsified(&self) -> bool {
        matches!(self, Failure::Core(ncerg::Error::Falsified(_)))
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Input(e) => e.to_string(),
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

/// Drops a bulky field unless traces were requested.
fn strip(mut v: Value, field: &str, verbose: bool) -> Value {
    if !verbose {
        if let Value::Object(m) = &mut v {
            m.remove(field);
        }
    }
    v
}

fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

/// Executes every task of the scenario.
///
/// A failing task is recorded and the run continues, except that a
/// falsified consistency assertion ends the run after the offending task.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Report {
    let n = scenario.tasks.len();
    let exec = |i: usize| (i, execute(scenario, i, opts.verbose));
    let mut results: Vec<(usize, Result<Outcome, Failure>)> = if opts.parallel {
        (0..n).into_par_iter().map(exec).collect()
    } else {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let r = exec(i);
            let stop = matches!(&r.1, Err(f) if f.falsified());
            out.push(r);
            if stop {
                break;
            }
        }
        out
    };
    let mut falsification = None;
    if let Some(pos) = results.iter().position(|(_, r)| matches!(r, Err(f) if f.falsified())) {
        results.truncate(pos + 1);
        if let Err(f) = &results[pos].1 {
            falsification = Some(Falsification {
                task: pos,
                message: f.message(),
            });
        }
    }
    let records = results
        .into_iter()
        .map(|(i, r)| {
            let kind = scenario.tasks[i].name();
            match r {
                Ok(o) => TaskRecord {
                    index: i,
                    kind,
                    status: Status::Ok,
                    k: o.k,
                    tolerance: o.tolerance,
                    pass: o.pass,
                    headline: o.headline,
                    result: Some(o.result),
                    error: None,
                },
                Err(f) => TaskRecord {
                    index: i,
                    kind,
                    status: Status::Failed,
                    k: None,
                    tolerance: None,
                    pass: None,
                    headline: String::new(),
                    result: None,
                    error: Some(f.message()),
                },
            }
        })
        .collect();
    Report::new(environment(scenario), n, records, falsification)
}

pub fn environment(scenario: &Scenario) -> Environment {
    Environment {
        system: scenario.system.clone(),
        algebra: scenario.action.algebra().block_dims().to_vec(),
        group: scenario.action.group().name(),
        schedule: scenario.schedule.describe(),
        seed: scenario.seed,
        k_max: scenario.tolerances.k_max,
        tolerances: scenario.tolerances,
        version: env!("CARGO_PKG_VERSION"),
    }
}

fn execute(sc: &Scenario, index: usize, verbose: bool) -> Result<Outcome, Failure> {
    let action = &sc.action;
    let alg = action.algebra();
    let tol = &sc.tolerances;
    let rng = &mut task_rng(sc.seed, index);
    let path = format!("tasks[{index}]");
    let field = |f: &str| format!("{path}.{f}");
    let optimize = OptimizeOptions {
        cluster_tol: tol.cluster,
        restarts: 8,
        seed: sc.seed ^ index as u64,
    };
    let exact_schedule = matches!(sc.schedule.kind, ScheduleKind::FullGroup);
    Ok(match &sc.tasks[index] {
        TaskSpec::Gauge { a, k_max } => {
            let a = a.resolve(alg, rng, &field("a"))?;
            let k_max = k_max.unwrap_or(tol.k_max);
            let r = gauge(action, &sc.schedule, &a, &GaugeOptions { k_max, tol: tol.cauchy })?;
            let t = if exact_schedule { tol.exact_tol } else { tol.tol };
            let headline = match (r.oracle_value, r.oracle_gap) {
                (Some(o), Some(g)) => format!("estimate {:.6}  oracle {o:.6}  gap {}", r.estimate, sci(g)),
                _ => format!("estimate {:.6}", r.estimate),
            };
            Outcome {
                k: Some(r.k_used),
                tolerance: Some(t),
                pass: r.oracle_gap.map(|g| g <= t),
                headline,
                result: strip(to_value(&r), "trace", verbose),
            }
        }
        TaskSpec::MMax { a, body } => {
            let a = a.resolve(alg, rng, &field("a"))?;
            let body = body.resolve(alg, rng, &field("body"))?;
            let r = m_max(action, &a, &body, &optimize)?;
            let mut headline = format!("value {:.8}  method {:?}", r.value, r.method);
            if let Some(u) = r.upper_bound {
                headline.push_str(&format!("  upper bound {u:.8}"));
            }
            Outcome {
                k: None,
                tolerance: Some(tol.cluster),
                pass: None,
                headline,
                result: to_value(&r),
            }
        }
        TaskSpec::MaximizingFace { a } => {
            let a = a.resolve(alg, rng, &field("a"))?;
            let (value, face, maximizer) = maximizing_face(action, &a, tol.cluster)?;
            Outcome {
                k: None,
                tolerance: Some(tol.cluster),
                pass: None,
                headline: format!("value {value:.8}  face dimension {}", face.affine_dim),
                result: serde_json::json!({ "value": value, "face": face, "maximizer": maximizer }),
            }
        }
        TaskSpec::Jordan { functional } => {
            let d = functional.resolve(alg, rng, &field("functional"))?;
            let phi = HermitianFunctional::new(d)?;
            let (plus, minus) = jordan_decompose(&phi)?;
            let reconstruction = functional_norm(&plus.sub(&minus)?.sub(&phi)?);
            let norm = functional_norm(&phi);
            let (np, nm) = (functional_norm(&plus), functional_norm(&minus));
            let norm_gap = (norm - np - nm).abs();
            let tracial_input = is_tracial(&phi, 1e-9);
            let parts_tracial = is_tracial(&plus, 1e-9) && is_tracial(&minus, 1e-9);
            let pass = reconstruction <= tol.exact_tol && norm_gap <= tol.exact_tol && (!tracial_input || parts_tracial);
            Outcome {
                k: None,
                tolerance: Some(tol.exact_tol),
                pass: Some(pass),
                headline: format!(
                    "‖φ‖ {norm:.6} = {np:.6} + {nm:.6}  reconstruction {}  tracial {tracial_input}/{parts_tracial}",
                    sci(reconstruction)
                ),
                result: serde_json::json!({
                    "plus": plus, "minus": minus, "norm": norm, "norm_plus": np, "norm_minus": nm,
                    "reconstruction_error": reconstruction, "norm_gap": norm_gap,
                    "tracial_input": tracial_input, "parts_tracial": parts_tracial,
                }),
            }
        }
        TaskSpec::Kb { seed_state, k } => {
            let s = seed_state.resolve(alg, rng, &field("seed_state"))?;
            let r = krylov_bogolyubov(action, &s, &sc.schedule, *k)?;
            let tracial_seed = s.is_tracial(1e-9);
            let tracial_out = r.state.is_tracial(1e-9);
            let bound = r.bound();
            let pass = r.defect <= bound + tol.exact_tol && (!tracial_seed || tracial_out);
            Outcome {
                k: Some(*k),
                tolerance: Some(tol.exact_tol),
                pass: Some(pass),
                headline: format!(
                    "defect {}  bound {}  |F_k| {}  tracial {tracial_seed}/{tracial_out}",
                    sci(r.defect),
                    sci(bound),
                    r.set_size
                ),
                result: serde_json::json!({ "kb": r, "bound": bound, "tracial_seed": tracial_seed, "tracial_output": tracial_out }),
            }
        }
        TaskSpec::UniqueErgodicity { k_max } => {
            let o = UniqueErgodicityOptions {
                k_max: k_max.unwrap_or(tol.k_max),
                tol: tol.tol,
            };
            let r = unique_ergodicity(action, &sc.schedule, &o)?;
            Outcome {
                k: Some(r.k_used),
                tolerance: Some(tol.tol),
                pass: Some(r.structural_unique == r.empirical_unique),
                headline: format!(
                    "unique {}  dim Fix {}  residual {}  persistent {}",
                    r.structural_unique,
                    r.fixed_dim,
                    sci(r.final_residual),
                    sci(r.persistent_residual)
                ),
                result: strip(to_value(&r), "residual_trace", verbose),
            }
        }
        TaskSpec::StrictErgodicity {} => {
            let strict = strict_ergodicity(action)?;
            Outcome {
                k: None,
                tolerance: None,
                pass: None,
                headline: format!("strictly ergodic {strict}"),
                result: serde_json::json!({ "strictly_ergodic": strict }),
            }
        }
        TaskSpec::ExposingObservable { state } => {
            let extremes = extreme_invariant_states(action)?;
            let targets: Vec<State> = match state {
                Some(s) => vec![s.resolve(alg, rng, &field("state"))?],
                None => extremes.clone(),
            };
            let mut items = Vec::with_capacity(targets.len());
            let mut worst: f64 = 0.0;
            let mut all_points = true;
            for phi in &targets {
                let x = exposing_observable(action, phi)?;
                let r = m_max(action, &x, &ConvexBodySpec::SG, &optimize)?;
                let affine_dim = r.face.as_ref().map(|f| f.affine_dim);
                let maximizer_distance = r.maximizer.density().distance(phi.density())?;
                let mut other: f64 = 0.0;
                for psi in &extremes {
                    if psi.density().distance(phi.density())? > 1e-8 {
                        other = other.max(psi.value(&x)?.abs());
                    }
                }
                let value_error = (r.value - 1.0).abs();
                worst = worst.max(value_error).max(maximizer_distance).max(other);
                all_points &= affine_dim == Some(0);
                items.push(serde_json::json!({
                    "state": phi, "observable": x, "value": r.value, "affine_dim": affine_dim,
                    "maximizer_distance": maximizer_distance, "max_other_value": other,
                }));
            }
            Outcome {
                k: None,
                tolerance: Some(tol.exact_tol),
                pass: Some(all_points && worst <= tol.exact_tol),
                headline: format!(
                    "{} of {} extreme states exposed  worst error {}",
                    targets.len(),
                    extremes.len(),
                    sci(worst)
                ),
                result: serde_json::json!({ "extreme_states": extremes.len(), "exposed": items }),
            }
        }
        TaskSpec::QuotientCheck { kernel, a } => {
            let a = a.resolve(alg, rng, &field("a"))?;
            let r = quotient_correspondence_check(action, kernel, &a)?;
            Outcome {
                k: None,
                tolerance: Some(tol.exact_tol),
                pass: Some(r.difference <= tol.exact_tol),
                headline: format!(
                    "quotient {:.8}  annihilator {:.8}  difference {}",
                    r.quotient_value,
                    r.annihilator_value,
                    sci(r.difference)
                ),
                result: to_value(&r),
            }
        }
        TaskSpec::ModelCheck { elements, k_max, .. } => {
            let model = sc.models[index].as_ref().expect("validated at parse time");
            let elements = elements
                .as_ref()
                .map(|es| {
                    es.iter()
                        .enumerate()
                        .map(|(i, e)| e.resolve(alg, rng, &format!("{path}.elements[{i}]")))
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            let k_max = k_max.unwrap_or(tol.k_max);
            let o = ModelCheckOptions {
                gauge: GaugeOptions { k_max, tol: tol.cauchy },
                tol: tol.tol,
            };
            let v = model_check(model, elements.as_deref(), &o)?;
            let mut headline = format!(
                "(iii) {}  simplex {}  unique {}  implication checked {}",
                v.condition_iii, v.simplex_proxy, v.unique_ergodic, v.implication_checked
            );
            if let Some(w) = &v.witness {
                headline.push_str(&format!("  witness gap {:.6}", w.gap));
            }
            let k = if FolnerSchedule::default_for(model.ambient().group()).map(|s| s.kind) == Some(ScheduleKind::FullGroup) {
                1
            } else {
                k_max
            };
            Outcome {
                k: Some(k),
                tolerance: Some(tol.tol),
                pass: Some(v.kernel_formula_holds),
                headline,
                result: to_value(&v),
            }
        }
        TaskSpec::CommutatorDecay { a, b, words, n } => {
            let a = a.resolve(alg, rng, &field("a"))?;
            let b = b.resolve(alg, rng, &field("b"))?;
            let words: Vec<GroupWord> = match (words, n) {
                (Some(ws), _) => ws.clone(),
                (None, Some(n)) => (1..=*n as i64).map(|j| GroupWord::power(0, j)).collect(),
                (None, None) => Vec::new(),
            };
            let values = commutator_decay(action, &words, &a, &b)?;
            let last = values.last().copied().unwrap_or(0.0);
            let max = values.iter().copied().fold(0.0, f64::max);
            Outcome {
                k: Some(words.len()),
                tolerance: None,
                pass: None,
                headline: format!("{} words  max {}  last {}", words.len(), sci(max), sci(last)),
                result: serde_json::json!({ "words": words, "norms": values }),
            }
        }
        TaskSpec::SubadditivityCheck { a, pairs } => {
            let a = a.resolve(alg, rng, &field("a"))?;
            let pairs = pairs.clone().unwrap_or_else(|| DEFAULT_PAIRS.to_vec());
            let r = subadditivity_check(action, &a, &pairs)?;
            Outcome {
                k: pairs.iter().map(|&(k, l)| k + l).max(),
                tolerance: Some(1e-9),
                pass: Some(r.pass),
                headline: format!("{} pairs  worst slack {}", r.pairs.len(), sci(r.worst_slack)),
                result: to_value(&r),
            }
        }
        TaskSpec::FolnerDefect { k } => {
            let group = action.group();
            let left = FolnerSchedule::new(Side::Left, sc.schedule.kind.clone()).generator_defects(group, *k)?;
            let right = FolnerSchedule::new(Side::Right, sc.schedule.kind.clone()).generator_defects(group, *k)?;
            let size = sc.schedule.set_size(group, *k)?;
            let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
            Outcome {
                k: Some(*k),
                tolerance: None,
                pass: None,
                headline: format!("|F_k| {size}  left {}  right {}", sci(max(&left)), sci(max(&right))),
                result: serde_json::json!({ "set_size": size, "left": left, "right": right }),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn report(text: &str) -> Report {
        run(&parse_scenario(text).unwrap(), &RunOptions::default())
    }

    #[test]
    fn pauli_gauge_is_half_the_trace() {
        let r = report(
            r#"{
            "action": {"builtin": "pauli_z2z2"},
            "tasks": [
                {"type": "unique_ergodicity"},
                {"type": "gauge", "a": {"real_blocks": [[[3, 1], [1, 1]]]}}
            ]
        }"#,
        );
        assert!(r.summary.all_passed, "{}", r.to_text());
        let g = r.tasks[1].result.as_ref().unwrap();
        assert!((g["estimate"].as_f64().unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r.tasks[0].result.as_ref().unwrap()["structural_unique"], true);
    }

    #[test]
    fn cyclic_shift_subadditivity_passes() {
        let r = report(r#"{"action": {"builtin": "cyclic_shift", "params": {"n": 3}}, "tasks": [{"type": "subadditivity_check"}]}"#);
        assert_eq!(r.tasks[0].pass, Some(true));
    }

    #[test]
    fn infeasible_task_does_not_stop_the_run() {
        let r = report(
            r#"{
            "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
            "tasks": [
                {"type": "m_max", "a": {"diag": [1, 0, 0]}, "body": {"kind": "ann_set", "elements": [{"unit": 1}]}},
                {"type": "strict_ergodicity"}
            ]
        }"#,
        );
        assert_eq!(r.tasks[0].status, Status::Failed);
        assert!(r.tasks[0].error.as_ref().unwrap().contains("infeasible"));
        assert_eq!(r.tasks[1].status, Status::Ok);
        assert!(!r.summary.all_passed);
    }

    #[test]
    fn parallel_and_sequential_reports_agree() {
        let text = r#"{
            "action": {"builtin": "two_orbit"},
            "seed": 11,
            "tasks": [
                {"type": "kb", "k": 3},
                {"type": "gauge", "a": {"random": "positive"}, "k_max": 500},
                {"type": "exposing_observable"},
                {"type": "folner_defect", "k": 10},
                {"type": "m_max", "a": {"random": "hermitian"}, "body": {"kind": "ann_ideal", "blocks": [0, 1]}}
            ]
        }"#;
        let s = parse_scenario(text).unwrap();
        let a = run(&s, &RunOptions::default()).to_json();
        let b = run(&s, &RunOptions { parallel: true, verbose: false }).to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn two_orbit_model_produces_a_witness() {
        let r = report(
            r#"{
            "action": {"builtin": "two_orbit"},
            "tasks": [{
                "type": "model_check",
                "ambient": {"action": {"builtin": "two_orbit"}},
                "embedding": [{"sources": [0]}, {"sources": [1]}, {"sources": [2]}, {"sources": [3]}],
                "k_max": 1000
            }]
        }"#,
        );
        let v = r.tasks[0].result.as_ref().unwrap();
        assert_eq!(v["condition_iii"], false);
        assert!(v["witness"]["gap"].as_f64().unwrap() >= 0.1);
    }

    #[test]
    fn explicit_left_schedule_is_reported_as_left() {
        let r = report(
            r#"{
            "action": {"builtin": "cyclic_shift", "params": {"n": 4}},
            "schedule": {"side": "left", "sets": [[[]], [[], [[0, 1]]]]},
            "tasks": [{"type": "gauge", "a": {"diag": [1, 0, 0, 0]}}]
        }"#,
        );
        let g = r.tasks[0].result.as_ref().unwrap();
        assert_eq!(g["side"], "left");
        assert_eq!(r.tasks[0].k, Some(2));
    }
}
