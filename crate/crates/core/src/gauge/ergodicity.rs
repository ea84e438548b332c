use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{check_schedule, evaluation_grid, interval_sum_matrix};
use crate::algebra::{Element, State};
use crate::dynamics::{
    fixed_dim, fixed_projector, folner_sets, FolnerSchedule, GroupAction, GroupSpec, ScheduleKind,
};
use crate::error::{Error, Result};
use crate::linalg::RMat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniqueErgodicityOptions {
    pub k_max: usize,
    /// Empirical verdict: unique iff the final residual is at most `tol`.
    pub tol: f64,
}

impl Default for UniqueErgodicityOptions {
    fn default() -> Self {
        Self {
            k_max: 10_000,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UniqueErgodicityReport {
    /// `dim Fix = 1`.
    pub structural_unique: bool,
    pub fixed_dim: usize,
    /// The invariant state, present iff `structural_unique`.
    pub unique_state: Option<State>,
    /// `(k, max_x ‖Avg_{F_k} x − φ(x)1‖)` over the Hermitian basis, with `φ`
    /// the unique state or the normalized trace.
    pub residual_trace: Vec<(usize, f64)>,
    pub final_residual: f64,
    /// `max_x min_k ‖Avg_{F_k} x − φ(x)1‖`: bounded below when not unique.
    pub persistent_residual: f64,
    pub empirical_unique: bool,
    pub strictly_ergodic: bool,
    pub k_used: usize,
    pub schedule: String,
}

/// Averaging operators `(k, A_k)` on Hermitian coordinates.
fn averaging_matrices(
    action: &GroupAction,
    schedule: &FolnerSchedule,
    k_max: usize,
) -> Result<Vec<(usize, RMat)>> {
    let ms = action.generator_matrices();
    let d = action.algebra().hermitian_dim();
    let axis_avg = |m: &RMat, k: usize| interval_sum_matrix(m, k as u64) / k as f64;
    let out = match (&schedule.kind, action.group()) {
        (ScheduleKind::Interval, _) => evaluation_grid(k_max)
            .into_iter()
            .map(|k| (k, axis_avg(&ms[0], k)))
            .collect(),
        (ScheduleKind::Box, _) => evaluation_grid(k_max)
            .into_iter()
            .map(|k| {
                let a = ms
                    .iter()
                    .fold(RMat::identity(d, d), |acc, m| acc * axis_avg(m, k));
                (k, a)
            })
            .collect(),
        (ScheduleKind::FullGroup, GroupSpec::Finite(_)) => {
            let elems = action
                .element_automorphisms()
                .expect("finite actions carry their elements");
            let sum = elems
                .iter()
                .fold(RMat::zeros(d, d), |acc, t| acc + t.action_matrix());
            vec![(1, sum / elems.len() as f64)]
        }
        (ScheduleKind::Explicit(sets), _) => {
            let group = action.group();
            (1..=sets.len().min(k_max))
                .map(|k| {
                    let f = folner_sets(schedule, group, k)?;
                    let mut seen = std::collections::HashSet::new();
                    let mut sum = RMat::zeros(d, d);
                    for w in &f {
                        if seen.insert(group.reduce(w)?) {
                            sum += action.automorphism(w)?.action_matrix();
                        }
                    }
                    Ok((k, sum / seen.len() as f64))
                })
                .collect::<Result<_>>()?
        }
        _ => unreachable!("compatibility checked"),
    };
    Ok(out)
}

/// Structural verdict `dim Fix = 1` against the empirical uniform
/// convergence of Følner averages of the Hermitian basis.
///
/// # Errors
/// `Falsified` when the two verdicts disagree.
pub fn unique_ergodicity(
    action: &GroupAction,
    schedule: &FolnerSchedule,
    opts: &UniqueErgodicityOptions,
) -> Result<UniqueErgodicityReport> {
    if !action.group().has_fixed_projector() {
        return Err(Error::UnsupportedGroup(format!(
            "{} has no fixed-point projector",
            action.group().name()
        )));
    }
    check_schedule(action, schedule)?;
    if opts.k_max == 0 {
        return Err(Error::EmptyFolnerSet);
    }
    let alg = action.algebra();
    let dim = fixed_dim(action)?;
    let structural_unique = dim == 1;
    // The unit is always fixed, so a one-dimensional fixed space is the
    // scalars and the invariant state is the normalized trace.
    let reference = if structural_unique {
        let e1 = fixed_projector(action)?.apply(&Element::unit(alg))?;
        State::normalized(&e1)?
    } else {
        State::normalized_trace(alg)
    };
    let h = reference.density().hermitian_coords();
    let u = Element::unit(alg).hermitian_coords();
    let n = alg.hermitian_dim();
    let mut per_basis_min = vec![f64::INFINITY; n];
    let mut residual_trace = Vec::new();
    for (k, a) in averaging_matrices(action, schedule, opts.k_max)? {
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let col: DVector<f64> = a.column(j) - &u * h[j];
            let r = Element::from_hermitian_coords(alg, col.as_slice())?.operator_norm();
            per_basis_min[j] = per_basis_min[j].min(r);
            worst = worst.max(r);
        }
        residual_trace.push((k, worst));
    }
    let (k_used, final_residual) = *residual_trace.last().expect("nonempty grid");
    let empirical_unique = final_residual <= opts.tol;
    if empirical_unique != structural_unique {
        return Err(Error::Falsified(format!(
            "dim Fix = {dim} but the Følner residual at k = {k_used} is {final_residual:.3e}"
        )));
    }
    let strictly_ergodic = structural_unique && reference.is_faithful(1e-10);
    Ok(UniqueErgodicityReport {
        structural_unique,
        fixed_dim: dim,
        unique_state: structural_unique.then_some(reference),
        residual_trace,
        final_residual,
        persistent_residual: per_basis_min.into_iter().fold(0.0, f64::max),
        empirical_unique,
        strictly_ergodic,
        k_used,
        schedule: schedule.describe(),
    })
}

/// Unique ergodicity with a faithful invariant state.
pub fn strict_ergodicity(action: &GroupAction) -> Result<bool> {
    if !action.group().has_fixed_projector() {
        return Err(Error::UnsupportedGroup(format!(
            "{} has no fixed-point projector",
            action.group().name()
        )));
    }
    let e = fixed_projector(action)?;
    if e.dim() != 1 {
        return Ok(false);
    }
    let s = State::normalized(&e.apply(&Element::unit(action.algebra()))?)?;
    Ok(s.is_faithful(1e-10))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::dynamics::{Automorphism, FiniteGroup};
    use crate::linalg::{CMat, ONE, ZERO};

    #[test]
    fn cyclic_shift_is_uniquely_ergodic() {
        let act = GroupAction::integers(Automorphism::cyclic_shift(4).unwrap()).unwrap();
        let r = unique_ergodicity(&act, &FolnerSchedule::interval(), &UniqueErgodicityOptions::default()).unwrap();
        assert!(r.structural_unique && r.empirical_unique && r.strictly_ergodic);
        let u = r.unique_state.unwrap();
        assert!(u.density().distance(&Element::diag(act.algebra(), &[0.25; 4]).unwrap()).unwrap() < 1e-12);
        assert!(strict_ergodicity(&act).unwrap());
    }

    #[test]
    fn trivial_action_is_not() {
        let alg = Algebra::diagonal(2).unwrap();
        let act = GroupAction::identity(&alg);
        let r = unique_ergodicity(&act, &FolnerSchedule::interval(), &UniqueErgodicityOptions { k_max: 100, tol: 1e-3 }).unwrap();
        assert!(!r.structural_unique && !r.empirical_unique);
        assert!(r.persistent_residual >= 0.5 - 1e-12);
        assert!(!strict_ergodicity(&act).unwrap());
    }

    #[test]
    fn pauli_is_strictly_ergodic() {
        let m2 = Algebra::new(vec![2]).unwrap();
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let z = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let act = GroupAction::finite(
            FiniteGroup::abelian(&[2, 2]).unwrap(),
            vec![
                Automorphism::inner(&m2, vec![x]).unwrap(),
                Automorphism::inner(&m2, vec![z]).unwrap(),
            ],
        )
        .unwrap();
        let r = unique_ergodicity(&act, &FolnerSchedule::full_group(), &UniqueErgodicityOptions::default()).unwrap();
        assert!(r.structural_unique && r.final_residual < 1e-12 && r.strictly_ergodic);
    }

    #[test]
    fn two_orbits_keep_a_residual() {
        let alg = Algebra::diagonal(4).unwrap();
        let act = GroupAction::integers(Automorphism::permutation(&alg, vec![1, 0, 3, 2]).unwrap()).unwrap();
        let r = unique_ergodicity(&act, &FolnerSchedule::interval(), &UniqueErgodicityOptions::default()).unwrap();
        assert_eq!(r.fixed_dim, 2);
        assert!(r.persistent_residual >= 0.25 - 1e-12);
    }
}
