//! The gauge `Γ(a) = lim_k ‖Avg_{F_k} a‖` along a right Følner schedule, and
//! the verdicts built on it.
//!
//! For positive `a` the gauge equals `m(a|S^G) = λ_max(E a)`. Every result
//! reports the Følner estimate and the spectral value side by side; the
//! latter never replaces the former.

mod ergodicity;
mod model;

use serde::{Deserialize, Serialize};

pub use ergodicity::{strict_ergodicity, unique_ergodicity, UniqueErgodicityOptions, UniqueErgodicityReport};
pub use model::{model_check, positive_spanning_set, BlockPlacement, CStarModel, Embedding, ModelCheckOptions, ModelElementReport, ModelVerdict, Witness};

use crate::algebra::Element;
use crate::dynamics::{
    fixed_projector, folner_average, folner_sets, Automorphism, FolnerSchedule, GroupAction,
    GroupSpec, ScheduleKind, Side,
};
use crate::error::{Error, Result};
use crate::linalg::RMat;

/// Steps between from-scratch refreshes of `Θ^k a` in the interval sum.
pub const REFRESH_INTERVAL: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeOptions {
    pub k_max: usize,
    /// Cauchy tolerance over the last three evaluation points.
    pub tol: f64,
}

impl Default for GaugeOptions {
    fn default() -> Self {
        Self {
            k_max: 100_000,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GaugeResult {
    /// `(k, ‖Avg_{F_k} a‖)` at every evaluation point.
    pub trace: Vec<(usize, f64)>,
    pub estimate: f64,
    pub converged: bool,
    pub k_used: usize,
    /// `λ_max(E a)` when a fixed-point projector exists.
    pub oracle_value: Option<f64>,
    pub oracle_gap: Option<f64>,
    /// `max k·|value_k − estimate|` over the second half of the trace, so
    /// that the observed error is at most `rate_constant / k`.
    pub rate_constant: f64,
    /// Largest generator Følner defect of `F_{k_used}` on the schedule side.
    pub folner_defect: f64,
    pub side: Side,
    pub schedule: String,
}

/// Evaluation points `1, …, 16`, then geometric with ratio 1.25, ending at
/// `k_max`.
pub fn evaluation_grid(k_max: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = (1..=k_max.min(16)).collect();
    let mut k = 16usize;
    while k < k_max {
        k = ((k as f64 * 1.25).ceil() as usize).min(k_max);
        grid.push(k);
    }
    grid
}

/// `Σ_{j<k} T^j x` by binary doubling: `S_{2m} = S_m + T^m S_m` and
/// `S_{m+1} = S_m + T^m x`.
pub(crate) fn interval_sum(t: &Automorphism, x: &Element, k: u64) -> Element {
    let mut s = Element::zero(x.algebra());
    let mut p = Automorphism::identity(x.algebra());
    if k == 0 {
        return s;
    }
    for bit in (0..64 - k.leading_zeros()).rev() {
        let shifted = p.apply_unchecked(&s);
        s.add_assign(&shifted);
        p = p.compose_unchecked(&p);
        if (k >> bit) & 1 == 1 {
            s.add_assign(&p.apply_unchecked(x));
            p = p.compose_unchecked(t);
        }
    }
    s
}

/// `Σ_{j<k} M^j` by the same doubling.
pub(crate) fn interval_sum_matrix(m: &RMat, k: u64) -> RMat {
    let d = m.nrows();
    let mut s = RMat::zeros(d, d);
    let mut p = RMat::identity(d, d);
    if k == 0 {
        return s;
    }
    for bit in (0..64 - k.leading_zeros()).rev() {
        s = &s + &p * &s;
        p = &p * &p;
        if (k >> bit) & 1 == 1 {
            s += &p;
            p = &p * m;
        }
    }
    s
}

/// Box sum `Σ_{e ∈ {0..k-1}^d} Θ_1^{e_1} ⋯ Θ_d^{e_d} x`, factorized into
/// commuting interval sums.
pub(crate) fn box_sum(generators: &[Automorphism], x: &Element, k: u64) -> Element {
    generators
        .iter()
        .fold(x.clone(), |acc, t| interval_sum(t, &acc, k))
}

/// Built-in schedules are two-sided Følner on the groups they accept, so only
/// explicit left schedules on non-abelian groups leave the theory; they are
/// run as experiments and flagged by `side` in the result.
pub(crate) fn check_schedule(action: &GroupAction, schedule: &FolnerSchedule) -> Result<()> {
    schedule.check_compatible(action.group())
}

/// `Γ(a)` along `schedule`.
pub fn gauge(
    action: &GroupAction,
    schedule: &FolnerSchedule,
    a: &Element,
    opts: &GaugeOptions,
) -> Result<GaugeResult> {
    action.algebra().check_same(a.algebra())?;
    if !a.is_positive(1e-10) {
        return Err(Error::NotPositive(a.min_eigenvalue()));
    }
    check_schedule(action, schedule)?;
    if opts.k_max == 0 {
        return Err(Error::EmptyFolnerSet);
    }
    let group = action.group();
    let mut trace = Vec::new();
    let mut running_min = false;
    match (&schedule.kind, group) {
        (ScheduleKind::Interval, _) => {
            running_min = true;
            let t = &action.generators()[0];
            let grid = evaluation_grid(opts.k_max);
            let mut next = 0;
            let mut cur = a.clone();
            let mut sum = Element::zero(a.algebra());
            for k in 1..=opts.k_max {
                sum.add_assign(&cur);
                if k == grid[next] {
                    trace.push((k, sum.operator_norm() / k as f64));
                    next += 1;
                    if next == grid.len() {
                        break;
                    }
                }
                cur = if k % REFRESH_INTERVAL == 0 {
                    t.pow(k as i64).apply_unchecked(a)
                } else {
                    t.apply_unchecked(&cur)
                };
            }
        }
        (ScheduleKind::Box, _) => {
            let d = group.num_generators() as i32;
            for k in evaluation_grid(opts.k_max) {
                let s = box_sum(action.generators(), a, k as u64);
                trace.push((k, s.operator_norm() / (k as f64).powi(d)));
            }
        }
        (ScheduleKind::FullGroup, GroupSpec::Finite(_)) => {
            let f = folner_sets(schedule, group, 1)?;
            trace.push((1, folner_average(action, &f, a)?.operator_norm()));
        }
        (ScheduleKind::Explicit(sets), _) => {
            for k in 1..=sets.len().min(opts.k_max) {
                let f = folner_sets(schedule, group, k)?;
                trace.push((k, folner_average(action, &f, a)?.operator_norm()));
            }
        }
        _ => unreachable!("compatibility checked"),
    }
    let (k_used, last) = *trace.last().expect("at least one evaluation");
    let estimate = if running_min {
        trace.iter().map(|t| t.1).fold(f64::INFINITY, f64::min)
    } else {
        last
    };
    let converged = match &schedule.kind {
        ScheduleKind::FullGroup => true,
        _ if trace.len() >= 3 => {
            let tail = &trace[trace.len() - 3..];
            let hi = tail.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
            let lo = tail.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
            hi - lo <= opts.tol
        }
        _ => false,
    };
    let oracle_value = if group.has_fixed_projector() {
        Some(fixed_projector(action)?.apply(a)?.max_eigenvalue())
    } else {
        None
    };
    let folner_defect = schedule
        .generator_defects(group, k_used)?
        .into_iter()
        .fold(0.0, f64::max);
    let rate_constant = trace[trace.len() / 2..]
        .iter()
        .map(|&(k, v)| k as f64 * (v - estimate).abs())
        .fold(0.0, f64::max);
    Ok(GaugeResult {
        trace,
        estimate,
        converged,
        k_used,
        oracle_value,
        oracle_gap: oracle_value.map(|o| (estimate - o).abs()),
        rate_constant,
        folner_defect,
        side: schedule.side,
        schedule: schedule.describe(),
    })
}

/// One sampled pair of the subadditivity check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubadditivityPair {
    pub k: usize,
    pub l: usize,
    pub s_k: f64,
    pub s_l: f64,
    pub s_kl: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubadditivityReport {
    pub pass: bool,
    /// `min (s_k + s_l − s_{k+l})` over the pairs.
    pub worst_slack: f64,
    pub pairs: Vec<SubadditivityPair>,
}

/// Checks `s_{k+l} ≤ s_k + s_l + 1e-9` for `s_k = ‖Σ_{j<k} Θ^j a‖`.
pub fn subadditivity_check(
    action: &GroupAction,
    a: &Element,
    pairs: &[(usize, usize)],
) -> Result<SubadditivityReport> {
    if *action.group() != GroupSpec::Integers {
        return Err(Error::UnsupportedGroup("subadditivity is checked for Z-actions".into()));
    }
    action.algebra().check_same(a.algebra())?;
    if !a.is_positive(1e-10) {
        return Err(Error::NotPositive(a.min_eigenvalue()));
    }
    let t = &action.generators()[0];
    let s = |k: usize| interval_sum(t, a, k as u64).operator_norm();
    let mut out = Vec::with_capacity(pairs.len());
    let mut worst = f64::INFINITY;
    for &(k, l) in pairs {
        let p = SubadditivityPair {
            k,
            l,
            s_k: s(k),
            s_l: s(l),
            s_kl: s(k + l),
        };
        worst = worst.min(p.s_k + p.s_l - p.s_kl);
        out.push(p);
    }
    Ok(SubadditivityReport {
        pass: worst >= -1e-9,
        worst_slack: worst,
        pairs: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::dynamics::FiniteGroup;
    use crate::linalg::{CMat, C64, ONE, ZERO};

    fn shift3() -> GroupAction {
        GroupAction::integers(Automorphism::cyclic_shift(3).unwrap()).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = evaluation_grid(100);
        assert_eq!(&g[..16], &(1..=16).collect::<Vec<_>>()[..]);
        assert_eq!(*g.last().unwrap(), 100);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(evaluation_grid(5), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn doubling_sums_match_direct_sums() {
        let t = Automorphism::cyclic_shift(5).unwrap();
        let x = Element::diag(t.algebra(), &[1.0, 2.0, 4.0, 8.0, 16.0]).unwrap();
        for k in [1u64, 2, 3, 7, 12, 33] {
            let mut direct = Element::zero(x.algebra());
            let mut cur = x.clone();
            for _ in 0..k {
                direct.add_assign(&cur);
                cur = t.apply(&cur).unwrap();
            }
            assert!(interval_sum(&t, &x, k).distance(&direct).unwrap() < 1e-12);
            let m = t.action_matrix();
            let lhs = interval_sum_matrix(&m, k) * x.hermitian_coords();
            assert!((lhs - direct.hermitian_coords()).norm() < 1e-10);
        }
    }

    #[test]
    fn gauge_of_unit_is_one() {
        let act = shift3();
        let r = gauge(&act, &FolnerSchedule::interval(), &Element::unit(act.algebra()), &GaugeOptions { k_max: 50, tol: 1e-9 }).unwrap();
        assert!(r.trace.iter().all(|t| (t.1 - 1.0).abs() < 1e-14));
        assert!((r.estimate - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gauge_cyclic_shift() {
        let act = shift3();
        let a = Element::diag(act.algebra(), &[3.0, 1.0, 2.0]).unwrap();
        let r = gauge(&act, &FolnerSchedule::interval(), &a, &GaugeOptions { k_max: 3000, tol: 1e-3 }).unwrap();
        assert!((r.estimate - 2.0).abs() < 1e-12);
        for &(k, v) in &r.trace {
            if k % 3 == 0 {
                assert!((v - 2.0).abs() < 1e-12);
            }
        }
        assert!(r.oracle_gap.unwrap() < 1e-12);
    }

    #[test]
    fn gauge_pauli_full_group() {
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
        let a = Element::from_blocks(
            &m2,
            vec![CMat::from_row_slice(
                2,
                2,
                &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.1, 0.0), C64::new(0.7, 0.0)],
            )],
        )
        .unwrap();
        let r = gauge(&act, &FolnerSchedule::full_group(), &a, &GaugeOptions::default()).unwrap();
        assert_eq!(r.k_used, 1);
        assert!((r.estimate - 0.6).abs() < 1e-14);
    }

    #[test]
    fn non_positive_input_is_rejected() {
        let act = shift3();
        let a = Element::diag(act.algebra(), &[1.0, -1.0, 0.0]).unwrap();
        assert!(matches!(
            gauge(&act, &FolnerSchedule::interval(), &a, &GaugeOptions::default()),
            Err(Error::NotPositive(_))
        ));
    }

    #[test]
    fn subadditivity_examples() {
        let act = shift3();
        let a = Element::diag(act.algebra(), &[3.0, 1.0, 2.0]).unwrap();
        let r = subadditivity_check(&act, &a, &[(2, 1)]).unwrap();
        assert!(r.pass);
        let p = r.pairs[0];
        assert!((p.s_k - 5.0).abs() < 1e-12 && (p.s_l - 3.0).abs() < 1e-12 && (p.s_kl - 6.0).abs() < 1e-12);

        let alg = Algebra::diagonal(2).unwrap();
        let id = GroupAction::identity(&alg);
        let b = Element::diag(&alg, &[0.5, 1.5]).unwrap();
        let r = subadditivity_check(&id, &b, &[(3, 4)]).unwrap();
        assert!(r.pass && r.worst_slack.abs() < 1e-12);
    }
}
