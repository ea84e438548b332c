//! *-automorphisms, group actions, Følner schedules and the mean-ergodic
//! projector.

mod automorphism;
mod fixed;
mod folner;
mod group;

pub use automorphism::{Automorphism, UNITARY_TOL};
pub use fixed::{
    cesaro_projector, fixed_dim, fixed_projector, CesaroProjector, FixedProjector,
    CESARO_CAUCHY_TOL, CESARO_MAX_DOUBLINGS, CESARO_MAX_SQUARINGS, KERNEL_TOL,
};
pub use folner::{
    folner_average, folner_defect, folner_sets, FolnerSchedule, ScheduleKind, Side,
    MAX_ENUMERATED_SET,
};
pub use group::{FiniteGroup, GroupAction, GroupElement, GroupSpec, GroupWord, ACTION_TOL};

use crate::algebra::{Element, HermitianFunctional};
use crate::error::Result;

/// `Θ_w(x)`.
pub fn apply(action: &GroupAction, w: &GroupWord, x: &Element) -> Result<Element> {
    action.apply(w, x)
}

/// `φ ∘ Θ_w`.
pub fn dual_apply(
    action: &GroupAction,
    w: &GroupWord,
    phi: &HermitianFunctional,
) -> Result<HermitianFunctional> {
    action.dual_apply(w, phi)
}

/// `‖[Θ_{g_n} a, b]‖` for each word `g_n`.
pub fn commutator_decay(
    action: &GroupAction,
    words: &[GroupWord],
    a: &Element,
    b: &Element,
) -> Result<Vec<f64>> {
    words
        .iter()
        .map(|w| Ok(action.apply(w, a)?.commutator(b)?.operator_norm()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Algebra, State};
    use crate::linalg::{CMat, ONE, ZERO};

    #[test]
    fn dual_of_point_mass_moves_backwards() {
        let act = GroupAction::integers(Automorphism::cyclic_shift(3).unwrap()).unwrap();
        let a = act.algebra().clone();
        let delta0 = State::point_mass(&a, 0).unwrap();
        let moved = dual_apply(&act, &GroupWord::generator(0), delta0.functional()).unwrap();
        // (δ_0 ∘ Θ)(x) = (Θx)_0 = x_1.
        assert!(moved
            .density()
            .distance(&Element::diag(&a, &[0.0, 1.0, 0.0]).unwrap())
            .unwrap()
            < 1e-15);
        let x = Element::diag(&a, &[3.0, 1.0, 2.0]).unwrap();
        let lhs = moved.pair(&x).unwrap();
        let rhs = delta0.functional().pair(&act.apply(&GroupWord::generator(0), &x).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn uniform_state_is_shift_invariant() {
        let act = GroupAction::integers(Automorphism::cyclic_shift(3).unwrap()).unwrap();
        let u = State::normalized_trace(act.algebra());
        let moved = dual_apply(&act, &GroupWord::generator(0), u.functional()).unwrap();
        assert!(moved.density_distance(u.functional()).unwrap() < 1e-15);
    }

    #[test]
    fn orbit_average_by_hand() {
        let act = GroupAction::integers(Automorphism::cyclic_shift(3).unwrap()).unwrap();
        let a = act.algebra().clone();
        let f = folner_sets(&FolnerSchedule::interval(), act.group(), 3).unwrap();
        let avg = folner_average(&act, &f, &Element::diag(&a, &[3.0, 1.0, 2.0]).unwrap()).unwrap();
        assert!(avg.distance(&Element::diag(&a, &[2.0, 2.0, 2.0]).unwrap()).unwrap() < 1e-15);
        let unit = folner_average(&act, &f, &Element::unit(&a)).unwrap();
        assert_eq!(unit, Element::unit(&a));
    }

    #[test]
    fn commutator_examples() {
        let a = Algebra::new(vec![2]).unwrap();
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let act = GroupAction::integers(Automorphism::inner(&a, vec![x]).unwrap()).unwrap();
        let words: Vec<GroupWord> = (0..6).map(|n| GroupWord::power(0, n)).collect();
        let p = Element::diag(&a, &[1.0, 0.0]).unwrap();
        assert!(commutator_decay(&act, &words, &p, &p).unwrap().iter().all(|&v| v < 1e-15));
        let e12 = Element::from_blocks(&a, vec![CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])])
            .unwrap();
        let seq = commutator_decay(&act, &words, &e12, &p).unwrap();
        assert!(seq.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        let unit = Element::unit(&a);
        assert!(commutator_decay(&act, &words, &e12, &unit).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unknown_generator_is_reported() {
        let act = GroupAction::integers(Automorphism::cyclic_shift(3).unwrap()).unwrap();
        let x = Element::unit(act.algebra());
        assert!(matches!(
            apply(&act, &GroupWord::generator(1), &x),
            Err(crate::error::Error::UnknownGenerator { index: 1, count: 1 })
        ));
    }
}
