mod common;

use ncerg::random::{random_hermitian, random_positive, random_state};
use ncerg::{
    fixed_projector, krylov_bogolyubov, m_max, maximizing_face, ConvexBodySpec, Element,
    FolnerSchedule, GroupAction, OptimizeOptions, State,
};
use ncerg::optimize::invariance_residual;
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

/// `E(h)/tr` for a random positive `h`: an invariant state.
fn random_invariant_state(act: &GroupAction, rng: &mut ChaCha8Rng) -> State {
    let h = random_state(act.algebra(), rng);
    State::normalized(&fixed_projector(act).unwrap().apply(h.density()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_value_is_attained_and_dominates(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let act = common::any_system(&mut rng, 40);
        let a = random_hermitian(act.algebra(), &mut rng);
        let r = m_max(&act, &a, &ConvexBodySpec::SG, &OptimizeOptions::default()).unwrap();
        prop_assert!((r.maximizer.value(&a).unwrap() - r.value).abs() < 1e-8);
        prop_assert!(invariance_residual(&act, r.maximizer.functional()).unwrap() < 1e-10);
        for _ in 0..4 {
            let phi = random_invariant_state(&act, &mut rng);
            prop_assert!(phi.value(&a).unwrap() <= r.value + 1e-10);
        }
        let t = m_max(&act, &a, &ConvexBodySpec::TG, &OptimizeOptions::default()).unwrap();
        prop_assert!(t.value <= r.value + 1e-10);
        prop_assert!(t.maximizer.is_tracial(1e-10));
    }

    #[test]
    fn value_is_monotone_and_translation_covariant(seed in any::<u64>(), shift in 0.0f64..5.0) {
        let mut rng = common::rng(seed);
        let act = common::any_system(&mut rng, 40);
        let a = random_hermitian(act.algebra(), &mut rng);
        let p = random_positive(act.algebra(), &mut rng);
        let o = OptimizeOptions::default();
        let m = |x: &Element| m_max(&act, x, &ConvexBodySpec::SG, &o).unwrap().value;
        prop_assert!(m(&a.add(&p).unwrap()) >= m(&a) - 1e-10);
        prop_assert!((m(&a.shift(shift)) - m(&a) - shift).abs() < 1e-10);
    }

    #[test]
    fn face_contains_exactly_the_states_under_its_projector(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let act = common::any_system(&mut rng, 40);
        let a = random_hermitian(act.algebra(), &mut rng);
        let (value, face, _) = maximizing_face(&act, &a, 1e-8).unwrap();
        let e = fixed_projector(&act).unwrap();
        let p = &face.projector;
        prop_assert!(e.apply(p).unwrap().distance(p).unwrap() < 1e-8);
        let h = random_positive(act.algebra(), &mut rng);
        let compressed = p.mul(&h).unwrap().mul(p).unwrap();
        let phi = State::normalized(&e.apply(&compressed).unwrap()).unwrap();
        prop_assert!((phi.value(&a).unwrap() - value).abs() < 1e-7);
    }

    #[test]
    fn krylov_bogolyubov_defect_is_bounded(seed in any::<u64>(), k in 1usize..200) {
        let mut rng = common::rng(seed);
        let act = common::any_system(&mut rng, 30);
        let schedule = FolnerSchedule::default_for(act.group()).unwrap();
        let k = if matches!(act.group(), ncerg::GroupSpec::Lattice { .. }) { k.min(20) } else { k };
        let tau = State::normalized_trace(act.algebra());
        let r = krylov_bogolyubov(&act, &random_state(act.algebra(), &mut rng), &schedule, k).unwrap();
        prop_assert!(r.defect <= r.bound() + 1e-10);
        let t = krylov_bogolyubov(&act, &tau, &schedule, k).unwrap();
        prop_assert!(t.state.is_tracial(1e-10));
    }
}
