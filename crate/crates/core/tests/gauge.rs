mod common;

use ncerg::random::{random_integer_action, random_positive, random_state, SystemOptions};
use ncerg::{fixed_projector, gauge, subadditivity_check, FolnerSchedule, GaugeOptions, State};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gauge_dominates_invariant_states(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let act = common::any_system(&mut rng, 30);
        let a = random_positive(act.algebra(), &mut rng);
        let schedule = FolnerSchedule::default_for(act.group()).unwrap();
        let g = gauge(&act, &schedule, &a, &GaugeOptions { k_max: 500, tol: 1e-4 }).unwrap();
        let e = fixed_projector(&act).unwrap();
        for _ in 0..4 {
            let h = random_state(act.algebra(), &mut rng);
            let phi = State::normalized(&e.apply(h.density()).unwrap()).unwrap();
            let v = phi.value(&a).unwrap();
            for &(_, value_k) in &g.trace {
                prop_assert!(v <= value_k + 1e-10);
            }
        }
    }

    #[test]
    fn gauge_shifts_with_the_unit(seed in any::<u64>(), r in 0.0f64..3.0) {
        let mut rng = common::rng(seed);
        let act = common::any_system(&mut rng, 30);
        let a = random_positive(act.algebra(), &mut rng);
        let schedule = FolnerSchedule::default_for(act.group()).unwrap();
        let opts = GaugeOptions { k_max: 300, tol: 1e-4 };
        let g0 = gauge(&act, &schedule, &a, &opts).unwrap();
        let g1 = gauge(&act, &schedule, &a.shift(r), &opts).unwrap();
        for (p, q) in g0.trace.iter().zip(&g1.trace) {
            prop_assert!((q.1 - p.1 - r).abs() < 1e-9);
        }
    }

    #[test]
    fn interval_sums_are_subadditive(seed in any::<u64>(), k in 1usize..300, l in 1usize..300) {
        let mut rng = common::rng(seed);
        let act = random_integer_action(&SystemOptions { max_square_sum: 30, min_gap: 0.0 }, &mut rng);
        let a = random_positive(act.algebra(), &mut rng);
        let r = subadditivity_check(&act, &a, &[(k, l)]).unwrap();
        prop_assert!(r.pass, "slack {}", r.worst_slack);
    }
}

#[test]
fn finite_groups_are_exact_at_the_first_set() {
    let mut rng = common::rng(5);
    for _ in 0..20 {
        let act = ncerg::random::random_finite_action(&SystemOptions::default(), &mut rng);
        let a = random_positive(act.algebra(), &mut rng);
        let g = gauge(&act, &FolnerSchedule::full_group(), &a, &GaugeOptions::default()).unwrap();
        assert!(g.oracle_gap.unwrap() <= 1e-10);
    }
}
