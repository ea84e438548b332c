mod common;

use ncerg::random::{random_hermitian, random_state, random_tracial_functional};
use ncerg::{dual_apply, is_tracial, Element, GroupWord, State};
use proptest::prelude::*;
use rand::Rng;

fn random_word(rng: &mut impl Rng, generators: usize, len: usize) -> GroupWord {
    let letters = (0..len)
        .map(|_| (rng.random_range(0..generators), if rng.random_bool(0.5) { 1 } else { -1 }))
        .collect();
    GroupWord::new(letters).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn automorphisms_are_unital_multiplicative_isometric(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let act = common::any_system(&mut rng, 40);
        let alg = act.algebra().clone();
        let x = random_hermitian(&alg, &mut rng).add(&random_hermitian(&alg, &mut rng).scale(ncerg::linalg::I)).unwrap();
        let y = random_hermitian(&alg, &mut rng);
        for t in act.generators() {
            let txy = t.apply(&x.mul(&y).unwrap()).unwrap();
            let txty = t.apply(&x).unwrap().mul(&t.apply(&y).unwrap()).unwrap();
            prop_assert!(txy.distance(&txty).unwrap() < 1e-10);
            let adj = t.apply(&x.adjoint()).unwrap().distance(&t.apply(&x).unwrap().adjoint()).unwrap();
            prop_assert!(adj < 1e-10);
            prop_assert!((t.apply(&x).unwrap().operator_norm() - x.operator_norm()).abs() < 1e-10);
            prop_assert!(t.apply(&Element::unit(&alg)).unwrap().distance(&Element::unit(&alg)).unwrap() < 1e-10);
            prop_assert!((t.apply(&x).unwrap().trace() - x.trace()).norm() < 1e-10);
        }
    }

    #[test]
    fn words_compose_and_invert(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let act = common::any_system(&mut rng, 30);
        let ng = act.group().num_generators();
        let v = random_word(&mut rng, ng, 4);
        let w = random_word(&mut rng, ng, 4);
        let x = random_hermitian(act.algebra(), &mut rng);
        let vw = act.apply(&v.concat(&w), &x).unwrap();
        let v_of_w = act.apply(&v, &act.apply(&w, &x).unwrap()).unwrap();
        prop_assert!(vw.distance(&v_of_w).unwrap() < 1e-9);
        let back = act.apply(&w.inverse(), &act.apply(&w, &x).unwrap()).unwrap();
        prop_assert!(back.distance(&x).unwrap() < 1e-9);
    }

    #[test]
    fn dual_action_preserves_states_and_traces(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let act = common::any_system(&mut rng, 40);
        let alg = act.algebra().clone();
        let w = random_word(&mut rng, act.group().num_generators(), 3);
        let phi = random_state(&alg, &mut rng);
        let moved = dual_apply(&act, &w, phi.functional()).unwrap();
        prop_assert!(State::new(moved.clone()).is_ok());
        let x = random_hermitian(&alg, &mut rng);
        let lhs = moved.pair(&x).unwrap();
        let rhs = phi.functional().pair(&act.apply(&w, &x).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
        let tau = random_tracial_functional(&alg, &mut rng);
        prop_assert!(is_tracial(&dual_apply(&act, &w, &tau).unwrap(), 1e-10));
    }
}
