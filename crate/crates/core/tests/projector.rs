mod common;

use ncerg::linalg::real_spectral_norm;
use ncerg::random::{random_hermitian, random_positive};
use ncerg::{cesaro_projector, fixed_projector, folner_average, folner_sets, Element, FolnerSchedule, GroupSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fixed_projector_is_an_equivariant_conditional_expectation(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let act = common::any_system(&mut rng, 40);
        let alg = act.algebra().clone();
        let e = fixed_projector(&act).unwrap();
        let m = e.matrix();
        prop_assert!(real_spectral_norm(&(m * m - m)) < 1e-10);
        prop_assert!(real_spectral_norm(&(m - m.transpose())) < 1e-10);
        let unit = Element::unit(&alg);
        prop_assert!(e.apply(&unit).unwrap().distance(&unit).unwrap() < 1e-10);
        let x = random_hermitian(&alg, &mut rng);
        let ex = e.apply(&x).unwrap();
        prop_assert!((ex.trace() - x.trace()).norm() < 1e-10);
        for t in act.generators() {
            prop_assert!(t.apply(&ex).unwrap().distance(&ex).unwrap() < 1e-10);
            prop_assert!(e.apply(&t.apply(&x).unwrap()).unwrap().distance(&ex).unwrap() < 1e-10);
        }
        let p = random_positive(&alg, &mut rng);
        prop_assert!(e.apply(&p).unwrap().min_eigenvalue() > -1e-10);
    }

    #[test]
    fn kernel_and_cesaro_projectors_agree(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let act = common::any_system(&mut rng, 30);
        let e = fixed_projector(&act).unwrap();
        let c = cesaro_projector(&act).unwrap();
        prop_assert!(real_spectral_norm(&(e.matrix() - &c.matrix)) < 1e-6);
    }
}

#[test]
fn folner_averages_approach_the_projector() {
    let mut rng = common::rng(11);
    for _ in 0..10 {
        let act = ncerg::random::random_integer_action(
            &ncerg::random::SystemOptions { max_square_sum: 30, min_gap: 0.1 },
            &mut rng,
        );
        let x = random_hermitian(act.algebra(), &mut rng);
        let ex = fixed_projector(&act).unwrap().apply(&x).unwrap();
        let schedule = FolnerSchedule::default_for(act.group()).unwrap();
        assert_eq!(*act.group(), GroupSpec::Integers);
        let f = folner_sets(&schedule, act.group(), 4000).unwrap();
        let err = folner_average(&act, &f, &x).unwrap().distance(&ex).unwrap();
        assert!(err < 1e-3, "{err}");
    }
}
