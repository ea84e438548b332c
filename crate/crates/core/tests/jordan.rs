mod common;

use ncerg::random::{random_algebra, random_functional, random_tracial_functional};
use ncerg::{functional_norm, is_tracial, jordan_decompose};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jordan_parts_reconstruct_and_add_in_norm(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let alg = random_algebra(64, &mut rng);
        let phi = random_functional(&alg, &mut rng);
        let (plus, minus) = jordan_decompose(&phi).unwrap();
        prop_assert!(plus.sub(&minus).unwrap().density_distance(&phi).unwrap() < 1e-10);
        prop_assert!((functional_norm(&plus) + functional_norm(&minus) - functional_norm(&phi)).abs() < 1e-10);
        prop_assert!(plus.is_positive(1e-12) && minus.is_positive(1e-12));
    }

    #[test]
    fn jordan_parts_of_tracial_functionals_are_tracial(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let alg = random_algebra(64, &mut rng);
        let tau = random_tracial_functional(&alg, &mut rng);
        let (plus, minus) = jordan_decompose(&tau).unwrap();
        prop_assert!(is_tracial(&plus, 1e-9) && is_tracial(&minus, 1e-9));
    }
}
