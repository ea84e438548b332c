#![allow(dead_code)]

use ncerg::random::{
    random_finite_action, random_integer_action, random_lattice_action, SystemOptions,
};
use ncerg::GroupAction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A Z, Z² or finite-group system chosen by the seed.
pub fn any_system(rng: &mut ChaCha8Rng, max_square_sum: usize) -> GroupAction {
    let opts = SystemOptions {
        max_square_sum,
        min_gap: 0.0,
    };
    match rand::Rng::random_range(rng, 0..3) {
        0 => random_integer_action(&opts, rng),
        1 => random_lattice_action(2, &opts, rng),
        _ => random_finite_action(&opts, rng),
    }
}
