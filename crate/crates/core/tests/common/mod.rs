#![allow(dead_code, unused_imports)]

pub use fairdiv::random::{
    any_density, random_density, random_piece, random_profile, unit_rational,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
