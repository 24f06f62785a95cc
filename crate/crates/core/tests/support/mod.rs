#![allow(dead_code)]

pub mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<u8>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.random()).collect()).collect()
}
