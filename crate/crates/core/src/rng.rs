//! Seeded random sources. Every run derives independent ChaCha streams from one
//! `u64` seed, so each stochastic step (initialization, subsetting, mini-batch
//! order, data generation) can change without perturbing the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

pub mod streams {
    pub const INIT: u64 = 0;
    pub const SUBSET: u64 = 1;
    pub const BATCHES: u64 = 2;
    pub const TRAIN_DATA: u64 = 10;
    pub const TEST_DATA: u64 = 11;
    pub const VALIDATION_DATA: u64 = 12;
}

pub fn seeded(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
