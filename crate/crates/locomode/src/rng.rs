//! Seed derivation for reproducible runs.
//!
//! Every stochastic operation draws from a `ChaCha8Rng` seeded through
//! [`subseed`], so independent stages (initialization, shuffling, dropout,
//! sampling, synthesis) never share a stream and runs are bit-identical per
//! root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; the documented split function for sub-seeds.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derives an independent sub-seed from a root seed and a stream tag.
pub fn subseed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Derives a sub-seed keyed by two indices (e.g. epoch and step).
pub fn subseed2(seed: u64, stream: u64, index: u64) -> u64 {
    subseed(subseed(seed, stream), index)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream tags; one per independent consumer of randomness.
pub mod stream {
    pub const INIT: u64 = 1;
    pub const SHUFFLE: u64 = 2;
    pub const DROPOUT: u64 = 3;
    pub const UNDERSAMPLE: u64 = 4;
    pub const SYNTH: u64 = 5;
}
