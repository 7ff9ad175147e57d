//! Deterministic seed derivation.
//!
//! Every stochastic stage takes a `u64` seed. Sub-streams (restarts, folds,
//! ensemble members) are derived with a SplitMix64 step so that changing one
//! stage never shifts the random sequence of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mixes `seed` and `stream` into an independent sub-seed.
pub fn derive(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sub_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    rng(derive(seed, stream))
}
