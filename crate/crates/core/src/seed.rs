//! Seed derivation for reproducible runs.
//!
//! All randomness flows from one master seed. Per-sample seeds come from the
//! SplitMix64 output function, so samples can be generated in any order (or
//! in parallel) without changing their bytes. Generators are ChaCha8 keyed by
//! an explicit 32-byte expansion of the seed; nothing depends on a library's
//! private seeding scheme.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th sample of a run: the `index`-th SplitMix64 output
/// of the master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_mul(GAMMA)))
}

/// Deterministic generator keyed by the seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        let word = splitmix64(seed.wrapping_add((i as u64 + 1).wrapping_mul(GAMMA)));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
