// SPDX-License-Identifier: Apache-2.0

//! Seed derivation for reproducible parallel streams.
//!
//! Every stochastic stream is a ChaCha8 generator keyed by a 64-bit seed
//! derived from a base seed and a path of indices, so a trajectory's draws
//! depend only on `(base, index)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `base`.
pub fn stream_seed(base: u64, index: u64) -> u64 {
    mix64(mix64(base) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Folds a path of indices into one seed: `derive(b, &[i, j]) = stream(stream(b, i), j)`.
pub fn derive(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(base, |s, &i| stream_seed(s, i))
}

pub fn rng_from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
