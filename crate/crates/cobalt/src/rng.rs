//! Deterministic stream splitting for seeded randomness.
//!
//! Every random choice in a trial (initial design, per-function observation
//! noise, fit subsampling, ...) draws from its own stream derived from the
//! trial seed and a label, so changing how often one consumer draws never
//! perturbs the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer; good avalanche for seed derivation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix_label(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = splitmix64(seed);
    for &b in label.as_bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ index)
}

/// A seeded RNG for the stream `(seed, label, index)`.
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(mix_label(seed, label, index))
}
