//! Counter-based randomness.
//!
//! Every random decision in a sketch is a pure function of `(seed, linear index)`,
//! so results do not depend on traversal order or on how work is split
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64 well-mixed bits for `(seed, counter)`.
///
/// Two finalizer rounds keyed on the seed; adjacent counters and adjacent
/// seeds land on unrelated outputs.
#[inline]
pub fn counter_bits(seed: u64, counter: u64) -> u64 {
    let key = mix64(seed.wrapping_add(GOLDEN));
    mix64(mix64(counter.wrapping_mul(GOLDEN) ^ key).wrapping_add(key.rotate_left(29)))
}

/// Uniform draw in `[0, 1)` attached to one tensor cell.
#[inline]
pub fn per_entry_uniform(seed: u64, linear_index: u64) -> f64 {
    (counter_bits(seed, linear_index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Derives an independent child seed from a parent seed and a stream tag.
#[inline]
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    counter_bits(seed ^ 0xA076_1D64_78BD_642F, stream)
}

/// Seed for trial `trial` at budget `budget` of an experiment seeded with `seed`.
pub fn trial_seed(seed: u64, budget: u64, trial: u64) -> u64 {
    derive_seed(derive_seed(seed, budget), trial)
}

/// Conventional sequential RNG for generators and restarts.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
