//! Per-trial seed derivation.
//!
//! Every trial gets its own generator seeded from `(master, index)`, so
//! results never depend on which worker ran which trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// The SplitMix64 output finalizer (a bijection on `u64`).
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-mode SplitMix64: injective in `trial_index` for a fixed master.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    splitmix64(master_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(trial_index.wrapping_add(1))))
}

pub fn trial_rng(master_seed: u64, trial_index: u64) -> TrialRng {
    TrialRng::seed_from_u64(derive_trial_seed(master_seed, trial_index))
}

/// A master seed for an auxiliary stream (e.g. a reference sample) that
/// does not collide with the primary trial streams of `master_seed`.
pub fn substream(master_seed: u64, label: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(label ^ 0x5851_f42d_4c95_7f2d))
}
