//! Shared inputs for the benchmarks.

use kcirc_core::montecarlo::InputLaw;
use kcirc_core::seeds::trial_rng;
use kcirc_core::InputSequence;

/// Gaussian input of length `n`, fixed by `seed`.
pub fn bench_input(n: usize, seed: u64) -> InputSequence {
    InputLaw::StandardNormal
        .sequence(n, &mut trial_rng(seed, n as u64))
        .expect("n >= 2")
}
