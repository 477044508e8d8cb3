//! Trial execution: a data-parallel path over rayon and a sequential fallback.
//!
//! Every trial draws from its own RNG stream keyed by `(seed, trial)` and
//! results are collected in trial order, so output does not depend on the
//! execution mode or the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Falls back to sequential when the `parallel` feature is off.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Independent stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Mixes a label into a seed so that distinct experiments sharing a master
/// seed do not reuse streams.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, then a splitmix finaliser.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Evaluates `f(i)` for `i in 0..n`, returning results in index order.
pub fn map_indexed<T, F>(exec: Exec, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Runs `trials` seeded trials; trial `i` receives `trial_rng(seed, i)`.
pub fn run_trials<T, F>(exec: Exec, seed: u64, trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync + Send,
{
    map_indexed(exec, trials, |i| f(&mut trial_rng(seed, i)))
}
