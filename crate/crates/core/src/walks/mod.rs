//! Random walks on `Z` and on `Z ≀ Z`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{run_trials, Exec};
use crate::stats::RunningStats;

pub mod lamplighter;
pub mod stable;
pub mod tubular;

pub use lamplighter::{simulate_wreath_walk, GeneratorTriple, LineLamps, WalkKind, WreathWalker};
pub use stable::{return_probability, return_probability_sum, stable_char_fn, stable_coeffs, StableCoeffTable};
pub use tubular::{simulate_tubular, tubular_drift, tubular_geometry_check, TubularReport, TubularState};

/// Step law of a walk on `Z`.
#[derive(Debug, Clone, Copy)]
pub enum StepLaw<'a> {
    /// Uniform on `{-1, +1}`.
    Simple,
    Stable(&'a StableCoeffTable),
}

impl StepLaw<'_> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        match self {
            StepLaw::Simple => {
                if rng.gen::<bool>() {
                    1
                } else {
                    -1
                }
            }
            StepLaw::Stable(t) => t.sample(rng),
        }
    }
}

/// `S_0, …, S_n` with `S_0 = 0`.
pub fn simulate_z_walk<R: Rng + ?Sized>(law: StepLaw<'_>, n: usize, rng: &mut R) -> Vec<i64> {
    let mut positions = Vec::with_capacity(n + 1);
    let mut s = 0i64;
    positions.push(s);
    for _ in 0..n {
        s += law.sample(rng);
        positions.push(s);
    }
    positions
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeReturnStats {
    pub n: usize,
    /// `|{S_0, …, S_n}|`.
    pub range: usize,
    /// `|{k ≤ n : S_k = 0}|`.
    pub returns: usize,
}

pub fn range_and_returns(trace: &[i64]) -> RangeReturnStats {
    let mut sorted = trace.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    RangeReturnStats {
        n: trace.len().saturating_sub(1),
        range: sorted.len(),
        returns: trace.iter().filter(|&&s| s == 0).count(),
    }
}

/// `P[S_ℓ = 0]` for the simple walk, `ℓ = 0..=n`, from
/// `P[S_{2m}] = P[S_{2m-2}] (2m-1)/(2m)`.
pub fn simple_return_probabilities(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    out[0] = 1.0;
    let mut p = 1.0;
    for m in 1..=n / 2 {
        p *= (2 * m - 1) as f64 / (2 * m) as f64;
        out[2 * m] = p;
    }
    out
}

/// `E|S_n|` for the simple walk, summed over the exact binomial law.
pub fn simple_mean_abs(n: u64) -> f64 {
    // log C(n, k) accumulated incrementally to avoid overflow.
    let mut log_c = 0.0f64;
    let ln2n = n as f64 * std::f64::consts::LN_2;
    let mut total = 0.0;
    for k in 0..=n {
        if k > 0 {
            log_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        let s = (2 * k as i64 - n as i64).unsigned_abs() as f64;
        total += s * (log_c - ln2n).exp();
    }
    total
}

/// Monte Carlo estimates behind three walk inequalities on `Z`:
///
/// * `E|S_n| ≥ ¼ E|S_{[0,n]}|`,
/// * `P[R_n ≥ ½ Σ_{ℓ≤n} P[S_ℓ=0]] ≥ 1/8`,
/// * `E|S_{[0,n]}| ≥ (n+1) / (2 Σ_{ℓ≤n} P[S_ℓ=0])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub n: usize,
    pub trials: u64,
    pub return_sum: f64,
    pub mean_abs: RunningStats,
    pub mean_range: RunningStats,
    /// Per-trial `|S_n| - ¼ range`.
    pub abs_minus_quarter_range: RunningStats,
    /// Indicator of `R_n ≥ ½ Σ P`.
    pub many_returns: RunningStats,
}

impl LemmaReport {
    pub fn size_range_holds(&self, sigmas: f64) -> bool {
        let s = &self.abs_minus_quarter_range;
        s.mean >= -sigmas * s.stderr()
    }

    pub fn second_moment_holds(&self, sigmas: f64) -> bool {
        self.many_returns.mean >= 0.125 - sigmas * self.many_returns.stderr()
    }

    pub fn range_bound(&self) -> f64 {
        (self.n as f64 + 1.0) / (2.0 * self.return_sum)
    }

    pub fn range_holds(&self, sigmas: f64) -> bool {
        self.mean_range.mean >= self.range_bound() - sigmas * self.mean_range.stderr()
    }
}

/// `return_sum` is `Σ_{ℓ=0}^n P[S_ℓ = 0]`, computed by the caller from an
/// independent route (binomials or quadrature).
pub fn lemma_check(law: StepLaw<'_>, n: usize, return_sum: f64, trials: u64, seed: u64, exec: Exec) -> LemmaReport {
    let samples = run_trials(exec, seed, trials, |rng| {
        let trace = simulate_z_walk(law, n, rng);
        let stats = range_and_returns(&trace);
        (trace[n].unsigned_abs() as f64, stats.range as f64, stats.returns as f64)
    });
    let mut report = LemmaReport {
        n,
        trials,
        return_sum,
        mean_abs: RunningStats::new(),
        mean_range: RunningStats::new(),
        abs_minus_quarter_range: RunningStats::new(),
        many_returns: RunningStats::new(),
    };
    for (abs, range, returns) in samples {
        report.mean_abs.push(abs);
        report.mean_range.push(range);
        report.abs_minus_quarter_range.push(abs - 0.25 * range);
        report.many_returns.push(if returns >= 0.5 * return_sum { 1.0 } else { 0.0 });
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub n: u64,
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftTable {
    pub walk: String,
    pub rows: Vec<DriftRow>,
    /// Steps at which a tracked pointwise invariant failed (tubular chain only).
    pub violations: u64,
}

impl DriftTable {
    /// Per-probe statistics from per-trial samples, merged in trial order.
    pub(crate) fn from_samples(walk: String, probes: &[u64], samples: &[Vec<f64>], violations: u64) -> Self {
        let rows = probes
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let s = RunningStats::from_slice(&samples.iter().map(|row| row[i]).collect::<Vec<_>>());
                DriftRow {
                    n,
                    mean: s.mean,
                    stderr: s.stderr(),
                    trials: s.count,
                }
            })
            .collect();
        DriftTable { walk, rows, violations }
    }
}

/// `E|S_t|` at each probe time for a walk on `Z`.
pub fn z_walk_drift(law: StepLaw<'_>, probes: &[u64], trials: u64, seed: u64, exec: Exec) -> Result<DriftTable> {
    check_probes(probes)?;
    let horizon = *probes.last().unwrap() as usize;
    let samples = run_trials(exec, seed, trials, |rng| {
        let mut out = Vec::with_capacity(probes.len());
        let mut s = 0i64;
        let mut next = 0;
        for t in 0..=horizon as u64 {
            if t > 0 {
                s += law.sample(rng);
            }
            while next < probes.len() && probes[next] == t {
                out.push(s.unsigned_abs() as f64);
                next += 1;
            }
        }
        out
    });
    let walk = match law {
        StepLaw::Simple => "simple".to_string(),
        StepLaw::Stable(t) => format!("stable(q={})", t.q),
    };
    Ok(DriftTable::from_samples(walk, probes, &samples, 0))
}

pub(crate) fn check_probes(probes: &[u64]) -> Result<()> {
    if probes.is_empty() {
        return Err(Error::InvalidParameter("probe list is empty".into()));
    }
    if probes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("probe times must be strictly increasing".into()));
    }
    Ok(())
}

/// `2^a, 2^{a+1}, …, 2^b`.
pub fn dyadic_probes(a: u32, b: u32) -> Vec<u64> {
    (a..=b).map(|k| 1u64 << k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_examples() {
        assert_eq!(
            range_and_returns(&[0]),
            RangeReturnStats {
                n: 0,
                range: 1,
                returns: 1
            }
        );
        let r = range_and_returns(&[0, 1, 0, 1]);
        assert_eq!((r.range, r.returns), (2, 2));
    }

    #[test]
    fn simple_walk_exact_values() {
        let p = simple_return_probabilities(4);
        assert_eq!(p, vec![1.0, 0.0, 0.5, 0.0, 0.375]);
        assert!((simple_mean_abs(2) - 1.0).abs() < 1e-12);
        assert!((simple_mean_abs(3) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn zero_length_walk() {
        let mut rng = crate::exec::trial_rng(1, 0);
        assert_eq!(simulate_z_walk(StepLaw::Simple, 0, &mut rng), vec![0]);
    }
}
