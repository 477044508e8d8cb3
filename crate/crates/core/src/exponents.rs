//! Growth exponents from drift tables, finite-`t` β-ratios and compression
//! envelopes.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{run_trials, Exec};
use crate::stats::RunningStats;
use crate::walks::lamplighter::{step_moment, WalkKind, WreathWalker};
use crate::walks::{DriftTable, StepLaw};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn loglog_fit_points(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::InsufficientData("log-log fit needs positive data".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(FitResult {
        slope,
        intercept,
        slope_stderr,
        x_min: points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        x_max: points.iter().map(|p| p.0).fold(0.0, f64::max),
        points: points.len(),
    })
}

/// Fit of the table rows with `n_min ≤ n ≤ n_max`.
pub fn loglog_fit(table: &DriftTable, n_min: u64, n_max: u64) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.n >= n_min && r.n <= n_max)
        .map(|r| (r.n as f64, r.mean))
        .collect();
    loglog_fit_points(&pts)
}

/// A walk whose β-ratio is measured. `ZeroSectionMatched` uses the measure
/// `μ_t` at time `t`, so `t` must be even.
#[derive(Debug, Clone, Copy)]
pub enum BetaWalk<'a> {
    Line(StepLaw<'a>),
    Wreath(WalkKind<'a>),
    ZeroSectionMatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaRow {
    pub t: u64,
    pub mean_distance: f64,
    pub mean_distance_stderr: f64,
    /// `E d(W_1, e)^p`.
    pub step_moment: f64,
    /// `ln E d(W_t, e) / ln(t E d(W_1, e)^p)`.
    pub ratio: f64,
    /// Delta-method standard error of `ratio` from the numerator.
    pub ratio_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaRatioSeries {
    pub walk: String,
    pub p: f64,
    pub rows: Vec<BetaRow>,
}

fn line_moment(law: StepLaw<'_>, p: f64) -> f64 {
    match law {
        StepLaw::Simple => 1.0,
        StepLaw::Stable(t) => t.abs_moment(p),
    }
}

fn distance_at<F>(exec: Exec, seed: u64, trials: u64, t: u64, step: F) -> RunningStats
where
    F: Fn(&mut WreathWalker, &mut ChaCha8Rng) + Sync + Send,
{
    let xs = run_trials(exec, seed, trials, |rng| {
        let mut w = WreathWalker::new();
        for _ in 0..t {
            step(&mut w, rng);
        }
        w.distance_to_identity() as f64
    });
    RunningStats::from_slice(&xs)
}

pub fn beta_ratio(walk: BetaWalk<'_>, p: f64, ts: &[u64], trials: u64, seed: u64, exec: Exec) -> Result<BetaRatioSeries> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be at least 1, got {p}")));
    }
    crate::walks::check_probes(ts)?;
    let mut rows = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let row_seed = crate::exec::derive_seed(seed, &format!("beta-{i}"));
        let (stats, moment) = match walk {
            BetaWalk::Line(law) => {
                let xs = run_trials(exec, row_seed, trials, |rng| {
                    let mut s = 0i64;
                    for _ in 0..t {
                        s += law.sample(rng);
                    }
                    s.unsigned_abs() as f64
                });
                (RunningStats::from_slice(&xs), line_moment(law, p))
            }
            BetaWalk::Wreath(kind) => {
                let moment = step_moment(kind, p, trials.max(10_000), crate::exec::derive_seed(row_seed, "moment"), exec)?;
                (distance_at(exec, row_seed, trials, t, |w, rng| kind.step(w, rng)), moment)
            }
            BetaWalk::ZeroSectionMatched => {
                let kind = WalkKind::ZeroSection(t);
                let moment = step_moment(kind, p, 1, 0, exec)?;
                (distance_at(exec, row_seed, trials, t, |w, rng| kind.step(w, rng)), moment)
            }
        };
        let denom = (t as f64 * moment).ln();
        if !(moment > 0.0) || !(denom > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "degenerate measure: t E d(W_1)^p = {} at t = {t}",
                t as f64 * moment
            )));
        }
        if !(stats.mean > 0.0) {
            return Err(Error::InsufficientData(format!("mean distance vanished at t = {t}")));
        }
        rows.push(BetaRow {
            t,
            mean_distance: stats.mean,
            mean_distance_stderr: stats.stderr(),
            step_moment: moment,
            ratio: stats.mean.ln() / denom,
            ratio_stderr: stats.stderr() / stats.mean / denom,
        });
    }
    let label = match walk {
        BetaWalk::Line(StepLaw::Simple) => "line(simple)".to_string(),
        BetaWalk::Line(StepLaw::Stable(t)) => format!("line(stable q={})", t.q),
        BetaWalk::Wreath(k) => k.label(),
        BetaWalk::ZeroSectionMatched => "zero_section(n=t)".to_string(),
    };
    Ok(BetaRatioSeries { walk: label, p, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeBucket {
    /// Distances in `[2^level, 2^{level+1})`.
    pub level: u32,
    pub count: u64,
    /// Smallest norm in the bucket and the distance where it occurs.
    pub min_norm: f64,
    pub argmin_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub buckets: Vec<EnvelopeBucket>,
    pub exponent: f64,
    pub fit: FitResult,
}

/// Lower envelope of `(distance, norm)` samples: per dyadic distance bucket,
/// the smallest norm; the exponent is the log-log slope through the bucket
/// minima, each bucket weighted equally.
pub fn envelope_from_samples(samples: &[(f64, f64)]) -> Result<EnvelopeReport> {
    let mut buckets: Vec<EnvelopeBucket> = Vec::new();
    for &(d, norm) in samples {
        if !(d >= 1.0) {
            continue;
        }
        let level = d.log2().floor() as u32;
        match buckets.iter_mut().find(|b| b.level == level) {
            Some(b) => {
                b.count += 1;
                if norm < b.min_norm {
                    b.min_norm = norm;
                    b.argmin_distance = d;
                }
            }
            None => buckets.push(EnvelopeBucket {
                level,
                count: 1,
                min_norm: norm,
                argmin_distance: d,
            }),
        }
    }
    buckets.sort_by_key(|b| b.level);
    if buckets.len() < 4 {
        return Err(Error::InsufficientData(format!("{} nonempty distance buckets, need 4", buckets.len())));
    }
    let fit = loglog_fit_points(&buckets.iter().map(|b| (b.argmin_distance, b.min_norm)).collect::<Vec<_>>())?;
    Ok(EnvelopeReport {
        buckets,
        exponent: fit.slope,
        fit,
    })
}

/// Samples pairs, evaluates `(distance, norm)` for each and fits the envelope.
pub fn compression_envelope<P, G, E, D>(
    pair_gen: G,
    embed: E,
    distance: D,
    samples: u64,
    seed: u64,
    exec: Exec,
) -> Result<EnvelopeReport>
where
    P: Send,
    G: Fn(&mut ChaCha8Rng) -> P + Sync + Send,
    E: Fn(&P) -> Result<f64> + Sync + Send,
    D: Fn(&P) -> Result<f64> + Sync + Send,
{
    let results = run_trials(exec, seed, samples, |rng| {
        let pair = pair_gen(rng);
        Ok::<_, Error>((distance(&pair)?, embed(&pair)?))
    });
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    envelope_from_samples(&points)
}
