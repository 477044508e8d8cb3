//! A symmetric integer step law in the domain of attraction of a `q`-stable
//! law, `q ∈ (1, 2)`:
//!
//! `a_0 = 1/q`, `a_{±1} = 0`, `a_{±n} = (-1)^n C(q, n) / (2q)` for `n ≥ 2`.
//!
//! Its characteristic function is
//! `φ(θ) = cos θ + (2^{q/2}/q)(1 - cos θ)^{q/2} cos(q(π - θ)/2)`. With
//! `a_0 = 1/(2q)` the masses would sum to `(2q-1)/(2q)`; `a_0 = 1/q` is the
//! value for which both the masses sum to one and `φ` above is exact.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::compensated_sum;

/// Default table cutoff.
pub const DEFAULT_CUTOFF: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableCoeffTable {
    pub q: f64,
    pub cutoff: usize,
    /// `probs[n] = a_n` for `0 ≤ n ≤ cutoff`; `a_{-n} = a_n`.
    pub probs: Vec<f64>,
    /// `Σ_{|n| > cutoff} a_n`, from the closed form `|C(q-1, N)| / q`.
    pub tail_mass: f64,
    /// Cumulative law of `|X|` restricted to `|X| ≤ cutoff` and renormalised.
    #[serde(skip)]
    magnitude_cdf: Vec<f64>,
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0 && q < 2.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (1, 2), got {q}")));
    }
    Ok(())
}

/// `|C(q-1, N)| = (q-1) Π_{k=2}^{N} (k-q)/k`.
pub fn binomial_tail(q: f64, cutoff: usize) -> f64 {
    let mut log = (q - 1.0).ln();
    for k in 2..=cutoff {
        log += ((k as f64 - q) / k as f64).ln();
    }
    log.exp()
}

pub fn stable_coeffs(q: f64, cutoff: usize) -> Result<StableCoeffTable> {
    check_q(q)?;
    if cutoff < 4 {
        return Err(Error::InvalidParameter(format!("cutoff must be at least 4, got {cutoff}")));
    }
    let mut probs = vec![0.0; cutoff + 1];
    probs[0] = 1.0 / q;
    probs[2] = (q - 1.0) / 4.0;
    for n in 2..cutoff {
        probs[n + 1] = probs[n] * (n as f64 - q) / (n as f64 + 1.0);
    }
    let tail_mass = binomial_tail(q, cutoff) / q;
    let mut magnitude_cdf = Vec::with_capacity(cutoff + 1);
    let mut acc = 0.0;
    for (n, &a) in probs.iter().enumerate() {
        acc += if n == 0 { a } else { 2.0 * a };
        magnitude_cdf.push(acc);
    }
    let total = acc;
    for c in &mut magnitude_cdf {
        *c /= total;
    }
    Ok(StableCoeffTable {
        q,
        cutoff,
        probs,
        tail_mass,
        magnitude_cdf,
    })
}

impl StableCoeffTable {
    pub fn prob(&self, n: i64) -> f64 {
        self.probs.get(n.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    /// `Σ_{|n| ≤ N} a_n`, compensated.
    pub fn table_mass(&self) -> f64 {
        compensated_sum(self.probs.iter().enumerate().map(|(n, &a)| if n == 0 { a } else { 2.0 * a }))
    }

    /// Inversion sampling of `|X|` on the renormalised table, then a fair sign.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.gen();
        let m = self.magnitude_cdf.partition_point(|&c| c <= u).min(self.cutoff) as i64;
        if m == 0 {
            0
        } else if rng.gen::<bool>() {
            m
        } else {
            -m
        }
    }

    /// `E|X|^s` under the renormalised table.
    pub fn abs_moment(&self, s: f64) -> f64 {
        let mass = self.table_mass();
        compensated_sum(self.probs.iter().enumerate().skip(1).map(|(n, &a)| 2.0 * a * (n as f64).powf(s))) / mass
    }
}

/// `φ(θ) = Σ_n a_n e^{inθ}` in closed form.
pub fn stable_char_fn(q: f64, theta: f64) -> f64 {
    let t = theta.abs();
    t.cos() + 2f64.powf(q / 2.0) / q * (1.0 - t.cos()).powf(q / 2.0) * (q * (std::f64::consts::PI - t) / 2.0).cos()
}

/// Default number of Simpson panels.
pub const DEFAULT_QUAD_PANELS: usize = 1 << 12;

const QUAD_TOLERANCE: f64 = 1e-9;

/// Composite Simpson on `[0, 1]` with `panels` (even) panels.
fn simpson(panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = 1.0 / panels as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

/// Integrates `g(θ)/π` over `[0, π]` after `θ = π u³`, which smooths the
/// `|θ|^q` cusp at the origin. Panels double until two successive values
/// agree to `1e-9`; starts from `panels`.
fn quadrature(panels: usize, g: impl Fn(f64) -> f64) -> Result<f64> {
    let integrand = |u: f64| 3.0 * u * u * g(std::f64::consts::PI * u * u * u);
    let mut panels = panels.max(2).next_multiple_of(2);
    let mut prev = simpson(panels, integrand);
    for _ in 0..4 {
        let next = simpson(2 * panels, integrand);
        let delta = (next - prev).abs();
        if delta <= QUAD_TOLERANCE {
            return Ok(next);
        }
        panels *= 2;
        prev = next;
    }
    Err(Error::NonConvergence {
        panels: panels / 2,
        doubled: panels,
        delta: (simpson(panels, integrand) - simpson(panels / 2, integrand)).abs(),
    })
}

/// `P[S_n = 0] = (1/π) ∫_0^π φ(θ)^n dθ`.
pub fn return_probability(q: f64, n: u64, panels: usize) -> Result<f64> {
    check_q(q)?;
    if n == 0 {
        return Ok(1.0);
    }
    let n = i32::try_from(n).map_err(|_| Error::InvalidParameter("n too large".into()))?;
    quadrature(panels, |theta| stable_char_fn(q, theta).powi(n))
}

/// `Σ_{ℓ=0}^{n} P[S_ℓ = 0]`, integrating the partial geometric sum of `φ`.
pub fn return_probability_sum(q: f64, n: u64, panels: usize) -> Result<f64> {
    check_q(q)?;
    quadrature(panels, |theta| {
        let phi = stable_char_fn(q, theta);
        let mut term = 1.0;
        let mut acc = 1.0;
        for _ in 0..n {
            term *= phi;
            acc += term;
        }
        acc
    })
}
