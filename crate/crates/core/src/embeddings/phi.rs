//! The embedding of the zero section of `Z ≀ Z`:
//!
//! `Φ(f) = Σ_{ℓ≥1} Σ_{k≥0} Σ_{j in band ℓ} 2^{(k+(p-1)ℓ)/p}/(k+1) · exp(2πi f(j)/2^k) e_{j,k,ℓ}`
//!
//! where band `ℓ` holds the `j` with `|j| ∈ [2^{ℓ-1}-1, 2^ℓ-1)`. For `h = f - g`,
//! `‖Φ(f) - Φ(g)‖_p^p = Σ_j Σ_k 2^{k+(p-1)ℓ(j)}/(k+1)^p |1 - exp(2πi h(j)/2^k)|^p`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::embeddings::{zeta_upper, CoordKey, NormResult, SparseVector};
use crate::error::{Error, Result};
use crate::wreath::{LampGroup, WreathElement};

/// Band index of `j`: the `ℓ ≥ 1` with `|j| ∈ [2^{ℓ-1}-1, 2^ℓ-1)`.
pub fn dyadic_level(j: i64) -> u32 {
    64 - (j.unsigned_abs() + 1).leading_zeros()
}

/// The `m` with `|v| ∈ [2^m, 2^{m+1})`, for `v ≠ 0`.
fn magnitude_level(v: i64) -> u32 {
    63 - v.unsigned_abs().leading_zeros()
}

fn zero_section_lamps(a: &WreathElement) -> Result<Vec<(i64, i64)>> {
    if a.group() != LampGroup::Z || a.dim() != 1 {
        return Err(Error::Unsupported("Φ is defined on the zero section of Z ≀ Z".into()));
    }
    if a.cursor().0[0] != 0 {
        return Err(Error::InvalidParameter("element is not in the zero section".into()));
    }
    Ok(a.lamps().iter().map(|(z, v)| (z.0[0], *v)).collect())
}

fn check_phi_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::Unsupported(format!("Φ is evaluated for p in (1, 2], got {p}")));
    }
    Ok(())
}

/// `|1 - exp(2πi h/2^k)| = 2|sin(π (h mod 2^k)/2^k)|`, with the reduction done
/// in integers.
fn chord(h: i64, k: u32) -> f64 {
    if k >= 120 {
        return 2.0 * (std::f64::consts::PI * h as f64 / 2f64.powi(k as i32)).sin().abs();
    }
    let modulus = 1i128 << k;
    let r = i128::from(h).rem_euclid(modulus);
    if r == 0 {
        return 0.0;
    }
    // Fold into [0, 1/2] so the sine argument stays small and positive.
    let folded = r.min(modulus - r) as f64 / modulus as f64;
    2.0 * (std::f64::consts::PI * folded).sin()
}

fn weight_p(k: u32, level: u32, p: f64) -> f64 {
    2f64.powf(k as f64 + (p - 1.0) * level as f64) / (k as f64 + 1.0).powf(p)
}

/// `‖Φ(f) - Φ(g)‖_p`, summing `k ≤ k_max` exactly. The remainder uses
/// `|1 - e^{iθ}| ≤ |θ|`: each term is at most
/// `2^{(p-1)ℓ} (2π|h|)^p 2^{k(1-p)} / (k_max + 2)^p`, a geometric series.
pub fn phi_embed_diff(f: &WreathElement, g: &WreathElement, p: f64, k_max: u32) -> Result<NormResult> {
    check_phi_p(p)?;
    zero_section_lamps(f)?;
    zero_section_lamps(g)?;
    let h: Vec<(i64, i64)> = f
        .lamp_diff_support(g)
        .iter()
        .map(|z| (z.0[0], f.lamp(z) - g.lamp(z)))
        .collect();
    let mut value_p = 0.0;
    let mut tail_p = 0.0;
    let ratio = 2f64.powf(1.0 - p);
    let geometric = ratio.powi(k_max as i32 + 1) / (1.0 - ratio);
    for &(j, hj) in &h {
        let level = dyadic_level(j);
        for k in 0..=k_max {
            let c = chord(hj, k);
            if c > 0.0 {
                value_p += weight_p(k, level, p) * c.powf(p);
            }
        }
        tail_p += 2f64.powf((p - 1.0) * level as f64) * (2.0 * std::f64::consts::PI * hj.unsigned_abs() as f64).powf(p)
            / (k_max as f64 + 2.0).powf(p)
            * geometric;
    }
    Ok(NormResult::from_powers(p, value_p, tail_p, k_max, k_max))
}

/// Materialises `Φ(f)` restricted to `k ≤ k_max` and `|j| ≤ j_max`.
pub fn phi_embed_window(f: &WreathElement, p: f64, k_max: u32, j_max: i64) -> Result<SparseVector> {
    check_phi_p(p)?;
    zero_section_lamps(f)?;
    let mut out = SparseVector::new(p);
    for j in -j_max..=j_max {
        let level = dyadic_level(j);
        let v = f.lamp(&crate::wreath::LatticePoint::scalar(j));
        for k in 0..=k_max {
            let w = weight_p(k, level, p).powf(1.0 / p);
            let theta = 2.0 * std::f64::consts::PI * v as f64 / 2f64.powi(k as i32);
            out.add(CoordKey::Phi { j, k, level }, Complex64::from_polar(w, theta));
        }
    }
    Ok(out)
}

/// Scale profile of a zero-section configuration: `M = max |j|` over the
/// support and `E(ℓ, m) = #{j in band ℓ : |f(j)| ∈ [2^m, 2^{m+1})}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleProfile {
    pub max_index: u64,
    pub counts: BTreeMap<(u32, u32), u64>,
    pub l1_norm: u64,
}

pub fn scale_profile(f: &WreathElement) -> Result<ScaleProfile> {
    let lamps = zero_section_lamps(f)?;
    let mut counts = BTreeMap::new();
    for &(j, v) in &lamps {
        *counts.entry((dyadic_level(j), magnitude_level(v))).or_insert(0) += 1;
    }
    Ok(ScaleProfile {
        max_index: lamps.iter().map(|(j, _)| j.unsigned_abs()).max().unwrap_or(0),
        counts,
        l1_norm: lamps.iter().map(|(_, v)| v.unsigned_abs()).sum(),
    })
}

/// Constant `c(p)` in `‖Φ(f)‖_p^p ≥ c(p) 2^{m+(p-1)ℓ}/(m+1)^p E(ℓ,m)`.
///
/// Take the single scale `k = m + 2`: for `|h| ∈ [2^m, 2^{m+1})` the phase
/// `h/2^{m+2}` has absolute value in `[1/4, 1/2)`, where
/// `|1 - e^{2πix}| = 2 sin(π|x|) ≥ √2`. The term is then at least
/// `2^{m+2+(p-1)ℓ} 2^{p/2} / (m+3)^p`, and `((m+1)/(m+3))^p` is smallest at
/// `m = 0`, so `c(p) = 4 · 2^{p/2} / 3^p`.
pub fn scale_wise_lower_constant(p: f64) -> f64 {
    4.0 * 2f64.powf(p / 2.0) / 3f64.powf(p)
}

/// A constant `C(p)` with `‖Φ(f) - Φ(g)‖_p ≤ C(p) d((f,0),(g,0))` for all
/// lamp differences representable in `i64`.
///
/// Per coordinate, `|1 - e^{iθ}| ≤ min(2, |θ|)` gives
/// `Σ_k 2^k/(k+1)^p |1 - e^{2πih/2^k}|^p ≤ K_p 2^m/(m+1)^p` for
/// `|h| ∈ [2^m, 2^{m+1})`, with `K_p` the maximum over `m ≤ 62` of the explicit
/// majorant. Then `ℓ_p ≤ ℓ_1` and Young's inequality
/// `u^{1/p} v^{(p-1)/p} ≤ u/p + (p-1)v/p` split the sum into
/// `Σ 2^m E(ℓ,m) ≤ ‖h‖₁` and `ζ(p/(p-1)) Σ_{nonempty ℓ} 2^ℓ ≤ ζ(p/(p-1)) (4M + 4)`.
/// With `d ≥ ‖h‖₁ + 2M` and `d ≥ 1`, `4M + 4 ≤ 6d`.
pub fn phi_lipschitz_constant(p: f64) -> f64 {
    let ratio = 2f64.powf(1.0 - p);
    let mut k_p: f64 = 0.0;
    for m in 0..=62u32 {
        let head: f64 = (0..=m + 1)
            .map(|k| 2f64.powi(k as i32) / (k as f64 + 1.0).powf(p))
            .sum::<f64>()
            * 2f64.powf(p);
        // Σ_{k≥m+2} 2^{k(1-p)}/(k+1)^p ≤ 2^{(m+2)(1-p)} / ((m+3)^p (1 - 2^{1-p})).
        let tail = (2.0 * std::f64::consts::PI * 2f64.powi(m as i32 + 1)).powf(p) * ratio.powi(m as i32 + 2)
            / ((m as f64 + 3.0).powf(p) * (1.0 - ratio));
        let scaled = (head + tail) * (m as f64 + 1.0).powf(p) / 2f64.powi(m as i32);
        k_p = k_p.max(scaled);
    }
    k_p.powf(1.0 / p) * (1.0 / p + 6.0 * (p - 1.0) / p * zeta_upper(p / (p - 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmgmReport {
    pub evaluated: u64,
    pub violations: u64,
    /// Smallest value of `lhs / rhs` seen.
    pub min_ratio: f64,
    pub worst: Option<(u32, u32, u64, f64)>,
}

/// Checks `2^ℓ + 2^m E^{1/p} + 2^{m/p} E^{1/p} 2^{ℓ(p-1)/p} ≥ (2^ℓ + (2^m E)^{(p+1)/(2p)})/2`
/// for `ℓ, m ∈ [0, max_level]` and `E ∈ [1, 2^ℓ]`. `E` is enumerated exhaustively
/// while `2^ℓ ≤ exhaustive_limit`; beyond that on a geometric grid with
/// `per_octave` points per doubling plus both endpoints.
pub fn amgm_check(ps: &[f64], max_level: u32, exhaustive_limit: u64, per_octave: u32) -> AmgmReport {
    let mut report = AmgmReport {
        evaluated: 0,
        violations: 0,
        min_ratio: f64::INFINITY,
        worst: None,
    };
    for &p in ps {
        for l in 0..=max_level {
            let top = 1u64 << l;
            let es: Vec<u64> = if top <= exhaustive_limit {
                (1..=top).collect()
            } else {
                let mut v: Vec<u64> = (0..=l * per_octave)
                    .map(|i| 2f64.powf(f64::from(i) / f64::from(per_octave)).round() as u64)
                    .collect();
                v.push(top);
                v.sort_unstable();
                v.dedup();
                v
            };
            for m in 0..=max_level {
                for &e in &es {
                    let (lf, mf, ef) = (f64::from(l), f64::from(m), e as f64);
                    let e_root = ef.powf(1.0 / p);
                    let lhs = 2f64.powf(lf) + 2f64.powf(mf) * e_root + 2f64.powf(mf / p) * e_root * 2f64.powf(lf * (p - 1.0) / p);
                    let rhs = 0.5 * (2f64.powf(lf) + (2f64.powf(mf) * ef).powf((p + 1.0) / (2.0 * p)));
                    let ratio = lhs / rhs;
                    report.evaluated += 1;
                    if ratio < report.min_ratio {
                        report.min_ratio = ratio;
                        report.worst = Some((l, m, e, p));
                    }
                    if lhs < rhs * (1.0 - 1e-12) {
                        report.violations += 1;
                    }
                }
            }
        }
    }
    report
}
