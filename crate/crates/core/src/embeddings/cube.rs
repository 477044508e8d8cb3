//! The cube embedding of `G ≀ Z^d`:
//!
//! `F₀(f,x) = Σ_y Σ_{r≥0} c(‖x-y‖∞, r) v_{y, r, f↾(y+[-r,r]^d)}`,
//! `c(D, r) = max(1 - 2r/(1+D), 0) / (1 + D^γ)`.
//!
//! At `(y, r)` the patches of `f` and `g` differ exactly when the cube
//! `y + [-r,r]^d` meets `Δ = supp(f - g)`. Those coordinates all lie within
//! `2ρ + 1` of the cursors, where `ρ` is the ℓ∞ reach of `Δ` from either cursor,
//! so the infinite remainder only carries `|c_a - c_b|^p` terms from a cursor
//! displacement, which are summable when `γ > (d+1-p)/p`.

use crate::embeddings::{check_p, NormResult};
use crate::error::{Error, Result};
use crate::wreath::{LatticePoint, WreathElement};

fn coefficient(dist: u64, r: u64, gamma: f64) -> f64 {
    let df = dist as f64;
    let lin = 1.0 - 2.0 * r as f64 / (1.0 + df);
    if lin <= 0.0 {
        0.0
    } else {
        lin / (1.0 + df.powf(gamma))
    }
}

/// The exponent `(d + 1 - γp) / (dp)` of the lower bound this embedding
/// yields against the word metric.
pub fn cube_lower_exponent(d: usize, p: f64, gamma: f64) -> f64 {
    let d = d as f64;
    (d + 1.0 - gamma * p) / (d * p)
}

/// `‖F₀(a) - F₀(b)‖_p`, summing every `(y, r)` with
/// `max(‖y-x‖∞, ‖y-x'‖∞) ≤ 2 r_max` exactly and bounding the rest.
pub fn cube_embed_diff(a: &WreathElement, b: &WreathElement, p: f64, gamma: f64, r_max: u32) -> Result<NormResult> {
    if a.group() != b.group() {
        return Err(Error::LampGroupMismatch);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    check_p(p)?;
    let d = a.dim();
    let threshold = (d as f64 + 1.0 - p) / p;
    if !(gamma > threshold) {
        return Err(Error::Unsupported(format!(
            "gamma = {gamma} must exceed (d+1-p)/p = {threshold} for the remainder to converge"
        )));
    }
    let (x, xp) = (a.cursor(), b.cursor());
    let delta = a.lamp_diff_support(b);
    let rho = delta
        .iter()
        .map(|z| z.linf_dist(x).max(z.linf_dist(xp)))
        .max()
        .unwrap_or(0);
    let s = x.linf_dist(xp);
    let window = 2 * u64::from(r_max);
    if window < (2 * rho + 1).max(2 * s) {
        return Err(Error::Budget(format!(
            "r_max = {r_max} must exceed both the lamp reach {rho} and the cursor gap {s}"
        )));
    }

    // Enumerate y in the bounding box of the two ℓ∞ balls of radius `window`.
    let w = window as i64;
    let start: Vec<i64> = (0..d).map(|i| x.0[i].min(xp.0[i]) - w).collect();
    let end: Vec<i64> = (0..d).map(|i| x.0[i].max(xp.0[i]) + w).collect();
    let mut y = LatticePoint::new(start.clone());
    let mut value_p = 0.0;
    loop {
        let da = y.linf_dist(x);
        let db = y.linf_dist(xp);
        if da.max(db) <= window {
            // Radii below `first_hit` see identical patches.
            let first_hit = delta.iter().map(|z| z.linf_dist(&y)).min().unwrap_or(u64::MAX);
            let mut r = 0u64;
            loop {
                let ca = coefficient(da, r, gamma);
                let cb = coefficient(db, r, gamma);
                if ca == 0.0 && cb == 0.0 {
                    break;
                }
                value_p += if r < first_hit {
                    (ca - cb).abs().powf(p)
                } else {
                    ca.powf(p) + cb.powf(p)
                };
                r += 1;
            }
        }
        let mut axis = 0;
        loop {
            if axis == d {
                let tail_p = remainder(d, p, gamma, s, window);
                return Ok(NormResult::from_powers(p, value_p, tail_p, r_max, r_max));
            }
            if y.0[axis] < end[axis] {
                y.0[axis] += 1;
                break;
            }
            y.0[axis] = start[axis];
            axis += 1;
        }
    }
}

/// Bound on `Σ |c_a - c_b|^p` over `y` with `max(‖y-x‖∞, ‖y-x'‖∞) > window`,
/// where `s = ‖x - x'‖∞`.
///
/// Put `t = ‖y - x‖∞ ≥ window + 1 - s` and `D = min(‖y-x‖∞, ‖y-x'‖∞) ≥ t - s`.
/// For fixed `r`, `D ↦ c(D, r)` has derivative at most
/// `2r / ((1+D)^2 D^γ) + γ / D^{γ+1}`; nonzero terms have `2r ≤ 1 + D + s`,
/// so `|c_a - c_b| ≤ s (1 + s + γ) / D^{γ+1}`, with at most `(t + 2s)/2 + 1`
/// radii per `y` and at most `2d (2t+1)^{d-1}` points at ℓ∞ distance `t`.
fn remainder(d: usize, p: f64, gamma: f64, s: u64, window: u64) -> f64 {
    if s == 0 {
        return 0.0;
    }
    let sf = s as f64;
    let lip = (sf * (1.0 + sf + gamma)).powf(p);
    let df = d as f64;
    let term = |t: f64| -> f64 {
        let shell = 2.0 * df * (2.0 * t + 1.0).powf(df - 1.0);
        let radii = (t + 2.0 * sf) / 2.0 + 1.0;
        shell * radii * lip / (t - sf).powf((gamma + 1.0) * p)
    };
    let t0 = (window + 1).saturating_sub(s).max(s + 1) as f64;
    const EXPLICIT: u32 = 100_000;
    let mut total = 0.0;
    for i in 0..EXPLICIT {
        total += term(t0 + f64::from(i));
    }
    // For t ≥ t1 each factor is bounded by a multiple of its leading power,
    // giving K t^{-β} with β = (γ+1)p - d > 1.
    let t1 = t0 + f64::from(EXPLICIT);
    let beta = (gamma + 1.0) * p - df;
    let k = 2.0 * df
        * 2f64.powf(df - 1.0)
        * (1.0 + 1.0 / (2.0 * t1)).powf(df - 1.0)
        * 0.5
        * (1.0 + (2.0 * sf + 2.0) / t1)
        * lip
        / (1.0 - sf / t1).powf((gamma + 1.0) * p);
    total + k * (t1 - 1.0).powf(1.0 - beta) / (beta - 1.0)
}

/// `(‖x - x'‖_p^p + ‖F₀(a) - F₀(b)‖_p^p)^{1/p}`: the cube embedding with the
/// cursor coordinates appended.
pub fn cube_composite_diff(a: &WreathElement, b: &WreathElement, p: f64, gamma: f64, r_max: u32) -> Result<NormResult> {
    let f = cube_embed_diff(a, b, p, gamma, r_max)?;
    let cursor_p: f64 = a
        .cursor()
        .0
        .iter()
        .zip(&b.cursor().0)
        .map(|(u, v)| (u.abs_diff(*v) as f64).powf(p))
        .sum();
    Ok(NormResult::from_powers(
        p,
        f.value.powf(p) + cursor_p,
        f.tail_bound.powf(p),
        f.k_max,
        f.k_exact,
    ))
}
