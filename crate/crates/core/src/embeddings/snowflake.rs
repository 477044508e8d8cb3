//! A snowflake of `Z^d`: per axis and dyadic scale `k`, two sawtooth
//! coordinates `s_{k,φ}(t) = dist(t + φ 2^k, 2^{k+2} Z)` for `φ ∈ {0, 1}`,
//! weighted by `2^{-kε}`. The sum of `ℓ_p` blocks is comparable to
//! `‖x - y‖^{1-ε}`.
//!
//! The two phases are offset by a quarter period. A half-period offset would
//! give `s_{k,1} = 2^{k+1} - s_{k,0}` and duplicate the first phase's
//! increments. With a quarter offset, the turning points of the two phases
//! interleave at spacing `2^k`, so for `2^k ≤ |t - u| < 2^{k+1}` one phase
//! changes by at least `2^k` between `t` and `u`.

use crate::embeddings::{check_p, CoordKey, SparseVector};
use crate::error::{Error, Result};
use crate::wreath::LatticePoint;
use num_complex::Complex64;

/// Scales `k = 0..SNOWFLAKE_SCALES`, enough for increments below `2^41`.
pub const SNOWFLAKE_SCALES: u32 = 42;

/// Largest admissible absolute coordinate is `2^40 - 1`.
pub const SNOWFLAKE_COORD_LIMIT: i64 = 1 << 40;

fn sawtooth(t: i64, k: u32, phase: u8) -> i64 {
    let period = 1i64 << (k + 2);
    let r = (t + i64::from(phase) * (1i64 << k)).rem_euclid(period);
    r.min(period - r)
}

fn check_point(x: &LatticePoint) -> Result<()> {
    if x.0.iter().any(|c| c.abs() >= SNOWFLAKE_COORD_LIMIT) {
        return Err(Error::Budget(format!(
            "snowflake coordinates must be below 2^40 in absolute value, got {x:?}"
        )));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// `‖θ(x) - θ(y)‖_p`.
pub fn snowflake_embed_diff(x: &LatticePoint, y: &LatticePoint, eps: f64, p: f64) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    check_p(p)?;
    check_eps(eps)?;
    check_point(x)?;
    check_point(y)?;
    let mut total = 0.0;
    for (&a, &b) in x.0.iter().zip(&y.0) {
        if a == b {
            continue;
        }
        for k in 0..SNOWFLAKE_SCALES {
            let w = 2f64.powf(-(k as f64) * eps);
            for phase in 0..2u8 {
                let diff = (sawtooth(a, k, phase) - sawtooth(b, k, phase)).abs();
                if diff != 0 {
                    total += (w * diff as f64).powf(p);
                }
            }
        }
    }
    Ok(total.powf(1.0 / p))
}

/// Materialises `θ(x)`.
pub fn snowflake_embed(x: &LatticePoint, eps: f64, p: f64) -> Result<SparseVector> {
    check_p(p)?;
    check_eps(eps)?;
    check_point(x)?;
    let mut out = SparseVector::new(p);
    for (axis, &a) in x.0.iter().enumerate() {
        for scale in 0..SNOWFLAKE_SCALES {
            let w = 2f64.powf(-(scale as f64) * eps);
            for phase in 0..2u8 {
                let v = sawtooth(a, scale, phase);
                if v != 0 {
                    out.add(CoordKey::Snowflake { axis, scale, phase }, Complex64::new(w * v as f64, 0.0));
                }
            }
        }
    }
    Ok(out)
}
