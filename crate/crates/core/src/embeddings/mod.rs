//! Difference norms of explicit `L_p` embeddings of lamplighter groups.
//!
//! Every embedding here is an infinite sum over scales or positions. The
//! evaluators sum an explicit finite part and bound the remainder with a
//! closed-form majorant, reported as a [`NormResult`].

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wreath::{LatticePoint, WreathElement};

pub mod composite;
pub mod cube;
pub mod jones;
pub mod phi;
pub mod snowflake;

pub use composite::{composite_diff, CompositeConfig};
pub use cube::{cube_composite_diff, cube_embed_diff, cube_lower_exponent};
pub use jones::{jones_embed_diff, jones_embed_diff_with, jones_lipschitz_bound, JonesConfig};
pub use phi::{amgm_check, phi_embed_diff, phi_lipschitz_constant, scale_profile, scale_wise_lower_constant, AmgmReport, ScaleProfile};
pub use snowflake::{snowflake_embed_diff, SNOWFLAKE_SCALES};

/// A truncated norm with a rigorous bound on the omitted part:
/// the true norm lies in `[value, (value^p + tail_bound^p)^{1/p}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub p: f64,
    pub value: f64,
    pub tail_bound: f64,
    /// Truncation parameter (largest scale, or radius for the cube embedding).
    pub k_max: u32,
    /// Largest truncation index summed exactly; indices above it up to
    /// `k_max` are bounded rather than summed.
    pub k_exact: u32,
}

impl NormResult {
    pub fn upper(&self) -> f64 {
        (self.value.powf(self.p) + self.tail_bound.powf(self.p)).powf(1.0 / self.p)
    }

    pub(crate) fn from_powers(p: f64, value_p: f64, tail_p: f64, k_max: u32, k_exact: u32) -> Self {
        NormResult {
            p,
            value: value_p.max(0.0).powf(1.0 / p),
            tail_bound: tail_p.max(0.0).powf(1.0 / p),
            k_max,
            k_exact,
        }
    }
}

/// Canonical identifier of a restricted lamp configuration: the sorted list of
/// nonzero `(position, value)` pairs inside the domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatchId(pub Vec<(LatticePoint, i64)>);

impl PatchId {
    pub fn restrict(f: &WreathElement, inside: impl Fn(&LatticePoint) -> bool) -> Self {
        PatchId(
            f.lamps()
                .iter()
                .filter(|(z, _)| inside(z))
                .map(|(z, v)| (z.clone(), *v))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CoordKey {
    Jones { y: LatticePoint, k: u32, patch: PatchId },
    Cube { y: LatticePoint, r: u64, patch: PatchId },
    Phi { j: i64, k: u32, level: u32 },
    Lamp { j: LatticePoint },
    Snowflake { axis: usize, scale: u32, phase: u8 },
}

/// Finitely supported vector in `ℓ_p` over [`CoordKey`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    pub p: f64,
    entries: BTreeMap<CoordKey, Complex64>,
}

impl SparseVector {
    pub fn new(p: f64) -> Self {
        SparseVector {
            p,
            entries: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, key: CoordKey, v: Complex64) {
        let e = self.entries.entry(key.clone()).or_insert(Complex64::new(0.0, 0.0));
        *e += v;
        if e.norm_sqr() == 0.0 {
            self.entries.remove(&key);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&CoordKey, &Complex64)> {
        self.entries.iter()
    }

    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.add(k.clone(), -*v);
        }
        out
    }

    pub fn norm_p(&self) -> f64 {
        self.entries
            .values()
            .map(|v| v.norm().powf(self.p))
            .sum::<f64>()
            .powf(1.0 / self.p)
    }
}

/// The lamp map `f ↦ f ∈ ℓ_p(Z^d)`: `(Σ_z d_G(f(z), g(z))^p)^{1/p}`.
pub fn lamp_lp_diff(a: &WreathElement, b: &WreathElement, p: f64) -> Result<f64> {
    if a.group() != b.group() {
        return Err(Error::LampGroupMismatch);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    check_p(p)?;
    let g = a.group();
    Ok(a.lamp_diff_support(b)
        .iter()
        .map(|z| (g.norm(a.lamp(z) - b.lamp(z)) as f64).powf(p))
        .sum::<f64>()
        .powf(1.0 / p))
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be at least 1, got {p}")));
    }
    Ok(())
}

/// `|B(e, r)|` for the ℓ¹ ball in `Z^d`: `Σ_i 2^i C(d,i) C(r,i)`; zero for `r < 0`.
pub fn l1_ball_count(d: usize, r: i64) -> f64 {
    if r < 0 {
        return 0.0;
    }
    let r = r as f64;
    let mut total = 0.0;
    let mut binom_d = 1.0;
    let mut binom_r = 1.0;
    for i in 0..=d {
        if i > 0 {
            binom_d *= (d - i + 1) as f64 / i as f64;
            binom_r *= (r - (i - 1) as f64) / i as f64;
        }
        if binom_r <= 0.0 {
            break;
        }
        total += 2f64.powi(i as i32) * binom_d * binom_r;
    }
    total
}

/// The ℓ¹ diameter of a point set (0 when empty).
pub(crate) fn l1_diameter(points: &[&LatticePoint]) -> u64 {
    let mut best = 0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(a.l1_dist(b));
        }
    }
    best
}

/// Upper bound on `ζ(s)` for `s > 1`.
pub(crate) fn zeta_upper(s: f64) -> f64 {
    const N: u32 = 10_000;
    let head: f64 = (1..=N).map(|n| f64::from(n).powf(-s)).sum();
    head + f64::from(N).powf(1.0 - s) / (s - 1.0)
}
