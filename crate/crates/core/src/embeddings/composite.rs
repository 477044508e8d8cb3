//! `F = Ψ ⊕ f ⊕ θ` on `C₂ ≀ Z^d`: the multiscale embedding, the lamp map and
//! a snowflake of the cursor, combined in `ℓ_p`.

use crate::embeddings::jones::{jones_embed_diff_with, JonesConfig};
use crate::embeddings::snowflake::snowflake_embed_diff;
use crate::embeddings::{lamp_lp_diff, NormResult};
use crate::error::Result;
use crate::wreath::WreathElement;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeConfig {
    pub jones: JonesConfig,
    /// Snowflake exponent `ε` of the cursor block.
    pub eps: f64,
}

impl Default for CompositeConfig {
    fn default() -> Self {
        CompositeConfig {
            jones: JonesConfig::default(),
            eps: 0.25,
        }
    }
}

pub fn composite_diff(a: &WreathElement, b: &WreathElement, cfg: &CompositeConfig) -> Result<NormResult> {
    let p = cfg.jones.p;
    let psi = jones_embed_diff_with(a, b, &cfg.jones)?;
    let lamp = lamp_lp_diff(a, b, p)?;
    let snow = snowflake_embed_diff(a.cursor(), b.cursor(), cfg.eps, p)?;
    Ok(NormResult::from_powers(
        p,
        psi.value.powf(p) + lamp.powf(p) + snow.powf(p),
        psi.tail_bound.powf(p),
        psi.k_max,
        psi.k_exact,
    ))
}
