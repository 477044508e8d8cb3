//! Numerical laboratory for lamplighter groups `C_2 ≀ Z^d` and `Z ≀ Z^d`.
//!
//! - [`wreath`]: group law and word metric.
//! - [`tsp`]: exact and approximate travelling-salesman paths, covers, and
//!   the multiscale path bound.
//! - [`embeddings`]: difference norms of explicit `L_p` embeddings with
//!   rigorous truncation tails.
//! - [`walks`]: the discrete stable law, walks on `Z` and on `Z ≀ Z`.
//! - [`markov`]: finite reversible chains and Markov type ratios.
//! - [`exponents`]: log-log fits, drift ratios and compression envelopes.
//! - [`exec`]: sequential or rayon-parallel trial execution.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embeddings;
pub mod error;
pub mod exec;
pub mod exponents;
pub mod markov;
pub mod stats;
pub mod tsp;
pub mod walks;
pub mod wreath;

pub use error::{Error, Result};
pub use exec::Exec;
pub use wreath::{word_distance, DistanceBounds, LampGroup, LatticePoint, WreathElement};
