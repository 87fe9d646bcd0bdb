//! Interlaced self-normalized sums for ψ-mixing sequences.
//!
//! The crate is organised around the pipeline used throughout:
//!
//! ```text
//! series η_1..η_n ──plan_blocks──▶ (m, k) ──interlaced_sums──▶ Y_1..Y_k ──▶ W = ΣY / √ΣY²
//! ```
//!
//! * [`blocks`]: block geometry, interlaced sums, self-normalized and
//!   Studentized statistics, Chung thresholds, confidence intervals.
//! * [`normal`]: standard normal survival / quantile and tail-ratio diagnostics.
//! * [`sources`]: ψ-mixing data sources (finite Markov chains, i.i.d., m-dependent),
//!   exact ψ(n) for finite chains, covariance-inequality checks, moment diagnostics.
//! * [`contfrac`]: exact continued-fraction digits, Gauss measure, the π grid.
//! * [`bounds`]: moderate-deviation bound shapes, mixing rates, exponential
//!   inequality, MDP rate functional.
//! * [`engine`]: deterministic continued-fraction ratio table, Monte Carlo
//!   ratio sweeps and MDP sweeps with thread-count independent output.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod bounds;
pub mod contfrac;
pub mod engine;
mod error;
pub mod normal;
pub mod sources;
pub mod sum;

pub use error::{Error, Result};
