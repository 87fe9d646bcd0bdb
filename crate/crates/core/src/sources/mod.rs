//! ψ-mixing data sources.
//!
//! Finite-state Markov chains are the exactly analysable case: with a
//! stationary start their ψ coefficient on one-coordinate events is
//! `max_{x,y} |P^n(x,y)/π(y) - 1|`, which [`psi_coefficient`] evaluates
//! directly. For a stationary chain this is also the full ψ(n) of the
//! chain's path σ-fields: by the Markov property conditioning on the past
//! only acts through the current state, and every future event is a
//! π-mixture of events started at the state `n` steps ahead, so the ratio
//! `P(A | past)/P(A)` is a convex combination of `P^n(x,y)/π(y)`. The code
//! certifies the one-coordinate value; the extension is the argument above.

mod markov;
mod moments;
pub mod rng;
mod source;

pub use markov::{
    doukhan_gap_check, psi_coefficient, simulate_chain, stationary_dist, ChainFile,
    DoukhanCheck, FiniteMarkovChain, MixingProfile, StartLaw,
};
pub use moments::{moment_diagnostics, MomentReport, MomentRow};
pub use source::{SeriesSource, SourceSpec};
