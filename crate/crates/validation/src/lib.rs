//! Acceptance checks for the `selfnorm` library and command line.
//!
//! Everything lives in `tests/acceptance.rs`; run it with
//! `cargo test -p selfnorm-validation --test acceptance`.
