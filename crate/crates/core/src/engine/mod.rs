//! Simulation drivers: the deterministic continued-fraction table, Monte
//! Carlo ratio sweeps, and moderate-deviation sweeps.
//!
//! Work is split into fixed chunks (grid indices or replicate ids) that do
//! not depend on the worker count. Each chunk produces integer counts, chunks
//! are merged by addition, and floats are derived from the merged counts
//! once. Output is therefore identical for any number of workers.

pub mod mc;
pub mod mdp;
pub mod report;
pub mod table;

pub use mc::{run_mc, CenterMode, McConfig};
pub use mdp::{run_mdp_sweep, MdpConfig, MdpPoint, MdpReport, TrendSummary};
pub use report::{Cell, Metadata, Mode, RatioRow, RatioTable};
pub use table::{paper_thresholds, run_cf_table, CfTableConfig, Denominator};

use crate::{Error, Result};

pub const ENGINE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Runs `f` on a pool of `workers` threads (0 = available parallelism).
pub(crate) fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Element-wise sum of count vectors of equal length.
pub(crate) fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    if a.is_empty() {
        return b;
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}
