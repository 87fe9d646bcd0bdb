//! Monte Carlo tail ratios over synthetic sources.
//!
//! Replicate `r` draws its whole series from stream `r` of the seed, so a run
//! over replicates `a..b` followed by one over `b..c` gives counts that add up
//! to the run over `a..c`.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{Cell, Metadata, Mode, RatioRow, RatioTable};
use super::{add_counts, in_pool, ENGINE_VERSION};
use crate::blocks::{self_normalized, studentized, BlockPlan, BlockSpec};
use crate::sources::rng::stream_rng;
use crate::sources::{SeriesSource, SourceSpec};
use crate::{Error, Result};

/// Replicates handled by one unit of work.
const CHUNK: u64 = 256;

pub const MIN_REPLICATES: u64 = 1_000;

/// Statistic computed from the block sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterMode {
    /// `ΣY / √ΣY²` with no centering.
    Raw,
    /// `Σ(Y - mμ) / √Σ(Y - mμ)²` with the source mean μ.
    #[default]
    KnownMean,
    /// `Σ(Y - mμ) / √Σ(Y - Ȳ)²`.
    Studentized,
}

impl CenterMode {
    fn label(self) -> &'static str {
        match self {
            CenterMode::Raw => "raw",
            CenterMode::KnownMean => "known mean",
            CenterMode::Studentized => "studentized",
        }
    }

    pub(crate) fn statistic(self, y: &[f64], m: usize, mean: f64) -> Result<f64> {
        match self {
            CenterMode::Raw => self_normalized(y, 0.0),
            CenterMode::KnownMean => self_normalized(y, m as f64 * mean),
            CenterMode::Studentized => studentized(y, m as f64 * mean),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub source: SourceSpec,
    pub n: usize,
    pub blocks: Vec<BlockSpec>,
    pub thresholds: Vec<f64>,
    pub replicates: u64,
    /// First replicate id; shards of one experiment use disjoint ranges.
    pub replicate_offset: u64,
    pub seed: u64,
    pub center: CenterMode,
}

impl McConfig {
    pub fn new(source: SourceSpec, n: usize, block: BlockSpec, thresholds: Vec<f64>) -> Self {
        Self {
            source,
            n,
            blocks: vec![block],
            thresholds,
            replicates: 10_000,
            replicate_offset: 0,
            seed: 0,
            center: CenterMode::KnownMean,
        }
    }

    pub(crate) fn plans(&self) -> Result<Vec<BlockPlan>> {
        self.source.validate()?;
        if self.blocks.is_empty() {
            return Err(Error::Config("no block plan given".into()));
        }
        let plans = self
            .blocks
            .iter()
            .map(|&b| BlockPlan::new(self.n, b).map_err(|e| Error::Config(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if self.center == CenterMode::Studentized {
            if let Some(p) = plans.iter().find(|p| p.k() < 2) {
                return Err(Error::Config(format!(
                    "Studentized statistic needs k >= 2 blocks, plan has k = {}",
                    p.k()
                )));
            }
        }
        Ok(plans)
    }

    fn validate(&self) -> Result<Vec<BlockPlan>> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::Config(format!(
                "{} replicates; at least {MIN_REPLICATES} required",
                self.replicates
            )));
        }
        if self.replicate_offset.checked_add(self.replicates).is_none() {
            return Err(Error::Config("replicate range overflows".into()));
        }
        if self.thresholds.is_empty() || self.thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("thresholds must be finite and non-empty".into()));
        }
        self.plans()
    }
}

/// Runs `streams` replicates and counts, per plan, the events flagged by
/// `mark` plus a trailing degenerate count. Layout: `width + 1` slots per plan.
#[allow(clippy::too_many_arguments)]
pub(crate) fn tally_replicates<F>(
    source: &SourceSpec,
    plans: &[BlockPlan],
    center: CenterMode,
    seed: u64,
    streams: Range<u64>,
    width: usize,
    workers: usize,
    mark: F,
) -> Result<Vec<u64>>
where
    F: Fn(usize, f64, &mut [u64]) + Sync,
{
    let len = plans.iter().map(BlockPlan::required_len).max().unwrap_or(0);
    let mean = source.mean();
    let slots = width + 1;
    let chunk = |start: u64| -> Result<Vec<u64>> {
        let end = (start + CHUNK).min(streams.end);
        let mut counts = vec![0u64; slots * plans.len()];
        let mut series = vec![0.0; len];
        let mut y = Vec::new();
        for r in start..end {
            let mut rng = stream_rng(seed, r);
            source.fill(&mut rng, &mut series);
            for (p, plan) in plans.iter().enumerate() {
                plan.fill_sums(&series, &mut y)?;
                let slot = &mut counts[p * slots..(p + 1) * slots];
                match center.statistic(&y, plan.m(), mean) {
                    Ok(w) => mark(p, w, &mut slot[..width]),
                    Err(Error::Degenerate(_)) => slot[width] += 1,
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(counts)
    };
    let starts: Vec<u64> = (streams.start..streams.end).step_by(CHUNK as usize).collect();
    in_pool(workers, || {
        starts
            .into_par_iter()
            .map(chunk)
            .try_reduce(Vec::new, |a, b| Ok(add_counts(a, b)))
    })?
}

/// Estimates `P(W ≥ t)/(1-Φ(t))` for each block plan and threshold.
pub fn run_mc(config: &McConfig, workers: usize) -> Result<RatioTable> {
    let plans = config.validate()?;
    let width = config.thresholds.len();
    let first = config.replicate_offset;
    let counts = tally_replicates(
        &config.source,
        &plans,
        config.center,
        config.seed,
        first..first + config.replicates,
        width,
        workers,
        |_, w, slot| {
            for (c, &t) in slot.iter_mut().zip(&config.thresholds) {
                *c += u64::from(w >= t);
            }
        },
    )?;
    let rows = plans
        .iter()
        .zip(&config.blocks)
        .enumerate()
        .map(|(p, (plan, spec))| {
            let slot = &counts[p * (width + 1)..(p + 1) * (width + 1)];
            RatioRow {
                label: match spec {
                    BlockSpec::Alpha(a) => format!("alpha={a:?}"),
                    BlockSpec::Length(m) => format!("m={m}"),
                },
                m: plan.m(),
                k: plan.k(),
                cells: config
                    .thresholds
                    .iter()
                    .zip(slot)
                    .map(|(&t, &c)| Cell::from_counts(t, c, config.replicates, slot[width]))
                    .collect(),
            }
        })
        .collect();
    Ok(RatioTable {
        metadata: Some(Metadata {
            mode: Mode::MonteCarlo,
            n: config.n,
            sampling: format!(
                "seed {}, replicates {}..{}",
                config.seed,
                first,
                first + config.replicates
            ),
            source: config.source.label(),
            seed: Some(config.seed),
            mu: Some(config.source.mean()),
            exponent: None,
            center: config.center.label().into(),
            engine_version: ENGINE_VERSION.into(),
        }),
        rows,
    })
}
