//! Tail ratios of the self-normalized statistic over continued-fraction
//! digits at the grid points `iπ/10000`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{Cell, Metadata, Mode, RatioRow, RatioTable};
use super::{add_counts, in_pool, ENGINE_VERSION};
use crate::blocks::{self_normalized, BlockPlan, BlockSpec};
use crate::contfrac::{cf_series, mu_truncated, PiPrecision, GRID_SIZE};
use crate::sum::compensated_sum;
use crate::{Error, Result};

/// `0, 0.1, …, 1.0, 1.2, 1.4`.
pub fn paper_thresholds() -> Vec<f64> {
    (0..=10).chain([12, 14]).map(|i| i as f64 / 10.0).collect()
}

/// Denominator of `W = Σ(Y_j - mμ) / √D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// `D = Σ(Y_j - mμ)²`.
    #[default]
    Centered,
    /// `D = Σ Y_j²`.
    Uncentered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfTableConfig {
    pub n: usize,
    pub m_list: Vec<usize>,
    pub thresholds: Vec<f64>,
    /// Inclusive range of grid indices.
    pub grid: (usize, usize),
    /// Terms in the truncated mean μ.
    pub mu_terms: u64,
    pub exponent: f64,
    pub precision: PiPrecision,
    pub denominator: Denominator,
}

impl Default for CfTableConfig {
    fn default() -> Self {
        Self {
            n: 30,
            m_list: vec![1, 2, 3, 4],
            thresholds: paper_thresholds(),
            grid: (1, GRID_SIZE),
            mu_terms: 300,
            exponent: 1.0 / 3.0,
            precision: PiPrecision::Digits200,
            denominator: Denominator::Centered,
        }
    }
}

impl CfTableConfig {
    fn plans(&self) -> Result<Vec<BlockPlan>> {
        if self.m_list.is_empty() {
            return Err(Error::Config("no block lengths given".into()));
        }
        self.m_list
            .iter()
            .map(|&m| BlockPlan::new(self.n, BlockSpec::Length(m)))
            .collect()
    }

    fn validate(&self) -> Result<Vec<BlockPlan>> {
        let (lo, hi) = self.grid;
        if lo < 1 || hi > GRID_SIZE || lo > hi {
            return Err(Error::Config(format!("grid {lo}..={hi} outside 1..={GRID_SIZE}")));
        }
        if self.thresholds.is_empty() || self.thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("thresholds must be finite and non-empty".into()));
        }
        if !(self.exponent > 0.0 && self.exponent < 1.0) {
            return Err(Error::Config(format!("exponent {} outside (0,1)", self.exponent)));
        }
        self.plans()
    }
}

fn statistic(y: &[f64], center: f64, denominator: Denominator) -> Result<f64> {
    match denominator {
        Denominator::Centered => self_normalized(y, center),
        Denominator::Uncentered => {
            let den = compensated_sum(y.iter().map(|v| v * v));
            if den <= 0.0 {
                return Err(Error::Degenerate("self-normalized statistic"));
            }
            Ok(compensated_sum(y.iter().map(|v| v - center)) / den.sqrt())
        }
    }
}

/// Counts `#{W ≥ t}` per `(m, t)` over the grid, with `center = m·μ`.
///
/// Samples whose denominator vanishes go to the degenerate column and stay in
/// the total.
pub fn run_cf_table(config: &CfTableConfig, workers: usize) -> Result<RatioTable> {
    let plans = config.validate()?;
    let mu = mu_truncated(config.mu_terms, config.exponent)?;
    let width = config.thresholds.len() + 1;
    let (lo, hi) = config.grid;

    let tally = |index: usize| -> Result<Vec<u64>> {
        let series = cf_series(index, config.n, config.exponent, config.precision)?;
        let mut counts = vec![0u64; width * plans.len()];
        let mut y = Vec::new();
        for (p, plan) in plans.iter().enumerate() {
            plan.fill_sums(&series, &mut y)?;
            let slot = &mut counts[p * width..(p + 1) * width];
            match statistic(&y, plan.m() as f64 * mu, config.denominator) {
                Ok(w) => {
                    for (c, &t) in slot.iter_mut().zip(&config.thresholds) {
                        *c += u64::from(w >= t);
                    }
                }
                Err(Error::Degenerate(_)) => slot[width - 1] += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(counts)
    };
    let counts = in_pool(workers, || {
        (lo..=hi)
            .into_par_iter()
            .map(tally)
            .try_reduce(Vec::new, |a, b| Ok(add_counts(a, b)))
    })??;

    let total = (hi - lo + 1) as u64;
    let rows = plans
        .iter()
        .enumerate()
        .map(|(p, plan)| {
            let slot = &counts[p * width..(p + 1) * width];
            RatioRow {
                label: format!("m={}", plan.m()),
                m: plan.m(),
                k: plan.k(),
                cells: config
                    .thresholds
                    .iter()
                    .zip(slot)
                    .map(|(&t, &c)| Cell::from_counts(t, c, total, slot[width - 1]))
                    .collect(),
            }
        })
        .collect();
    Ok(RatioTable {
        metadata: Some(Metadata {
            mode: Mode::CfTable,
            n: config.n,
            sampling: format!(
                "grid {lo}..={hi} of i*pi/10000, pi to {} digits",
                config.precision.digits()
            ),
            source: "continued fraction digits".into(),
            seed: None,
            mu: Some(mu),
            exponent: Some(config.exponent),
            center: match config.denominator {
                Denominator::Centered => "m*mu, centered denominator".into(),
                Denominator::Uncentered => "m*mu, uncentered denominator".into(),
            },
            engine_version: ENGINE_VERSION.into(),
        }),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        let t = paper_thresholds();
        assert_eq!(t.len(), 13);
        assert_eq!(t[3], 0.3);
        assert_eq!(t[12], 1.4);
    }

    #[test]
    fn rejects_bad_config() {
        for cfg in [
            CfTableConfig { grid: (0, 10), ..Default::default() },
            CfTableConfig { grid: (10, 3183), ..Default::default() },
            CfTableConfig { m_list: vec![16], ..Default::default() },
            CfTableConfig { m_list: vec![], ..Default::default() },
            CfTableConfig { thresholds: vec![f64::NAN], ..Default::default() },
        ] {
            assert!(run_cf_table(&cfg, 1).is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn counts_are_monotone_in_t() {
        let cfg = CfTableConfig { grid: (1, 200), ..Default::default() };
        let table = run_cf_table(&cfg, 1).unwrap();
        for row in &table.rows {
            assert!(row.cells.windows(2).all(|w| w[0].count >= w[1].count));
            assert!(row.cells.iter().all(|c| c.total == 200));
        }
    }
}
