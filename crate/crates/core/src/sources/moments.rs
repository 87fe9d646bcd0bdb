use serde::{Deserialize, Serialize};

use super::rng::stream_rng;
use super::source::SeriesSource;
use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Monte Carlo estimates of the normalised block moments at one block length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub m: usize,
    /// Estimate of `E S_{0,m}² / m`.
    pub second: f64,
    pub second_se: f64,
    /// Estimate of `E |S_{0,m}|^{2+ρ} / m^{1+ρ/2}`.
    pub absolute: f64,
    pub absolute_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub rho: f64,
    pub replicates: usize,
    pub rows: Vec<MomentRow>,
    /// Smallest second-moment estimate: the empirical `c_1²`.
    pub c1_squared: f64,
    /// Largest absolute-moment estimate: the empirical `c_2^{2+ρ}`.
    pub c2_power: f64,
    /// True when the lower variance condition fails empirically (`ĉ_1² = 0`).
    pub lower_bound_violated: bool,
}

struct MeanSe {
    sum: CompensatedSum,
    sq: CompensatedSum,
}

impl MeanSe {
    fn new() -> Self {
        Self {
            sum: CompensatedSum::new(),
            sq: CompensatedSum::new(),
        }
    }

    fn add(&mut self, v: f64) {
        self.sum.add(v);
        self.sq.add(v * v);
    }

    fn finish(&self, n: usize) -> (f64, f64) {
        let n = n as f64;
        let mean = self.sum.value() / n;
        let var = ((self.sq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Empirical check of the block moment conditions `E S² >= c_1² m` and
/// `E|S|^{2+ρ} <= m^{1+ρ/2} c_2^{2+ρ}` on the leading block `S_{0,m}`.
///
/// Replicate `r` uses random stream `r` of `seed`.
pub fn moment_diagnostics(
    source: &dyn SeriesSource,
    m_grid: &[usize],
    rho: f64,
    replicates: usize,
    seed: u64,
) -> Result<MomentReport> {
    if m_grid.is_empty() || m_grid.contains(&0) {
        return Err(Error::Config("m-grid must be nonempty and positive".into()));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Domain(format!("rho {rho} outside (0,1]")));
    }
    if replicates < 100 {
        return Err(Error::Config(format!("need >= 100 replicates, got {replicates}")));
    }
    let len = *m_grid.iter().max().unwrap();
    let mut series = vec![0.0; len];
    let mut prefix = vec![0.0; len + 1];
    let mut acc: Vec<(MeanSe, MeanSe)> = m_grid.iter().map(|_| (MeanSe::new(), MeanSe::new())).collect();
    for r in 0..replicates {
        source.fill(&mut stream_rng(seed, r as u64), &mut series);
        let mut running = CompensatedSum::new();
        for (i, v) in series.iter().enumerate() {
            running.add(*v);
            prefix[i + 1] = running.value();
        }
        for (&m, (second, absolute)) in m_grid.iter().zip(acc.iter_mut()) {
            let s = prefix[m];
            let mf = m as f64;
            second.add(s * s / mf);
            absolute.add(s.abs().powf(2.0 + rho) / mf.powf(1.0 + rho / 2.0));
        }
    }
    let rows: Vec<MomentRow> = m_grid
        .iter()
        .zip(&acc)
        .map(|(&m, (second, absolute))| {
            let (second, second_se) = second.finish(replicates);
            let (absolute, absolute_se) = absolute.finish(replicates);
            MomentRow {
                m,
                second,
                second_se,
                absolute,
                absolute_se,
            }
        })
        .collect();
    let c1_squared = rows.iter().map(|r| r.second).fold(f64::INFINITY, f64::min);
    let c2_power = rows.iter().map(|r| r.absolute).fold(0.0, f64::max);
    Ok(MomentReport {
        rho,
        replicates,
        rows,
        c1_squared,
        c2_power,
        lower_bound_violated: !(c1_squared > 0.0),
    })
}
