//! Moderate-deviation sweeps: `(1/a_n²) ln P(W/a_n ∈ B)` along a sequence of
//! sample sizes, against the limits `-inf_{B°} x²/2` and `-inf_{B̄} x²/2`.

use serde::{Deserialize, Serialize};

use super::mc::{tally_replicates, CenterMode, MIN_REPLICATES};
use super::report::zero_count_upper;
use super::ENGINE_VERSION;
use crate::blocks::{BlockPlan, BlockSpec};
use crate::bounds::{mdp_rate_interval, IntervalSet, SetSide};
use crate::sources::SourceSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpConfig {
    pub source: SourceSpec,
    /// Block exponent: `m = ⌊n^α⌋`.
    pub alpha: f64,
    /// Scale schedule `a_n = n^power`.
    pub power: f64,
    pub set: IntervalSet,
    pub n_list: Vec<usize>,
    pub replicates: u64,
    pub seed: u64,
    pub center: CenterMode,
}

impl MdpConfig {
    pub fn scale(&self, n: usize) -> f64 {
        (n as f64).powf(self.power)
    }

    /// `a_n` must grow while `a_n / n^{(1-α)/2}` shrinks along `n_list`.
    fn validate(&self) -> Result<Vec<BlockPlan>> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::Config(format!(
                "{} replicates; at least {MIN_REPLICATES} required",
                self.replicates
            )));
        }
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sample sizes must be non-empty and increasing".into()));
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(Error::Config(format!("schedule power {} must be positive", self.power)));
        }
        let range = |n: usize| (n as f64).powf((1.0 - self.alpha) / 2.0);
        for w in self.n_list.windows(2) {
            let (a0, a1) = (self.scale(w[0]), self.scale(w[1]));
            if !(a1 > a0 && a1 / range(w[1]) < a0 / range(w[0])) {
                return Err(Error::Config(format!(
                    "schedule n^{} is not moderate between n = {} and n = {}",
                    self.power, w[0], w[1]
                )));
            }
        }
        self.n_list
            .iter()
            .map(|&n| {
                let plan = BlockPlan::new(n, BlockSpec::Alpha(self.alpha))
                    .map_err(|e| Error::Config(e.to_string()))?;
                if self.center == CenterMode::Studentized && plan.k() < 2 {
                    return Err(Error::Config(format!("n = {n} gives fewer than 2 blocks")));
                }
                Ok(plan)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpPoint {
    pub n: usize,
    pub a_n: f64,
    pub m: usize,
    pub k: usize,
    pub count: u64,
    pub total: u64,
    pub degenerate: u64,
    pub probability: f64,
    /// `(1/a_n²) ln(count/total)`; `-∞` for a zero count.
    pub log_rate: f64,
    /// For zero counts: 95% upper bound on the probability and its rate.
    pub upper_probability: Option<f64>,
    pub upper_log_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    /// Limit the sequence is compared against.
    pub target: f64,
    /// `|log_rate - target|` per point.
    pub distances: Vec<f64>,
    /// Every step moves closer to the target.
    pub monotone_toward_target: bool,
    /// The last point is closer than the first.
    pub net_toward_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpReport {
    pub set: IntervalSet,
    /// `-inf_{B°} x²/2`.
    pub interior_target: f64,
    /// `-inf_{B̄} x²/2`.
    pub closure_target: f64,
    /// B has no interior, so the lower limit is `-∞`.
    pub empty_interior: bool,
    pub points: Vec<MdpPoint>,
    pub trend: TrendSummary,
    pub seed: u64,
    pub source: String,
    pub engine_version: String,
}

impl MdpReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,a_n,m,k,count,total,degenerate,probability,log_rate,interior_target,closure_target\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{:?},{},{},{},{},{},{:?},{:?},{:?},{:?}\n",
                p.n,
                p.a_n,
                p.m,
                p.k,
                p.count,
                p.total,
                p.degenerate,
                p.probability,
                p.log_rate,
                self.interior_target,
                self.closure_target
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn trend(points: &[MdpPoint], target: f64) -> TrendSummary {
    let distances: Vec<f64> = points.iter().map(|p| (p.log_rate - target).abs()).collect();
    let finite = distances.iter().all(|d| d.is_finite());
    TrendSummary {
        target,
        monotone_toward_target: finite && distances.windows(2).all(|w| w[1] < w[0]),
        net_toward_target: finite
            && distances.len() >= 2
            && distances[distances.len() - 1] < distances[0],
        distances,
    }
}

/// Runs one leg per sample size; leg `i` uses streams `i·2⁴⁰ + r`.
pub fn run_mdp_sweep(config: &MdpConfig, workers: usize) -> Result<MdpReport> {
    config.source.validate()?;
    let plans = config.validate()?;
    let mut points = Vec::with_capacity(plans.len());
    for (leg, plan) in plans.iter().enumerate() {
        let a = config.scale(plan.n());
        let base = (leg as u64) << 40;
        let counts = tally_replicates(
            &config.source,
            std::slice::from_ref(plan),
            config.center,
            config.seed,
            base..base + config.replicates,
            1,
            workers,
            |_, w, slot| slot[0] += u64::from(config.set.contains(w / a)),
        )?;
        let (count, degenerate) = (counts[0], counts[1]);
        let total = config.replicates;
        let probability = count as f64 / total as f64;
        let (upper_probability, upper_log_rate) = if count == 0 {
            let u = zero_count_upper(total);
            (Some(u), Some(u.ln() / (a * a)))
        } else {
            (None, None)
        };
        points.push(MdpPoint {
            n: plan.n(),
            a_n: a,
            m: plan.m(),
            k: plan.k(),
            count,
            total,
            degenerate,
            probability,
            log_rate: probability.ln() / (a * a),
            upper_probability,
            upper_log_rate,
        });
    }
    let interior_target = -mdp_rate_interval(&config.set, SetSide::Interior);
    let closure_target = -mdp_rate_interval(&config.set, SetSide::Closure);
    let target = if closure_target.is_finite() { closure_target } else { interior_target };
    Ok(MdpReport {
        set: config.set.clone(),
        interior_target,
        closure_target,
        empty_interior: config.set.has_empty_interior(),
        trend: trend(&points, target),
        points,
        seed: config.seed,
        source: config.source.label(),
        engine_version: ENGINE_VERSION.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> MdpConfig {
        MdpConfig {
            source: SourceSpec::standard_normal(),
            alpha: 0.3,
            power: 0.1,
            set: "[1,inf)".parse().unwrap(),
            n_list: vec![1_000, 4_000],
            replicates: 1_000,
            seed: 3,
            center: CenterMode::KnownMean,
        }
    }

    #[test]
    fn targets_for_half_line() {
        let r = run_mdp_sweep(&config(), 1).unwrap();
        assert_eq!((r.interior_target, r.closure_target), (-0.5, -0.5));
        assert!(!r.empty_interior);
        assert_eq!(r.points.len(), 2);
        assert!(r.points.iter().all(|p| p.log_rate < 0.0 && p.log_rate.is_finite()));
    }

    #[test]
    fn point_set_has_empty_interior() {
        let r = run_mdp_sweep(&MdpConfig { set: "{1}".parse().unwrap(), ..config() }, 1).unwrap();
        assert!(r.empty_interior);
        assert_eq!(r.interior_target, f64::NEG_INFINITY);
        assert_eq!(r.closure_target, -0.5);
        // a continuous statistic never hits a single point
        for p in &r.points {
            assert_eq!(p.count, 0);
            assert_eq!(p.log_rate, f64::NEG_INFINITY);
            assert!(p.upper_probability.unwrap() > 0.0);
        }
        assert!(!r.trend.net_toward_target);
    }

    #[test]
    fn schedule_validation() {
        assert!(run_mdp_sweep(&MdpConfig { power: 0.4, ..config() }, 1).is_err());
        assert!(run_mdp_sweep(&MdpConfig { n_list: vec![4_000, 1_000], ..config() }, 1).is_err());
        assert!(run_mdp_sweep(&MdpConfig { power: 0.0, ..config() }, 1).is_err());
        assert!(run_mdp_sweep(&MdpConfig { replicates: 10, ..config() }, 1).is_err());
    }
}
