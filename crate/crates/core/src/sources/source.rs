use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::markov::FiniteMarkovChain;
use super::rng::SimRng;
use crate::{Error, Result};

/// A stationary sequence η_1, η_2, … that can be sampled from a stream.
pub trait SeriesSource: Send + Sync {
    /// Overwrites `out` with η_1..η_len drawn from `rng`.
    fn fill(&self, rng: &mut SimRng, out: &mut [f64]);

    /// `E η_i`.
    fn mean(&self) -> f64;
}

/// Serializable description of the sources the simulation engine knows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SourceSpec {
    /// i.i.d. `N(mean, sd²)`.
    Normal { mean: f64, sd: f64 },
    /// η ≡ 0.
    Zero,
    /// Stationary finite Markov chain.
    Chain { chain: FiniteMarkovChain },
    /// `η_i = Σ_l w_l ε_{i-l}` with i.i.d. standard normal ε: a
    /// (len(w)-1)-dependent sequence.
    MovingAverage { weights: Vec<f64> },
}

impl SourceSpec {
    pub fn standard_normal() -> Self {
        SourceSpec::Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceSpec::Normal { mean, sd } => {
                if !mean.is_finite() || !(*sd >= 0.0) || !sd.is_finite() {
                    return Err(Error::Config(format!("invalid normal source N({mean}, {sd}²)")));
                }
            }
            SourceSpec::MovingAverage { weights } => {
                if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::Config("moving average needs finite weights".into()));
                }
            }
            SourceSpec::Zero | SourceSpec::Chain { .. } => {}
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            SourceSpec::Normal { mean, sd } => format!("normal({mean:?},{sd:?})"),
            SourceSpec::Zero => "zero".into(),
            SourceSpec::Chain { chain } if chain.name().is_empty() => {
                format!("chain({} states)", chain.states())
            }
            SourceSpec::Chain { chain } => format!("chain({})", chain.name()),
            SourceSpec::MovingAverage { weights } => format!("ma({})", weights.len() - 1),
        }
    }
}

impl SeriesSource for SourceSpec {
    fn fill(&self, rng: &mut SimRng, out: &mut [f64]) {
        match self {
            SourceSpec::Normal { mean, sd } => {
                for v in out.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *v = mean + sd * z;
                }
            }
            SourceSpec::Zero => out.fill(0.0),
            SourceSpec::Chain { chain } => chain.fill(rng, out),
            SourceSpec::MovingAverage { weights } => {
                let q = weights.len() - 1;
                let eps: Vec<f64> = (0..out.len() + q).map(|_| StandardNormal.sample(rng)).collect();
                for (i, v) in out.iter_mut().enumerate() {
                    // eps[i + q] is ε_i, eps[i + q - l] is ε_{i-l}
                    *v = weights
                        .iter()
                        .enumerate()
                        .map(|(l, w)| w * eps[i + q - l])
                        .sum();
                }
            }
        }
    }

    fn mean(&self) -> f64 {
        match self {
            SourceSpec::Normal { mean, .. } => *mean,
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::rng::stream_rng;

    #[test]
    fn moving_average_is_q_dependent() {
        let src = SourceSpec::MovingAverage {
            weights: vec![1.0, 0.5],
        };
        let reps = 20_000;
        let (mut lag1, mut lag2, mut var) = (0.0, 0.0, 0.0);
        let mut buf = vec![0.0; 3];
        for r in 0..reps {
            src.fill(&mut stream_rng(11, r), &mut buf);
            var += buf[0] * buf[0];
            lag1 += buf[0] * buf[1];
            lag2 += buf[0] * buf[2];
        }
        let n = reps as f64;
        // Var = 1.25, Cov(lag 1) = 0.5, Cov(lag 2) = 0; se ≈ 0.01
        assert!((var / n - 1.25).abs() < 0.05);
        assert!((lag1 / n - 0.5).abs() < 0.05);
        assert!((lag2 / n).abs() < 0.05);
    }

    #[test]
    fn validation() {
        assert!(SourceSpec::Normal { mean: 0.0, sd: -1.0 }.validate().is_err());
        assert!(SourceSpec::MovingAverage { weights: vec![] }.validate().is_err());
        assert!(SourceSpec::standard_normal().validate().is_ok());
    }

    #[test]
    fn spec_json_shape() {
        let json = serde_json::to_string(&SourceSpec::standard_normal()).unwrap();
        assert_eq!(json, r#"{"kind":"normal","mean":0.0,"sd":1.0}"#);
        let back: SourceSpec = serde_json::from_str(r#"{"kind":"zero"}"#).unwrap();
        assert_eq!(back, SourceSpec::Zero);
    }
}
