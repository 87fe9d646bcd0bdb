//! Block geometry and the statistics built on interlaced block sums.
//!
//! A series of length `n` is cut into blocks of length `m`; only every other
//! block is kept, so block `j` (1-based) covers positions
//! `2m(j-1)+1 ..= 2m(j-1)+m` and the following `m` positions form a discarded
//! gap. With `k = ⌊n/(2m)⌋` retained blocks:
//!
//! ```text
//! Y_j = Σ_{i=1..m} η_{2m(j-1)+i}
//! W   = Σ (Y_j - c) / √Σ (Y_j - c)²          (self-normalized, optional center c)
//! T   = Σ (Y_j - mμ) / √Σ (Y_j - Ȳ)²          (Studentized)
//! ```

use serde::{Deserialize, Serialize};

use crate::normal;
use crate::sum::{compensated_sum, CompensatedSum};
use crate::{Error, Result};

/// How the block length is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSpec {
    /// `m = ⌊n^α⌋` with `0 < α < 1`.
    Alpha(f64),
    /// Explicit block length.
    Length(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    n: usize,
    alpha: Option<f64>,
    m: usize,
    k: usize,
}

impl BlockPlan {
    pub fn new(n: usize, spec: BlockSpec) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPlan(format!("sample length {n} < 2")));
        }
        let (m, alpha) = match spec {
            BlockSpec::Alpha(alpha) => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::InvalidPlan(format!("alpha {alpha} outside (0,1)")));
                }
                (floor_power(n, alpha), Some(alpha))
            }
            BlockSpec::Length(m) => {
                if m == 0 || m > n / 2 {
                    return Err(Error::InvalidPlan(format!(
                        "block length {m} outside [1, {}]",
                        n / 2
                    )));
                }
                (m, None)
            }
        };
        let k = n / (2 * m);
        if k < 1 {
            return Err(Error::InvalidPlan(format!(
                "n = {n} too small for block length {m}"
            )));
        }
        Ok(Self { n, alpha, m, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of leading series values the retained blocks touch.
    pub fn required_len(&self) -> usize {
        2 * self.m * (self.k - 1) + self.m
    }

    /// Writes `Y_1..Y_k` into `out`, replacing its contents.
    pub fn fill_sums(&self, series: &[f64], out: &mut Vec<f64>) -> Result<()> {
        let needed = self.required_len();
        if series.len() < needed {
            return Err(Error::Length {
                needed,
                got: series.len(),
            });
        }
        out.clear();
        out.extend((0..self.k).map(|j| {
            let start = 2 * self.m * j;
            compensated_sum(series[start..start + self.m].iter().copied())
        }));
        Ok(())
    }
}

/// `⌊n^α⌋`, snapping results within a few ulps of an integer onto it so that
/// exact powers such as `1024^0.5` do not land on `31.999…`.
fn floor_power(n: usize, alpha: f64) -> usize {
    let v = (n as f64).powf(alpha);
    let r = v.round();
    if (v - r).abs() <= 4.0 * f64::EPSILON * r.max(1.0) {
        r as usize
    } else {
        v.floor() as usize
    }
}

pub fn plan_blocks(n: usize, spec: BlockSpec) -> Result<BlockPlan> {
    BlockPlan::new(n, spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSums {
    y: Vec<f64>,
    plan: BlockPlan,
}

impl BlockSums {
    pub fn new(y: Vec<f64>, plan: BlockPlan) -> Result<Self> {
        if y.len() != plan.k() {
            return Err(Error::Length {
                needed: plan.k(),
                got: y.len(),
            });
        }
        if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite block sum {bad}")));
        }
        Ok(Self { y, plan })
    }

    /// Block sums with block length `m`, on the shortest plan that holds them
    /// (`n = 2mk`).
    pub fn from_values(y: Vec<f64>, m: usize) -> Result<Self> {
        let plan = BlockPlan::new((2 * m * y.len()).max(2), BlockSpec::Length(m))?;
        Self::new(y, plan)
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn plan(&self) -> &BlockPlan {
        &self.plan
    }

    /// `S_k^o = Σ Y_j`.
    pub fn total(&self) -> f64 {
        compensated_sum(self.y.iter().copied())
    }

    /// `[S^o]_k = Σ Y_j²`.
    pub fn square_total(&self) -> f64 {
        compensated_sum(self.y.iter().map(|v| v * v))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            y: self.y.iter().map(|v| v * c).collect(),
            plan: self.plan,
        }
    }
}

pub fn interlaced_sums(series: &[f64], plan: &BlockPlan) -> Result<BlockSums> {
    let mut y = Vec::with_capacity(plan.k());
    plan.fill_sums(series, &mut y)?;
    BlockSums::new(y, *plan)
}

/// `Σ(y_j - center) / √Σ(y_j - center)²` on a raw slice.
pub fn self_normalized(y: &[f64], center: f64) -> Result<f64> {
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for &v in y {
        let z = v - center;
        num.add(z);
        den.add(z * z);
    }
    let den = den.value();
    if den <= 0.0 {
        return Err(Error::Degenerate("self-normalized statistic"));
    }
    Ok(num.value() / den.sqrt())
}

/// `Σ(y_j - block_mean) / √Σ(y_j - ȳ)²` on a raw slice.
pub fn studentized(y: &[f64], block_mean: f64) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::Domain(format!(
            "Studentized statistic needs k >= 2 blocks, got {}",
            y.len()
        )));
    }
    let spread = spread(y);
    if spread <= 0.0 || y.iter().all(|&v| v == y[0]) {
        return Err(Error::Degenerate("Studentized statistic"));
    }
    let num = compensated_sum(y.iter().map(|v| v - block_mean));
    Ok(num / spread.sqrt())
}

/// `Σ(y_j - ȳ)²`.
fn spread(y: &[f64]) -> f64 {
    let mean = compensated_sum(y.iter().copied()) / y.len() as f64;
    compensated_sum(y.iter().map(|v| (v - mean) * (v - mean)))
}

/// Interlaced self-normalized sum, centred at `center` when given.
pub fn self_norm_stat(sums: &BlockSums, center: Option<f64>) -> Result<f64> {
    self_normalized(sums.values(), center.unwrap_or(0.0))
}

pub fn student_stat(sums: &BlockSums, block_mean: f64) -> Result<f64> {
    studentized(sums.values(), block_mean)
}

/// Chung's threshold in the form `x·√(k/(k-1))·√(k/(k+x²-1))`.
///
/// Note that the exact equivalence `[student_stat ≥ x] ⇔ [W ≥ g(x)]` for the
/// statistic returned by [`student_stat`] holds with [`studentized_threshold`],
/// not with this form; see the crate README.
pub fn chung_threshold(x: f64, k: usize) -> Result<f64> {
    check_threshold_args(x, k)?;
    let k = k as f64;
    Ok(x * (k / (k - 1.0)).sqrt() * (k / (k + x * x - 1.0)).sqrt())
}

/// `x·√(k/(k+x²))`: the self-normalized threshold that is exactly equivalent
/// to `student_stat ≥ x` (both statistics centred at the same `mμ`).
///
/// Follows from `T = W / √(1 - W²/k)`.
pub fn studentized_threshold(x: f64, k: usize) -> Result<f64> {
    check_threshold_args(x, k)?;
    let k = k as f64;
    Ok(x * (k / (k + x * x)).sqrt())
}

fn check_threshold_args(x: f64, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain(format!("threshold needs k >= 2, got {k}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("threshold needs finite x >= 0, got {x}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl IntervalEstimate {
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Interval `ΣY/(km) ± z_{1-δ/2}·√Σ(Y-Ȳ)²/(km)` for the mean of the
/// underlying series, at level `1 - δ`.
///
/// `delta = 1` is accepted and yields the degenerate interval at the center.
pub fn confidence_interval(sums: &BlockSums, delta: f64) -> Result<IntervalEstimate> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta {delta} outside (0,1]")));
    }
    let y = sums.values();
    if y.len() < 2 {
        return Err(Error::Domain(format!(
            "confidence interval needs k >= 2 blocks, got {}",
            y.len()
        )));
    }
    let km = (sums.plan().k() * sums.plan().m()) as f64;
    let center = sums.total() / km;
    let z = normal::quantile(1.0 - delta / 2.0)?;
    let half = z * spread(y).sqrt() / km;
    Ok(IntervalEstimate {
        lo: center - half,
        hi: center + half,
        level: 1.0 - delta,
    })
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    fn sums(y: &[f64]) -> BlockSums {
        BlockSums::from_values(y.to_vec(), 1).unwrap()
    }

    #[test]
    fn plan_examples() {
        let p = plan_blocks(30, BlockSpec::Length(1)).unwrap();
        assert_eq!((p.m(), p.k()), (1, 15));
        let p = plan_blocks(30, BlockSpec::Length(4)).unwrap();
        assert_eq!((p.m(), p.k()), (4, 3));
        // 1000^0.4 = 15.848931924611136...
        let p = plan_blocks(1000, BlockSpec::Alpha(0.4)).unwrap();
        assert_eq!((p.m(), p.k()), (15, 33));
    }

    #[test]
    fn plan_snaps_exact_powers() {
        assert_eq!(plan_blocks(1024, BlockSpec::Alpha(0.5)).unwrap().m(), 32);
        assert_eq!(plan_blocks(10_000, BlockSpec::Alpha(0.5)).unwrap().m(), 100);
        assert_eq!(plan_blocks(1000, BlockSpec::Alpha(1.0 / 3.0)).unwrap().m(), 10);
    }

    #[test]
    fn plan_rejects_bad_input() {
        assert!(matches!(
            plan_blocks(1, BlockSpec::Length(1)),
            Err(Error::InvalidPlan(_))
        ));
        assert!(plan_blocks(30, BlockSpec::Length(0)).is_err());
        assert!(plan_blocks(30, BlockSpec::Length(16)).is_err());
        assert!(plan_blocks(30, BlockSpec::Alpha(0.0)).is_err());
        assert!(plan_blocks(30, BlockSpec::Alpha(1.0)).is_err());
        // m = ⌊3^0.9⌋ = 2 leaves no room for a block pair
        assert!(matches!(
            plan_blocks(3, BlockSpec::Alpha(0.9)),
            Err(Error::InvalidPlan(_))
        ));
    }

    #[test]
    fn interlaced_examples() {
        let plan = plan_blocks(8, BlockSpec::Length(2)).unwrap();
        let s = interlaced_sums(&[1., 2., 3., 4., 5., 6., 7., 8.], &plan).unwrap();
        assert_eq!(s.values(), &[3.0, 11.0]);

        let plan = plan_blocks(4, BlockSpec::Length(1)).unwrap();
        let s = interlaced_sums(&[1., -1., 2., -2.], &plan).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);

        let plan = plan_blocks(30, BlockSpec::Length(3)).unwrap();
        let s = interlaced_sums(&[0.0; 30], &plan).unwrap();
        assert_eq!(s.values(), &[0.0; 5]);
    }

    #[test]
    fn interlaced_needs_last_block_only() {
        // n = 9, m = 2, k = 2: the trailing gap block need not be present
        let plan = plan_blocks(9, BlockSpec::Length(2)).unwrap();
        assert_eq!(plan.required_len(), 6);
        let s = interlaced_sums(&[1., 1., 9., 9., 2., 2.], &plan).unwrap();
        assert_eq!(s.values(), &[2.0, 4.0]);
        assert_eq!(
            interlaced_sums(&[1., 1., 9., 9., 2.], &plan),
            Err(Error::Length { needed: 6, got: 5 })
        );
    }

    #[test]
    fn self_norm_examples() {
        assert_eq!(self_norm_stat(&sums(&[1., 1., 1., 1.]), None).unwrap(), 2.0);
        assert_eq!(self_norm_stat(&sums(&[1., -1.]), None).unwrap(), 0.0);
        assert_eq!(self_norm_stat(&sums(&[3., 4.]), None).unwrap(), 1.4);
        assert_eq!(self_norm_stat(&sums(&[4., 5.]), Some(1.0)).unwrap(), 1.4);
        assert_eq!(
            self_norm_stat(&sums(&[2., 2.]), Some(2.0)),
            Err(Error::Degenerate("self-normalized statistic"))
        );
    }

    #[test]
    fn student_examples() {
        assert_eq!(student_stat(&sums(&[1., 2., 3.]), 2.0).unwrap(), 0.0);
        let t = student_stat(&sums(&[1., 2., 3.]), 1.0).unwrap();
        assert!((t - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((t - 2.1213).abs() < 1e-4);
        assert!(matches!(
            student_stat(&sums(&[5., 5., 5.]), 0.0),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            student_stat(&sums(&[0.1, 0.1, 0.1]), 0.0),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            student_stat(&sums(&[5.]), 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn chung_examples() {
        assert_eq!(chung_threshold(0.0, 7).unwrap(), 0.0);
        assert!((chung_threshold(1.0, 5).unwrap() - 1.118034).abs() < 1e-6);
        assert!((chung_threshold(1.0, 2).unwrap() - 1.414214).abs() < 1e-6);
        assert!(chung_threshold(1.0, 1).is_err());
        assert!(chung_threshold(-1.0, 3).is_err());
        assert!((studentized_threshold(1.0, 5).unwrap() - (5.0f64 / 6.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn chung_threshold_increasing_below_sqrt_k() {
        for k in 2..40usize {
            let top = (k as f64).sqrt();
            let mut prev = -1.0;
            let mut x = 0.0;
            while x < top {
                let g = chung_threshold(x, k).unwrap();
                assert!(g > prev, "k={k} x={x}");
                prev = g;
                x += 0.01;
            }
        }
    }

    #[test]
    fn ci_examples() {
        let ci = confidence_interval(&sums(&[1., 1., 1.]), 0.05).unwrap();
        assert_eq!((ci.lo, ci.hi), (1.0, 1.0));
        assert!((ci.level - 0.95).abs() < 1e-15);

        let ci = confidence_interval(&sums(&[2., 7., -1.]), 1.0).unwrap();
        assert_eq!(ci.lo, ci.hi);
        assert!((ci.lo - 8.0 / 3.0).abs() < 1e-15);

        // center ΣY/(km) = 6/2 = 3, halfwidth z_{0.975}·√2/2
        let ci = confidence_interval(&sums(&[2., 4.]), 0.05).unwrap();
        let half = 1.959963984540054 * 2f64.sqrt() / 2.0;
        assert!((ci.center() - 3.0).abs() < 1e-14);
        assert!((ci.hi - ci.lo - 2.0 * half).abs() < 1e-12);
        assert!((ci.lo - 1.614096175650322).abs() < 1e-9);
        assert!((ci.hi - 4.385903824349678).abs() < 1e-9);
    }

    #[test]
    fn ci_rejects_bad_delta() {
        for d in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                confidence_interval(&sums(&[1., 2.]), d),
                Err(Error::Domain(_))
            ));
        }
    }
}
