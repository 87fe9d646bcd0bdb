//! Closed-form bound expressions: the Cramér-type relative error bound, the
//! mixing rates entering it, the exponential martingale inequality used in its
//! proof, and the moderate-deviation rate `inf x²/2` over a set.
//!
//! The constants `c_ρ` and `c` of the relative error bound are not known
//! numerically, so they are inputs (default 1). Only the shape is meaningful.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blocks::{BlockPlan, BlockSpec};
use crate::sources::MixingProfile;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingRates {
    pub delta_n: f64,
    pub gamma_n: f64,
    pub m: usize,
    pub k: usize,
}

/// `δ_n = √(mψ(m)² + kψ(m))` and `γ_n = √k·√ψ(m) + nψ(m)`.
pub fn mixing_rates(plan: &BlockPlan, profile: &MixingProfile) -> Result<MixingRates> {
    let (m, k) = (plan.m(), plan.k());
    let psi = profile.get(m).ok_or(Error::Profile(m))?;
    let (mf, kf) = (m as f64, k as f64);
    Ok(MixingRates {
        delta_n: (mf * psi * psi + kf * psi).sqrt(),
        gamma_n: kf.sqrt() * psi.sqrt() + plan.n() as f64 * psi,
        m,
        k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub n: usize,
    pub alpha: f64,
    /// Moment exponent, `0 < ρ <= 1`.
    pub rho: f64,
    /// `c_ρ` (or `c` when `ρ = 1`).
    pub c: f64,
    pub profile: MixingProfile,
}

impl BoundConfig {
    /// Independent data (`ψ ≡ 0`) with `c = 1`.
    pub fn independent(n: usize, alpha: f64, rho: f64) -> Result<Self> {
        let plan = BlockPlan::new(n, BlockSpec::Alpha(alpha))?;
        let cfg = Self {
            n,
            alpha,
            rho,
            c: 1.0,
            profile: MixingProfile::independent([plan.m()]),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::Domain(format!("rho {} outside (0,1]", self.rho)));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::Domain(format!("constant {} must be positive", self.c)));
        }
        BlockPlan::new(self.n, BlockSpec::Alpha(self.alpha)).map(|_| ())
    }

    pub fn plan(&self) -> Result<BlockPlan> {
        BlockPlan::new(self.n, BlockSpec::Alpha(self.alpha))
    }

    /// Upper end `n^{(1-α)/2}` of the range where the bound applies.
    pub fn valid_range(&self) -> f64 {
        (self.n as f64).powf((1.0 - self.alpha) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    /// `x < n^{(1-α)/2}`.
    pub in_range: bool,
}

/// Relative error bound for `P(W ≥ x)/(1-Φ(x))`.
///
/// For `ρ < 1`:
/// `c_ρ(x^{2+ρ}/n^{(1-α)ρ/2} + x²δ_n² + (1+x)(1/(n^{(1-α)ρ(2-ρ)/8}(1+x^{ρ(2+ρ)/4})) + γ_n))`.
/// For `ρ = 1` the power terms become `x³/n^{(1-α)/2}` and
/// `1/(n^{(1-α)/8}(1+x^{3/4}))`, and `ln n/n^{(1-α)/2}` joins `γ_n`.
///
/// Outside the valid range the value is still returned, with `in_range` unset.
pub fn cmd_bound(x: f64, cfg: &BoundConfig) -> Result<BoundValue> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("x = {x} must be finite and >= 0")));
    }
    cfg.validate()?;
    let rates = mixing_rates(&cfg.plan()?, &cfg.profile)?;
    let n = cfg.n as f64;
    let rho = cfg.rho;
    let e = 1.0 - cfg.alpha;
    let d2 = rates.delta_n * rates.delta_n;
    let value = if rho < 1.0 {
        let lead = x.powf(2.0 + rho) / n.powf(e * rho / 2.0);
        let edge = 1.0 / (n.powf(e * rho * (2.0 - rho) / 8.0) * (1.0 + x.powf(rho * (2.0 + rho) / 4.0)));
        cfg.c * (lead + x * x * d2 + (1.0 + x) * (edge + rates.gamma_n))
    } else {
        let lead = x.powi(3) / n.powf(e / 2.0);
        let edge = 1.0 / (n.powf(e / 8.0) * (1.0 + x.powf(0.75)));
        let log = n.ln() / n.powf(e / 2.0);
        cfg.c * (lead + x * x * d2 + (1.0 + x) * (edge + log + rates.gamma_n))
    };
    Ok(BoundValue {
        value,
        in_range: x < cfg.valid_range(),
    })
}

/// `C(β) = β^{1/(1-β)}(1 - 1/β)` for `1 < β <= 2`.
pub fn fan_constant(beta: f64) -> Result<f64> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::Domain(format!("beta {beta} outside (1,2]")));
    }
    Ok(beta.powf(1.0 / (1.0 - beta)) * (1.0 - 1.0 / beta))
}

/// `exp(-C(β)(x/v)^{β/(β-1)})`.
pub fn fan_exp_bound(x: f64, v: f64, beta: f64) -> Result<f64> {
    let c = fan_constant(beta)?;
    if !(x > 0.0 && v > 0.0) || !x.is_finite() || !v.is_finite() {
        return Err(Error::Domain(format!("x = {x} and v = {v} must be positive")));
    }
    Ok((-c * (x / v).powf(beta / (beta - 1.0))).exp())
}

/// Interval with open or closed ends; infinite ends are always open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::Parse(format!("bad interval endpoints {lo}, {hi}")));
        }
        let lo_closed = lo_closed && lo.is_finite();
        let hi_closed = hi_closed && hi.is_finite();
        if lo == hi && !(lo_closed && hi_closed) {
            return Err(Error::Parse(format!("interval at {lo} is empty")));
        }
        Ok(Self {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::new(x, x, true, true)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Distance from 0 to the closure.
    fn dist_to_origin(&self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            return write!(f, "{{{}}}", self.lo);
        }
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{},{}{close}", self.lo, self.hi)
    }
}

/// Finite union of intervals, kept as sorted disjoint components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(mut parts: Vec<Interval>) -> Self {
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for p in parts {
            match merged.last_mut() {
                Some(last) if p.lo < last.hi || (p.lo == last.hi && (last.hi_closed || p.lo_closed)) => {
                    if p.hi > last.hi {
                        last.hi = p.hi;
                        last.hi_closed = p.hi_closed;
                    } else if p.hi == last.hi {
                        last.hi_closed |= p.hi_closed;
                    }
                }
                _ => merged.push(p),
            }
        }
        Self { parts: merged }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn contains(&self, x: f64) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    pub fn has_empty_interior(&self) -> bool {
        self.parts.iter().all(|p| p.lo == p.hi)
    }

    /// Least `|x|` over the interior (or closure); `None` when that is empty.
    pub fn inf_abs(&self, side: SetSide) -> Option<f64> {
        self.parts
            .iter()
            .filter(|p| side == SetSide::Closure || p.lo < p.hi)
            .map(Interval::dist_to_origin)
            .min_by(f64::total_cmp)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str("U")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

fn parse_endpoint(s: &str) -> Result<f64> {
    let t = s.trim();
    match t {
        "inf" | "+inf" | "∞" | "+∞" => Ok(f64::INFINITY),
        "-inf" | "-∞" | "−∞" => Ok(f64::NEG_INFINITY),
        _ => t
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse(format!("bad endpoint {t:?}"))),
    }
}

fn parse_interval(s: &str) -> Result<Interval> {
    let t = s.trim();
    let bad = || Error::Parse(format!("malformed interval {t:?}"));
    if let Some(inner) = t.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        return Interval::point(parse_endpoint(inner)?);
    }
    let mut chars = t.chars();
    let lo_closed = match chars.next() {
        Some('[') => true,
        Some('(') => false,
        _ => return Err(bad()),
    };
    let hi_closed = match chars.next_back() {
        Some(']') => true,
        Some(')') => false,
        _ => return Err(bad()),
    };
    let (lo, hi) = chars.as_str().split_once(',').ok_or_else(bad)?;
    Interval::new(parse_endpoint(lo)?, parse_endpoint(hi)?, lo_closed, hi_closed)
}

/// Parses `[1,2]`, `(-inf,-1]U[2,inf)`, `{3}`; `∪` and `u` also separate.
impl FromStr for IntervalSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(['U', 'u', '∪'])
            .map(parse_interval)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(parts))
    }
}

impl TryFrom<String> for IntervalSet {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<IntervalSet> for String {
    fn from(b: IntervalSet) -> String {
        b.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSide {
    Interior,
    Closure,
}

/// `inf x²/2` over the interior or closure of `b`, `+∞` when that set is empty.
pub fn mdp_rate_interval(b: &IntervalSet, side: SetSide) -> f64 {
    b.inf_abs(side).map_or(f64::INFINITY, |d| d * d / 2.0)
}
