//! Continued fractions on exact rationals and the Gauss-measure quantities
//! used by the continued-fraction simulation.
//!
//! For `x ∈ (0,1)` the digits are `a_1 = ⌊1/x⌋` and `a_{n+1} = a_1(Tⁿx)` with
//! the Gauss map `T(x) = 1/x - ⌊1/x⌋`. On a rational `p/q` this is exactly the
//! Euclidean algorithm on `(q, p)`, which is what [`cf_digits`] runs.
//!
//! The grid points `iπ/10000` are built from a fixed 200-decimal-digit
//! rational π̂; a 300-digit constant is kept so the digit stability of the
//! grid can be checked rather than assumed.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use num_rational::BigRational;

use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Number of grid points `π/10000, …, 3182π/10000` (all below 1).
pub const GRID_SIZE: usize = 3182;

const PI_200: &str = "3.\
14159265358979323846264338327950288419716939937510582097494459230781640628620899862803482534211706798214808651328230664709384460955058223172535940812848111745028410270193852110555964462294895493038196";

const PI_300: &str = "3.\
141592653589793238462643383279502884197169399375105820974944592307816406286208998628034825342117067982148086513282306647093844609550582231725359408128481117450284102701938521105559644622948954930381964428810975665933446128475648233786783165271201909145648566923460348610454326648213393607260249141273";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiPrecision {
    /// 200 decimal digits after the point (the default).
    #[default]
    Digits200,
    /// 300 decimal digits after the point.
    Digits300,
}

impl PiPrecision {
    pub fn digits(self) -> usize {
        match self {
            PiPrecision::Digits200 => 200,
            PiPrecision::Digits300 => 300,
        }
    }
}

fn parse_decimal(s: &str) -> BigRational {
    let (int, frac) = s.split_once('.').expect("decimal point");
    let numer: BigInt = format!("{int}{frac}").parse().expect("decimal digits");
    let denom = num_traits::pow(BigInt::from(10u32), frac.len());
    BigRational::new(numer, denom)
}

/// The embedded rational approximation of π.
pub fn pi_approx(precision: PiPrecision) -> &'static BigRational {
    static PI200: OnceLock<BigRational> = OnceLock::new();
    static PI300: OnceLock<BigRational> = OnceLock::new();
    match precision {
        PiPrecision::Digits200 => PI200.get_or_init(|| parse_decimal(PI_200)),
        PiPrecision::Digits300 => PI300.get_or_init(|| parse_decimal(PI_300)),
    }
}

/// Continued-fraction digits `a_1, a_2, …` of a number in (0,1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfDigits {
    pub digits: Vec<BigUint>,
    /// The expansion ended because the remainder hit zero.
    pub terminated: bool,
}

impl CfDigits {
    /// Folds the digits back into `1/(a_1 + 1/(a_2 + …))`.
    pub fn to_rational(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for a in self.digits.iter().rev() {
            acc = (BigRational::from_integer(BigInt::from(a.clone())) + acc).recip();
        }
        acc
    }

    /// Digits as `f64` (`inf` past the float range).
    pub fn to_f64(&self) -> Vec<f64> {
        self.digits
            .iter()
            .map(|d| d.to_f64().unwrap_or(f64::INFINITY))
            .collect()
    }

    /// Digits as `u64`, if they all fit.
    pub fn to_u64(&self) -> Option<Vec<u64>> {
        self.digits.iter().map(|d| d.to_u64()).collect()
    }
}

fn check_unit_interval(x: &BigRational) -> Result<()> {
    if !x.is_positive() || *x >= BigRational::one() {
        return Err(Error::Domain(format!("{x} is not in (0,1)")));
    }
    Ok(())
}

/// Up to `max_terms` digits of `x ∈ (0,1)`, by Euclidean division.
pub fn cf_digits(x: &BigRational, max_terms: usize) -> Result<CfDigits> {
    check_unit_interval(x)?;
    let mut p = x.numer().magnitude().clone();
    let mut q = x.denom().magnitude().clone();
    let mut digits = Vec::with_capacity(max_terms.min(64));
    while !p.is_zero() && digits.len() < max_terms {
        let (a, r) = q.div_rem(&p);
        digits.push(a);
        q = p;
        p = r;
    }
    Ok(CfDigits {
        digits,
        terminated: p.is_zero(),
    })
}

/// `T(x) = 1/x - ⌊1/x⌋`.
pub fn gauss_map(x: &BigRational) -> Result<BigRational> {
    check_unit_interval(x)?;
    let inv = x.recip();
    Ok(inv.fract())
}

fn gauss_term(j: u64) -> f64 {
    let j = j as f64;
    (1.0 / (j * (j + 2.0))).ln_1p()
}

/// `G({a_1 = j}) = ln(1 + 1/(j(j+2))) / ln 2`.
pub fn gauss_mass(j: u64) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("digit index must be >= 1".into()));
    }
    Ok(gauss_term(j) / std::f64::consts::LN_2)
}

/// `Σ_{j<=J} gauss_mass(j)`, summed term by term.
pub fn gauss_partial_sum(terms: u64) -> Result<f64> {
    if terms == 0 {
        return Err(Error::Domain("need at least one term".into()));
    }
    let mut acc = CompensatedSum::new();
    for j in 1..=terms {
        acc.add(gauss_term(j));
    }
    Ok(acc.value() / std::f64::consts::LN_2)
}

/// Telescoped form `ln(2(J+1)/(J+2)) / ln 2 = 1 + ln(1 - 1/(J+2)) / ln 2`.
pub fn gauss_partial_sum_closed(terms: u64) -> f64 {
    1.0 + (-1.0 / (terms as f64 + 2.0)).ln_1p() / std::f64::consts::LN_2
}

/// `a^e`, using `cbrt` for the cube root.
pub fn digit_power(a: f64, exponent: f64) -> f64 {
    if exponent == 1.0 / 3.0 {
        a.cbrt()
    } else {
        a.powf(exponent)
    }
}

/// `(1/ln 2) Σ_{j=1}^{J} j^e ln(1 + 1/(j(j+2)))`: the Gauss-measure mean of
/// `a_1^e` truncated after `J` terms.
pub fn mu_truncated(terms: u64, exponent: f64) -> Result<f64> {
    if terms == 0 {
        return Err(Error::Domain("need at least one term".into()));
    }
    if !(0.0..1.0).contains(&exponent) {
        return Err(Error::Domain(format!("exponent {exponent} outside [0,1)")));
    }
    let mut acc = CompensatedSum::new();
    for j in 1..=terms {
        acc.add(digit_power(j as f64, exponent) * gauss_term(j));
    }
    Ok(acc.value() / std::f64::consts::LN_2)
}

/// Grid point `index·π̂/10000` for `1 <= index <= 3182`.
pub fn pi_grid_point(index: usize, precision: PiPrecision) -> Result<BigRational> {
    if !(1..=GRID_SIZE).contains(&index) {
        return Err(Error::Domain(format!("grid index {index} outside [1, {GRID_SIZE}]")));
    }
    Ok(pi_approx(precision) * BigRational::new(BigInt::from(index), BigInt::from(10_000u32)))
}

/// `ζ_i = a_i(x)^e` for `i = 1..n` at grid point `index`, uncentred.
///
/// Fails rather than pads when the expansion terminates early.
pub fn cf_series(
    index: usize,
    n: usize,
    exponent: f64,
    precision: PiPrecision,
) -> Result<Vec<f64>> {
    let x = pi_grid_point(index, precision)?;
    let cf = cf_digits(&x, n)?;
    if cf.digits.len() < n {
        return Err(Error::Precision(format!(
            "grid point {index} has only {} digits, need {n}",
            cf.digits.len()
        )));
    }
    Ok(cf.to_f64().into_iter().map(|a| digit_power(a, exponent)).collect())
}
