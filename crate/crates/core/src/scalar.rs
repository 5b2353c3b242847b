//! Scalar abstractions shared by the exact and floating-point layers.
//!
//! Polynomials, moment sequences and atomic measures are generic over
//! [`Scalar`], which covers `f32`, `f64` and arbitrary-precision rationals.
//! Dense numerical kernels additionally require [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficient ring for polynomials and moment data.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static {
    /// Lossy conversion into binary64.
    fn as_f64(&self) -> f64;

    /// Embedding of an exact rational; rounds for floating-point types.
    fn from_rational(r: &BigRational) -> Self;

    /// Conversion from binary64. Exact for rationals, `None` for non-finite input.
    fn try_from_f64(x: f64) -> Option<Self>;

    /// Whether arithmetic in this type is exact.
    fn is_exact() -> bool {
        false
    }
}

impl Scalar for f64 {
    fn as_f64(&self) -> f64 {
        *self
    }
    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn try_from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
}

impl Scalar for f32 {
    fn as_f64(&self) -> f64 {
        f64::from(*self)
    }
    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f32(r).unwrap_or(f32::NAN)
    }
    fn try_from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x as f32)
    }
}

impl Scalar for BigRational {
    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn try_from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn is_exact() -> bool {
        true
    }
}

/// Floating-point scalar for the dense linear-algebra kernels.
pub trait Real: Scalar + Float + FromPrimitive + Sum + Copy {
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }
}

impl<T> Real for T where T: Scalar + Float + FromPrimitive + Sum + Copy {}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// computed from continued-fraction convergents and the final semiconvergent.
pub fn rationalize(x: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let max_den = max_den.max(1) as i128;
    let negative = x < 0.0;
    let ax = x.abs();
    if ax > 1e15 {
        return BigRational::from_float(x);
    }

    // convergents p_k/q_k
    let (mut p0, mut q0, mut p1, mut q1): (i128, i128, i128, i128) = (0, 1, 1, 0);
    let mut frac = ax;
    loop {
        let a = frac.floor();
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_den {
            // semiconvergent (p0 + t p1)/(q0 + t q1) with the largest admissible t
            let t = (max_den - q0) / q1;
            let (ps, qs) = (p0 + t * p1, q0 + t * q1);
            let err_conv = (ax - p1 as f64 / q1 as f64).abs();
            let err_semi = (ax - ps as f64 / qs as f64).abs();
            if t > 0 && err_semi < err_conv {
                p1 = ps;
                q1 = qs;
            }
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let rem = frac - a;
        if rem <= f64::EPSILON * frac.max(1.0) || (ax - p1 as f64 / q1 as f64) == 0.0 {
            break;
        }
        frac = 1.0 / rem;
        if !frac.is_finite() || frac > 1e18 {
            break;
        }
    }
    let num = if negative { -p1 } else { p1 };
    Some(BigRational::new(BigInt::from(num), BigInt::from(q1)))
}

/// Formats a rational as `"num/den"`.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"num/den"`, a bare integer, or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().ok()? / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(all);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

/// `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationalize_snaps_near_integers() {
        assert_eq!(rationalize(0.999_999_999, 1_000_000).unwrap(), rat_int(1));
        assert_eq!(rationalize(-0.5, 10).unwrap(), rat(-1, 2));
        assert_eq!(rationalize(1.0 / 3.0 + 1e-13, 1_000_000).unwrap(), rat(1, 3));
    }

    #[test]
    fn rationalize_respects_denominator_cap() {
        let r = rationalize(std::f64::consts::PI, 1000).unwrap();
        assert!(r.denom() <= &BigInt::from(1000));
        assert_eq!(r, rat(355, 113));
    }

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), rat_int(7));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5e2").unwrap(), rat_int(-150));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(format_rational(&rat(6, -4)), "-3/2");
    }
}
