//! Scalar abstraction for the geometry kernel.
//!
//! Geometry is written once against [`Scalar`] and instantiated with
//! [`Rational`] everywhere the protocol needs decidable equality. `f64`
//! satisfies the bound as well and is handy for quick experiments, but
//! predicates on it are only as good as floating point.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact arbitrary-precision rational, always kept in lowest terms.
pub type Rational = BigRational;

/// Field-like number type the geometry kernel operates over.
pub trait Scalar:
    Clone + PartialOrd + Debug + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Clone
        + PartialOrd
        + Debug
        + Num
        + Signed
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

pub(crate) fn min_of<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

pub(crate) fn max_of<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

pub(crate) fn to_f64<T: Scalar>(x: &T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `"num/den"`, a plain integer, or a finite decimal such as `"-0.125"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    if let Some((num, den)) = t.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if frac.is_empty() && int_digits.is_empty() {
            return Err(err());
        }
        if !int_digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let digits = format!("{int_digits}{frac}");
        let mantissa =
            BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        let value = Rational::new(mantissa, scale);
        return Ok(if negative { -value } else { value });
    }
    let num = BigInt::from_str(t).map_err(|_| err())?;
    Ok(Rational::from_integer(num))
}

/// Canonical `"num/den"` rendering; integers keep the `/1` suffix.
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn rational_from_i64(x: i64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

pub fn rational_ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn is_unit_interval<T: Scalar>(x: &T) -> bool {
    *x >= T::zero() && *x <= T::one()
}
