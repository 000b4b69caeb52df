//! Exact rational helpers: parsing, formatting and rounding.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn int(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

pub fn frac(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn from_biguint(v: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

/// Parses `"3"`, `"-2"`, `"1/2"` or a decimal such as `"0.25"`.
pub fn parse(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::input(format!("cannot parse rational {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::input(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, fraction)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !fraction.chars().all(|c| c.is_ascii_digit())
            || !whole_digits.chars().all(|c| c.is_ascii_digit())
            || (whole_digits.is_empty() && fraction.is_empty())
        {
            return Err(bad());
        }
        let digits = format!("{whole_digits}{fraction}");
        let numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let denom = num_traits::pow(BigInt::from(10u32), fraction.len());
        let value = BigRational::new(numer, denom);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Formats as `"p"` for integers and `"p/q"` otherwise.
pub fn format(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn floor(value: &BigRational) -> BigInt {
    value.numer().div_floor(value.denom())
}

pub fn ceil(value: &BigRational) -> BigInt {
    -((-value.numer()).div_floor(value.denom()))
}

/// Lossy conversion for display-only fields.
pub fn approx(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        let n = value.numer().to_f64().unwrap_or(f64::NAN);
        let d = value.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// `value mod modulus` into `[0, modulus)` for a positive integer modulus.
pub fn rem_euclid(value: &BigRational, modulus: u64) -> BigRational {
    let m = int(modulus);
    let q = floor(&(value / &m));
    value - m * BigRational::from_integer(q)
}

pub fn is_nonnegative(value: &BigRational) -> bool {
    !value.is_negative()
}

/// Validates an accuracy parameter: `0 < eps < 1`, or `<= 1` when `allow_one`.
pub fn check_eps(eps: &BigRational, allow_one: bool) -> Result<()> {
    let one = BigRational::one();
    let ok = eps.is_positive() && (*eps < one || (allow_one && *eps == one));
    if ok {
        Ok(())
    } else {
        let range = if allow_one { "(0, 1]" } else { "(0, 1)" };
        Err(Error::input(format!("eps {} is outside {range}", format(eps))))
    }
}
