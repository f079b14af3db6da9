//! Exact rational helpers shared by every module.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `1 / 2^k`.
pub fn inv_pow2(k: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

pub fn pow2(k: usize) -> Rational {
    Rational::from_integer(BigInt::one() << k)
}

/// Parses `"p/q"` or an integer. Whitespace around the parts is ignored.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Format(format!("not a rational number: {text:?}"));
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Format(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Parses a rational and checks it lies in `[0, 1]`.
pub fn parse_unit(text: &str, name: &'static str) -> Result<Rational> {
    let value = parse_rational(text)?;
    check_unit(&value, name)?;
    Ok(value)
}

pub fn check_unit(value: &Rational, name: &'static str) -> Result<()> {
    if value.is_negative() || *value > Rational::one() {
        return Err(Error::OutOfUnitInterval { name, value: value.clone() });
    }
    Ok(())
}

/// Canonical `p/q` rendering; integers keep the `/1` so columns stay uniform.
pub fn format_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Decimal rendering rounded half away from zero to `digits` places.
pub fn to_decimal(value: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = value.numer() * &scale;
    let den = value.denom();
    let (mut q, r) = scaled.abs().div_rem(den);
    if r * 2u32 >= *den {
        q += 1u32;
    }
    let sign = if value.is_negative() && !q.is_zero() { "-" } else { "" };
    let s = q.to_string();
    if digits == 0 {
        return format!("{sign}{s}");
    }
    let s = format!("{:0>width$}", s, width = digits + 1);
    let (whole, frac) = s.split_at(s.len() - digits);
    format!("{sign}{whole}.{frac}")
}

/// Bit length of the denominator; used to bound exact iteration.
pub fn denominator_bits(value: &Rational) -> u64 {
    value.denom().bits()
}

pub fn pow2_big(k: usize) -> BigUint {
    BigUint::one() << k
}

/// Largest dyadic `m / 2^bits` not above `value`.
pub fn round_down_dyadic(value: &Rational, bits: usize) -> Rational {
    let scale = BigInt::one() << bits;
    let num = (value.numer() * &scale).div_floor(value.denom());
    Rational::new(num, scale)
}

/// Smallest dyadic `m / 2^bits` not below `value`.
pub fn round_up_dyadic(value: &Rational, bits: usize) -> Rational {
    let scale = BigInt::one() << bits;
    let num = (value.numer() * &scale).div_ceil(value.denom());
    Rational::new(num, scale)
}
