//! Exact parsing of probabilities written as `a/b`, decimals or integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses `3/8`, `0.375` or `1` into an exact rational.
pub fn parse_fraction(text: &str) -> Result<BigRational> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in `{text}`")))?;
        let den: BigInt = den.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in `{text}`")))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{text}`")));
        }
        return Ok(BigRational::new(num, den));
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("`{text}` is not a number"));
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = BigRational::new(num, den);
    Ok(if negative { -value } else { value })
}

pub(crate) fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn is_probability(value: &BigRational) -> bool {
    !value.is_negative() && value <= &BigRational::one()
}
