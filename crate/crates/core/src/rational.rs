//! Exact rational helpers shared by every module.
//!
//! All objective values, block lengths and time stamps are carried as
//! arbitrary-precision rationals. Decimal strings exist only at the edges:
//! parsing user input (`"0.2"` becomes exactly `1/5`) and rendering output.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty number")]
    Empty,
    #[error("malformed decimal `{0}`")]
    Malformed(String),
    #[error("zero denominator")]
    ZeroDenominator,
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: u64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses a plain decimal (`"12"`, `"0.2"`, `"-1.25"`) into an exact rational.
pub fn parse_decimal(text: &str) -> Result<Rational, RationalParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    let digits_ok = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if (whole.is_empty() && frac.is_empty()) || !digits_ok(whole) || !digits_ok(frac) {
        return Err(RationalParseError::Malformed(text.to_string()));
    }
    if body.ends_with('.') {
        return Err(RationalParseError::Malformed(text.to_string()));
    }
    let mut all_digits = String::with_capacity(whole.len() + frac.len());
    all_digits.push_str(whole);
    all_digits.push_str(frac);
    let numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits
            .parse()
            .map_err(|_| RationalParseError::Malformed(text.to_string()))?
    };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = Rational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// Renders `value` with exactly `places` fractional digits, rounding half to even.
pub fn to_decimal(value: &Rational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = value.abs() * Rational::from_integer(scale.clone());
    let floor = scaled.floor();
    let rem = &scaled - &floor;
    let half = ratio(1, 2);
    let mut q = floor.to_integer();
    if rem > half || (rem == half && q.is_odd()) {
        q += 1;
    }
    let (int_part, frac_part) = q.div_rem(&scale);
    let sign = if value.is_negative() && !q.is_zero() {
        "-"
    } else {
        ""
    };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!(
            "{sign}{int_part}.{:0>width$}",
            frac_part.to_string(),
            width = places
        )
    }
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Decimal places used for the display-only `decimal` field in JSON output.
pub const JSON_DECIMAL_PLACES: usize = 6;

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Small(i64),
    Big(String),
}

impl IntRepr {
    fn of(value: &BigInt) -> Self {
        match value.to_i64() {
            Some(v) => IntRepr::Small(v),
            None => IntRepr::Big(value.to_string()),
        }
    }

    fn into_bigint(self) -> Result<BigInt, String> {
        match self {
            IntRepr::Small(v) => Ok(BigInt::from(v)),
            IntRepr::Big(s) => s.trim().parse().map_err(|_| format!("bad integer `{s}`")),
        }
    }
}

#[derive(Serialize)]
struct ExactOut {
    num: IntRepr,
    den: IntRepr,
    decimal: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExactIn {
    num: IntRepr,
    den: IntRepr,
    #[serde(default)]
    #[allow(dead_code)]
    decimal: Option<String>,
}

impl ExactOut {
    fn of(value: &Rational) -> Self {
        ExactOut {
            num: IntRepr::of(value.numer()),
            den: IntRepr::of(value.denom()),
            decimal: to_decimal(value, JSON_DECIMAL_PLACES),
        }
    }
}

impl ExactIn {
    fn into_rational<E: serde::de::Error>(self) -> Result<Rational, E> {
        let num = self.num.into_bigint().map_err(E::custom)?;
        let den = self.den.into_bigint().map_err(E::custom)?;
        if den.is_zero() {
            return Err(E::custom(RationalParseError::ZeroDenominator));
        }
        Ok(Rational::new(num, den))
    }
}

/// `#[serde(with = "exact")]`: `{num, den, decimal}` where `decimal` is display only.
pub mod exact {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        ExactOut::of(value).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        ExactIn::deserialize(d)?.into_rational()
    }
}

/// Same as [`exact`] for `Vec<Rational>` fields.
pub mod exact_vec {
    use super::*;

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(values.iter().map(ExactOut::of))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<ExactIn>::deserialize(d)?
            .into_iter()
            .map(ExactIn::into_rational)
            .collect()
    }
}

/// Display wrapper that prints a rational as `num/den (≈decimal)`.
pub struct Show<'a>(pub &'a Rational);

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(
                f,
                "{} (~{})",
                self.0,
                to_decimal(self.0, JSON_DECIMAL_PLACES)
            )
        }
    }
}
