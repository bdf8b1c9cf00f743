//! Exact rationals and rationals extended with positive infinity.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number used for every weight in the crate.
pub type Rat = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rat {
    Rat::from_integer(BigInt::from(value))
}

/// Parses `"p/q"` or `"p"` with optional sign. Decimal points are rejected.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not an exact rational: {text:?}"));
    let (numer, denom) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let numer = BigInt::from_str(numer).map_err(|_| bad())?;
    let denom = BigInt::from_str(denom).map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rat::new(numer, denom))
}

pub fn format_rat(value: &Rat) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn ceil(value: &Rat) -> BigInt {
    value.ceil().to_integer()
}

pub fn floor(value: &Rat) -> BigInt {
    value.floor().to_integer()
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_rat {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let text = String::deserialize(d)?;
        parse_rat(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for sequences of rationals.
pub mod serde_rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(values: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(values.iter().map(format_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_rat(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// A rational number or positive infinity.
///
/// Ordering puts every finite value below `Infinite`. Addition is absorbing
/// in infinity, and scaling follows the convention `0 * inf = inf`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtRat {
    Finite(Rat),
    Infinite,
}

impl ExtRat {
    pub fn zero() -> Self {
        ExtRat::Finite(Rat::zero())
    }

    pub fn from_int(value: i64) -> Self {
        ExtRat::Finite(int(value))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRat::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRat::Infinite)
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            ExtRat::Finite(v) => Some(v),
            ExtRat::Infinite => None,
        }
    }

    /// Non-negative scaling; `c * inf = inf` for every `c >= 0`, including zero.
    pub fn scale(&self, factor: &Rat) -> Self {
        debug_assert!(!factor.is_negative());
        match self {
            ExtRat::Finite(v) => ExtRat::Finite(v * factor),
            ExtRat::Infinite => ExtRat::Infinite,
        }
    }

    pub fn shift(&self, by: &Rat) -> Self {
        match self {
            ExtRat::Finite(v) => ExtRat::Finite(v + by),
            ExtRat::Infinite => ExtRat::Infinite,
        }
    }

    /// Adds `count` copies of `self`.
    pub fn times(&self, count: usize) -> Self {
        self.scale(&Rat::from_integer(BigInt::from(count)))
    }
}

impl From<Rat> for ExtRat {
    fn from(value: Rat) -> Self {
        ExtRat::Finite(value)
    }
}

impl Add for &ExtRat {
    type Output = ExtRat;

    fn add(self, rhs: &ExtRat) -> ExtRat {
        match (self, rhs) {
            (ExtRat::Finite(a), ExtRat::Finite(b)) => ExtRat::Finite(a + b),
            _ => ExtRat::Infinite,
        }
    }
}

impl Add for ExtRat {
    type Output = ExtRat;

    fn add(self, rhs: ExtRat) -> ExtRat {
        &self + &rhs
    }
}

impl PartialEq<Rat> for ExtRat {
    fn eq(&self, other: &Rat) -> bool {
        matches!(self, ExtRat::Finite(v) if v == other)
    }
}

impl PartialOrd<Rat> for ExtRat {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(match self {
            ExtRat::Finite(v) => v.cmp(other),
            ExtRat::Infinite => Ordering::Greater,
        })
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRat::Finite(v) => f.write_str(&format_rat(v)),
            ExtRat::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtRat {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "+inf" | "∞" => Ok(ExtRat::Infinite),
            other => parse_rat(other).map(ExtRat::Finite),
        }
    }
}

impl Serialize for ExtRat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Least common multiple of the denominators, used to clear fractions.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("-7").unwrap(), int(-7));
        assert_eq!(parse_rat(" 4 / -8 ").unwrap(), rat(-1, 2));
        assert!(parse_rat("1.5").is_err());
        assert!(parse_rat("1/0").is_err());
        assert_eq!(format_rat(&rat(10, 4)), "5/2");
        assert_eq!(format_rat(&int(-3)), "-3");
    }

    #[test]
    fn infinity_conventions() {
        let inf = ExtRat::Infinite;
        let two = ExtRat::from_int(2);
        assert_eq!(&inf + &two, ExtRat::Infinite);
        assert_eq!(inf.scale(&Rat::zero()), ExtRat::Infinite);
        assert_eq!(two.scale(&Rat::zero()), ExtRat::zero());
        assert!(two < inf);
        assert!(ExtRat::from_int(-100) < two);
        assert_eq!("inf".parse::<ExtRat>().unwrap(), inf);
        assert_eq!(
            "-7/3".parse::<ExtRat>().unwrap(),
            ExtRat::Finite(rat(-7, 3))
        );
        assert_eq!(inf.shift(&int(-7)), ExtRat::Infinite);
    }

    #[test]
    fn serde_strings() {
        let v = vec![ExtRat::Finite(rat(3, 2)), ExtRat::Infinite];
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, r#"["3/2","inf"]"#);
        let back: Vec<ExtRat> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn lcm_of_denominators() {
        let xs = [rat(1, 4), rat(5, 6), int(3)];
        assert_eq!(common_denominator(xs.iter()), BigInt::from(12));
    }
}
