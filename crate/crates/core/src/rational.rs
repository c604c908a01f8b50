//! Exact rational helpers on top of `num`'s arbitrary-precision fractions.
//!
//! Every value in this crate (expansions, endpoints, measures) is a
//! [`Rational`]. The JSON form is `{"num": "..", "den": "..", "approx": f64}`
//! with decimal strings so that no precision is lost in transit.

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `s^e` as a big integer.
pub fn big_pow(s: u32, e: usize) -> BigInt {
    num::pow(BigInt::from(s), e)
}

/// `s^{-e}`.
pub fn inv_pow(s: u32, e: usize) -> Rational {
    Rational::new(BigInt::one(), big_pow(s, e))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Bit length of the denominator.
pub fn den_bits(x: &Rational) -> u64 {
    x.denom().bits()
}

pub fn is_unit_interval(x: &Rational) -> bool {
    *x >= Rational::zero() && *x <= Rational::one()
}

/// Wire form of a rational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
    pub approx: f64,
}

impl From<&Rational> for RationalJson {
    fn from(x: &Rational) -> Self {
        RationalJson {
            num: x.numer().to_string(),
            den: x.denom().to_string(),
            approx: to_f64(x),
        }
    }
}

impl TryFrom<RationalJson> for Rational {
    type Error = String;

    fn try_from(j: RationalJson) -> Result<Self, Self::Error> {
        let num: BigInt = j.num.parse().map_err(|_| format!("bad numerator {:?}", j.num))?;
        let den: BigInt = j.den.parse().map_err(|_| format!("bad denominator {:?}", j.den))?;
        if den <= BigInt::zero() {
            return Err(format!("denominator must be positive, got {den}"));
        }
        Ok(Rational::new(num, den))
    }
}

/// `#[serde(with = "sadic::rational::json")]` adapter.
pub mod json {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, ser: S) -> Result<S::Ok, S::Error> {
        RationalJson::from(x).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational, D::Error> {
        let j = RationalJson::deserialize(de)?;
        Rational::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Same adapter for `(Rational, Rational)` pairs, written as a two-element array.
pub mod json_pair {
    use super::*;

    pub fn serialize<S: Serializer>(x: &(Rational, Rational), ser: S) -> Result<S::Ok, S::Error> {
        (RationalJson::from(&x.0), RationalJson::from(&x.1)).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<(Rational, Rational), D::Error> {
        let (a, b) = <(RationalJson, RationalJson)>::deserialize(de)?;
        let a = Rational::try_from(a).map_err(serde::de::Error::custom)?;
        let b = Rational::try_from(b).map_err(serde::de::Error::custom)?;
        Ok((a, b))
    }
}
