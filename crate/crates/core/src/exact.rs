//! Exact rational helpers shared by every module.
//!
//! All instance data, range parameters and squared base values are kept as
//! [`BigRational`]. Square roots only appear through [`sqrt_floor`] (a
//! rational lower approximation with a guaranteed relative error) or
//! [`exact_sqrt`] when the argument is a perfect rational square.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FairDivError, Result};

pub type Q = BigRational;

pub fn int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"0.511"`.
pub fn parse_rational(text: &str) -> Result<Q> {
    let s = text.trim();
    let bad = || FairDivError::Malformed(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(p, q));
    }
    if let Some((whole, fractional)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if (digits.is_empty() && fractional.is_empty())
            || !digits.chars().all(|c| c.is_ascii_digit())
            || !fractional.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let mantissa: BigInt = format!("{digits}{fractional}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), fractional.len());
        let value = Q::new(mantissa, scale);
        return Ok(if negative { -value } else { value });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(p))
}

/// `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Returns `Some(r)` with `r * r == q` when `q` is the square of a rational.
pub fn exact_sqrt(q: &Q) -> Option<Q> {
    if q.is_negative() {
        return None;
    }
    let p = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&p * &p) == q.numer() && &(&d * &d) == q.denom() {
        Some(Q::new(p, d))
    } else {
        None
    }
}

/// Rational `r` with `r <= sqrt(q)` and `sqrt(q) - r < 2^-bits * sqrt(q)`.
/// Exact whenever `q` is a perfect rational square.
pub fn sqrt_floor(q: &Q, bits: u32) -> Q {
    if q.is_zero() {
        return Q::zero();
    }
    if let Some(r) = exact_sqrt(q) {
        return r;
    }
    let n = q.numer() * q.denom();
    let have = n.bits() / 2;
    let want = u64::from(bits) + 2;
    let k = want.saturating_sub(have) as usize;
    let scaled: BigInt = &n << (2 * k);
    let root = scaled.sqrt();
    Q::new(root, q.denom() << k)
}

/// A ratio in `[0, +inf]`. `Infinite` marks a vacuous comparison.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FairRatio {
    Finite(Q),
    Infinite,
}

impl FairRatio {
    /// `num / den`, with a zero denominator meaning the bound is vacuous.
    pub fn of(num: Q, den: &Q) -> Self {
        if den.is_zero() {
            FairRatio::Infinite
        } else {
            FairRatio::Finite(num / den)
        }
    }

    pub fn one() -> Self {
        FairRatio::Finite(Q::one())
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            FairRatio::Finite(q) => Some(q),
            FairRatio::Infinite => None,
        }
    }

    pub fn is_at_least(&self, threshold: &Q) -> bool {
        match self {
            FairRatio::Finite(q) => q >= threshold,
            FairRatio::Infinite => true,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            FairRatio::Finite(q) => to_f64(q),
            FairRatio::Infinite => f64::INFINITY,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "+inf" | "infinity" => Ok(FairRatio::Infinite),
            other => parse_rational(other).map(FairRatio::Finite),
        }
    }
}

impl fmt::Display for FairRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FairRatio::Finite(q) => f.write_str(&format_rational(q)),
            FairRatio::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for FairRatio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FairRatio {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        FairRatio::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Q, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_q_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(qs: &[Q], serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(qs.len()))?;
        for q in qs {
            seq.serialize_element(&format_rational(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Vec<Q>, D::Error> {
        let items = Vec::<String>::deserialize(deserializer)?;
        items
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
