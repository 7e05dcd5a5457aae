//! Scalar abstraction shared by the exact (big rational) and floating modes.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::Error;

/// Exact arithmetic type.
pub type Exact = BigRational;

/// Default relative tolerance in floating mode.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Number type the whole library is generic over.
///
/// Implemented for [`f64`] and [`Exact`]. All operations consume their
/// operands, so callers clone where needed; instances are small.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + FromPrimitive + Send + Sync + 'static
{
    /// `true` for the big-rational implementation.
    const EXACT: bool;

    fn from_literal(lit: &Literal) -> Result<Self, Error>;

    fn to_f64(&self) -> f64;

    fn is_finite(&self) -> bool;

    /// Zero for exact arithmetic, [`FLOAT_TOLERANCE`] for floats.
    fn default_tolerance() -> Self;

    /// JSON rendering: integers become numbers, other exact values become
    /// `"p/q"` strings so they can be read back without loss.
    fn to_json(&self) -> Value;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer is representable")
    }

    fn half(self) -> Self {
        self / Self::from_int(2)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_literal(lit: &Literal) -> Result<Self, Error> {
        Ok(lit.to_f64())
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn default_tolerance() -> Self {
        FLOAT_TOLERANCE
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_literal(lit: &Literal) -> Result<Self, Error> {
        match lit {
            Literal::Integer(i) => Ok(BigRational::from_integer(i.clone())),
            Literal::Ratio(r) => Ok(r.clone()),
            Literal::Float(f) => BigRational::from_float(*f)
                .ok_or_else(|| Error::Parse(format!("{f} has no exact rational value"))),
        }
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn default_tolerance() -> Self {
        Self::zero()
    }

    fn to_json(&self) -> Value {
        if self.is_integer() {
            if let Some(i) = self.numer().to_i64() {
                return Value::from(i);
            }
        }
        Value::String(self.to_string())
    }
}

/// `lhs <= rhs` up to a relative tolerance scaled by `max(1, |lhs|, |rhs|)`.
pub fn le_tol<T: Scalar>(lhs: &T, rhs: &T, tol: &T) -> bool {
    if lhs <= rhs {
        return true;
    }
    if tol.is_zero() {
        return false;
    }
    let scale = max_of(T::one(), max_of(lhs.abs(), rhs.abs()));
    lhs.clone() - rhs.clone() <= tol.clone() * scale
}

/// Equality up to the same relative tolerance as [`le_tol`].
pub fn eq_tol<T: Scalar>(lhs: &T, rhs: &T, tol: &T) -> bool {
    le_tol(lhs, rhs, tol) && le_tol(rhs, lhs, tol)
}

pub fn max_of<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

pub fn min_of<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// A numeric literal as read from an input file, before the arithmetic
/// mode is fixed.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Integer(BigInt),
    Ratio(BigRational),
    Float(f64),
}

impl Literal {
    /// Whether the literal can be represented without rounding.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Literal::Float(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Literal::Integer(i) => i.to_f64().unwrap_or(f64::NAN),
            Literal::Ratio(r) => ToPrimitive::to_f64(r).unwrap_or(f64::NAN),
            Literal::Float(f) => *f,
        }
    }

    pub fn from_json(value: &Value) -> Result<Self, Error> {
        match value {
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Literal::Integer(BigInt::from(i)))
                } else if let Some(u) = n.as_u64() {
                    Ok(Literal::Integer(BigInt::from(u)))
                } else {
                    let f = n
                        .as_f64()
                        .ok_or_else(|| Error::Parse(format!("unreadable number {n}")))?;
                    Ok(Literal::Float(f))
                }
            }
            Value::String(s) => s.parse(),
            other => Err(Error::Parse(format!("expected a number or ratio string, got {other}"))),
        }
    }
}

impl FromStr for Literal {
    type Err = Error;

    /// Accepts `"p"`, `"p/q"` and plain decimals such as `"-1.25"`; decimals
    /// are converted exactly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::Parse(format!("malformed numeric literal {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den: BigInt = den.trim().parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(Literal::Ratio(BigRational::new(num, den)));
        }
        if let Ok(i) = s.parse::<BigInt>() {
            return Ok(Literal::Integer(i));
        }
        parse_decimal(s).map(Literal::Ratio).ok_or_else(bad)
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = BigRational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Parse a literal straight into a scalar of the requested mode.
pub fn parse_scalar<T: Scalar>(s: &str) -> Result<T, Error> {
    T::from_literal(&s.parse()?)
}

/// Convenience constructor for exact values in tests and examples.
pub fn ratio(numer: i64, denom: i64) -> Exact {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn exact_int(v: i64) -> Exact {
    BigRational::from_integer(BigInt::from(v))
}
