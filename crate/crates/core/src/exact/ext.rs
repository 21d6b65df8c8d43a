use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A rational number or `+inf`. Finite values order below infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtRational {
    Finite(BigRational),
    Infinite,
}

impl ExtRational {
    pub fn zero() -> Self {
        ExtRational::Finite(BigRational::zero())
    }

    pub fn int(v: i64) -> Self {
        ExtRational::Finite(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        ExtRational::Finite(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinite)
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinite => None,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.finite().is_some_and(|r| r.is_negative())
    }

    /// `a + inf = inf`.
    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a + b),
            _ => ExtRational::Infinite,
        }
    }

    pub fn add_rational(&self, r: &BigRational) -> Self {
        match self {
            ExtRational::Finite(a) => ExtRational::Finite(a + r),
            ExtRational::Infinite => ExtRational::Infinite,
        }
    }

    /// `inf - finite = inf`; subtracting infinity is an error.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => Ok(ExtRational::Finite(a - b)),
            (ExtRational::Infinite, ExtRational::Finite(_)) => Ok(ExtRational::Infinite),
            (ExtRational::Infinite, ExtRational::Infinite) => {
                Err(Error::UndefinedArithmetic("inf - inf"))
            }
            (ExtRational::Finite(_), ExtRational::Infinite) => {
                Err(Error::UndefinedArithmetic("finite - inf"))
            }
        }
    }

    /// Strictly greater than a finite value.
    pub fn gt_rational(&self, r: &BigRational) -> bool {
        match self {
            ExtRational::Finite(a) => a > r,
            ExtRational::Infinite => true,
        }
    }

    /// Nearest double, `f64::INFINITY` for infinity.
    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRational::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
            ExtRational::Infinite => f64::INFINITY,
        }
    }
}

impl From<BigRational> for ExtRational {
    fn from(r: BigRational) -> Self {
        ExtRational::Finite(r)
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Infinite => write!(f, "inf"),
            ExtRational::Finite(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            ExtRational::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

/// Exact parse of an integer, `p/q`, a plain decimal such as `0.25`, or `inf`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidValue(format!("not a rational: {s:?}"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(&digits).map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

impl FromStr for ExtRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("inf") {
            Ok(ExtRational::Infinite)
        } else {
            parse_rational(s).map(ExtRational::Finite)
        }
    }
}
