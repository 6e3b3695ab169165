//! Coefficient scalars for the calculus carriers.
//!
//! The polynomial calculus and the reflection-group linear algebra are written
//! once, generically, and instantiated twice: with [`num::BigRational`] for the
//! exact path (rational reflection matrices, rational multiplicities) and with
//! `f64` for the float path that mirrors every operation on irrational systems.

use num::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Absolute threshold below which a float coefficient is dropped as noise.
pub const FLOAT_CHOP: f64 = 1e-12;

/// Field scalar usable as a polynomial coefficient or matrix entry.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + Send
    + Sync
    + 'static
{
    fn from_i64(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// True if the value should be treated as zero: exact zero for exact
    /// scalars, magnitude below [`FLOAT_CHOP`] for floats.
    fn is_negligible(&self) -> bool;

    fn to_f64(&self) -> f64;

    /// Whether arithmetic in this scalar is exact (no rounding).
    fn is_exact() -> bool;

    /// Parse a literal: integer `3`, ratio `3/2`, or (floats only) decimal `1.5`.
    fn parse_literal(s: &str) -> Option<Self>;
}

impl Scalar for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn is_negligible(&self) -> bool {
        self.abs() < FLOAT_CHOP
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_exact() -> bool {
        false
    }

    fn parse_literal(s: &str) -> Option<Self> {
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            if d == 0.0 {
                return None;
            }
            Some(n / d)
        } else {
            s.trim().parse().ok()
        }
    }
}

impl Scalar for BigRational {
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn to_f64(&self) -> f64 {
        // BigRational -> f64 via num's ToPrimitive; falls back on a
        // numerator/denominator split for values outside f64 range.
        num_traits::ToPrimitive::to_f64(self).unwrap_or_else(|| {
            let n = num_traits::ToPrimitive::to_f64(self.numer()).unwrap_or(f64::INFINITY);
            let d = num_traits::ToPrimitive::to_f64(self.denom()).unwrap_or(f64::INFINITY);
            n / d
        })
    }

    fn is_exact() -> bool {
        true
    }

    fn parse_literal(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: num::BigInt = n.trim().parse().ok()?;
            let d: num::BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        } else {
            let n: num::BigInt = s.parse().ok()?;
            Some(BigRational::from_integer(n))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rational_literals() {
        let x = BigRational::parse_literal("3/2").unwrap();
        assert_eq!(x, BigRational::from_ratio(3, 2));
        assert_eq!(BigRational::parse_literal("-7").unwrap(), BigRational::from_i64(-7));
        assert!(BigRational::parse_literal("1/0").is_none());
    }

    #[test]
    fn parse_float_literals() {
        assert_eq!(f64::parse_literal("1.5").unwrap(), 1.5);
        assert_eq!(f64::parse_literal("3/2").unwrap(), 1.5);
    }
}
