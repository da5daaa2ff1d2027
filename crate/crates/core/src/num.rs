//! Numeric back ends shared by the LP and matching code.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Ordered field used by the solvers.
///
/// `f64` compares against a fixed tolerance; [`Rational`] is exact and its
/// tolerance is zero.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + Send + Sync + 'static
{
    const EXACT: bool;

    fn tol() -> Self;

    /// Exact conversion for rationals, identity for floats.
    fn from_f64(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn from_int(v: i64) -> Self;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn is_pos(&self) -> bool {
        *self > Self::tol()
    }

    fn is_neg(&self) -> bool {
        *self < -Self::tol()
    }

    fn near_zero(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }

    fn near(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).near_zero()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn sum<I: IntoIterator<Item = Self>>(it: I) -> Self {
        it.into_iter().fold(Self::zero(), |acc, x| acc + x)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tol() -> Self {
        1e-9
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn tol() -> Self {
        Rational::zero()
    }

    fn from_f64(v: f64) -> Self {
        Rational::from_float(v).expect("finite capacity")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from_i64(v).unwrap_or_else(BigInt::one))
    }
}
