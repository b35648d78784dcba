//! Scalar abstraction shared by the SHS engine and the closed-form expressions.
//!
//! Everything analytic in this crate is written once against [`Scalar`] and
//! instantiated for `f32`, `f64` and [`BigRational`]. The rational instance
//! solves the SHS linear systems without round-off, which is what lets the
//! test suite compare closed forms against the engine for exact equality.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// A field element usable by the analytic code paths.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync
{
    /// Relative pivot magnitude below which a matrix is treated as singular.
    /// Zero for exact types.
    fn singular_tolerance() -> Self;

    /// `true` when arithmetic is exact (no round-off).
    fn is_exact() -> bool;

    /// Converts a small integer constant.
    fn int(value: i64) -> Self {
        Self::from_i64(value).expect("integer constant representable")
    }

    /// Converts a finite `f64` literal (tolerances, grid points).
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn singular_tolerance() -> Self {
        64.0 * f64::EPSILON
    }

    fn is_exact() -> bool {
        false
    }
}

impl Scalar for f32 {
    fn singular_tolerance() -> Self {
        64.0 * f32::EPSILON
    }

    fn is_exact() -> bool {
        false
    }
}

impl Scalar for BigRational {
    fn singular_tolerance() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }

    fn is_exact() -> bool {
        true
    }
}

/// Builds an exact rational `numer / denom`.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}
