//! Floating-point abstraction shared by the numeric models.
//!
//! Link-budget arithmetic, rate mapping, metric aggregation and the
//! application lookups are written against [`Scalar`] so they run in either
//! `f32` or `f64`. Configuration values stay `f64` and are lifted with
//! [`Scalar::of`] at the call site.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lift an `f64` constant into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Decibel to linear power ratio.
#[inline]
pub fn db_to_linear<S: Scalar>(db: S) -> S {
    S::of(10.0).powf(db / S::of(10.0))
}

/// Linear power ratio to decibels.
#[inline]
pub fn linear_to_db<S: Scalar>(lin: S) -> S {
    S::of(10.0) * lin.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_roundtrip_both_precisions() {
        assert!((linear_to_db(db_to_linear(13.0_f64)) - 13.0).abs() < 1e-12);
        assert!((linear_to_db(db_to_linear(13.0_f32)) - 13.0).abs() < 1e-4);
        assert_eq!(db_to_linear(0.0_f64), 1.0);
    }
}
