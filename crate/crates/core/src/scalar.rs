//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar (`f32` or `f64`) the linear algebra is generic over.
///
/// Besides the arithmetic supplied by [`RealField`], each scalar carries the
/// tolerances used when validating states and channels. The `f64` values are
/// the ones every default in the crate is pinned to; `f32` gets looser ones
/// because it cannot resolve `1e-10`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Serialize + DeserializeOwned + Send + Sync
{
    /// Entrywise tolerance for Hermiticity, trace and positivity checks.
    fn validation_tolerance() -> Self;

    /// Default tolerance for checker verdicts.
    fn verdict_tolerance() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn validation_tolerance() -> Self {
        1e-10
    }

    fn verdict_tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn validation_tolerance() -> Self {
        1e-5
    }

    fn verdict_tolerance() -> Self {
        1e-4
    }
}
