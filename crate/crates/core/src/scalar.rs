//! Real scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point ground field: `f32` or `f64`.
///
/// Both `num_traits::Float` and `nalgebra::RealField` are required: the
/// quaternion arithmetic only needs the former, the complex-adjoint
/// eigen/LU/SVD back end needs the latter.  Methods defined by both traits
/// (`sqrt`, `abs`, `max`, ...) must be called through `Float::` to avoid
/// ambiguity.
pub trait Real:
    Float
    + FromPrimitive
    + RealField
    + Copy
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal (tolerances, quadrature weights).
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

#[inline]
pub(crate) fn fabs<T: Real>(x: T) -> T {
    Float::abs(x)
}

#[inline]
pub(crate) fn fsqrt<T: Real>(x: T) -> T {
    Float::sqrt(x)
}

#[inline]
pub(crate) fn fmax<T: Real>(a: T, b: T) -> T {
    Float::max(a, b)
}

