//! Quaternionic matrices, S-spectra, slice power series and Schur analysis
//! for slice hyperholomorphic functions.
//!
//! Everything is generic over the real scalar (`f32` or `f64`); the aliases
//! below fix `f64`, with `*32` variants for `f32`.

pub mod blaschke;
pub mod error;
pub mod kernels;
pub mod qmat;
pub mod quat;
pub mod random;
pub mod realize;
pub mod scalar;
pub mod slicefun;
pub mod sspec;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Quat = quat::Quaternion<f64>;
pub type Unit = quat::UnitImaginary<f64>;
pub type Sphere = quat::Sphere<f64>;
pub type QMat = qmat::QMatrix<f64>;
pub type Series = slicefun::SliceSeries<f64>;
pub type Contour = sspec::ContourSpec<f64>;
pub type Realization = realize::Realization<f64>;
pub type Blaschke = blaschke::BlaschkeSpec<f64>;

pub type Quat32 = quat::Quaternion<f32>;
pub type QMat32 = qmat::QMatrix<f32>;
pub type Series32 = slicefun::SliceSeries<f32>;
pub type Realization32 = realize::Realization<f32>;
