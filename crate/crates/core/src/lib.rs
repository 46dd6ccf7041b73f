//! Radiometric calibration of pushbroom hyperspectral imagery without
//! in-scene reference panels.
//!
//! The chain runs from raw digital counts to radiance and reflectance:
//!
//! * [`calibration`] turns a monochromator sweep into a relative spectral
//!   responsivity curve and an irradiance-per-count scale.
//! * [`radcal`] dark-corrects field cubes, converts them to radiance and then
//!   to reflectance against time-matched downwelling irradiance, and packages
//!   region-of-interest signatures.
//! * [`quality`] screens ROI pixels for saturation, glint, shadow and
//!   adjacency contamination.
//! * [`sim`] renders Lambertian radiance and count cubes from known
//!   reflectances, which doubles as the round-trip oracle for [`radcal`].
//! * [`io`] reads and writes ENVI cubes and the plain-text spectral formats.
//!
//! All numeric types are generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below name the common instantiations.

// `!(x > 0)` style guards deliberately reject NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod calibration;
mod error;
pub mod io;
pub mod quality;
pub mod radcal;
mod scalar;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type WavelengthGrid64 = spectral::WavelengthGrid<f64>;
pub type Spectrum64 = spectral::Spectrum<f64>;
pub type HyperCube64 = spectral::HyperCube<f64>;
pub type SensorModel64 = spectral::SensorModel<f64>;
pub type IrradianceSeries64 = spectral::IrradianceSeries<f64>;
pub type CalibrationConfig64 = radcal::CalibrationConfig<f64>;


pub type WavelengthGrid32 = spectral::WavelengthGrid<f32>;
pub type Spectrum32 = spectral::Spectrum<f32>;
pub type HyperCube32 = spectral::HyperCube<f32>;
pub type SensorModel32 = spectral::SensorModel<f32>;
pub type IrradianceSeries32 = spectral::IrradianceSeries<f32>;
pub type CalibrationConfig32 = radcal::CalibrationConfig<f32>;

