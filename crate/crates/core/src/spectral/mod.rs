//! Spectral types and the operations every other module builds on.

mod constants;
mod cube;
mod grid;
mod irradiance;
mod ops;
mod roi;
mod sensor;
mod spectrum;

pub use constants::{PhysicalConstants, PHYSICAL};
pub use cube::{HyperCube, Interleave};
pub use grid::WavelengthGrid;
pub use irradiance::IrradianceSeries;
pub use ops::{box_smooth, resample, rmse, spectral_angle};
pub(crate) use ops::angle_between;
pub use roi::{roi_mean_spectrum, PixelMask, Roi};
pub use sensor::SensorModel;
pub use spectrum::{Spectrum, Unit};
pub(crate) use spectrum::ensure_unit;
