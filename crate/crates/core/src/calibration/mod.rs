//! Laboratory calibration: responsivity from a monochromator sweep and the
//! irradiance-per-count scale.

mod gaussian;
mod responsivity;

pub use gaussian::{fit_gaussian_profile, GaussianFit, MAX_ITERATIONS, PEAK_TO_NOISE_MIN};
pub(crate) use gaussian::median;
pub use responsivity::{
    band_profile, build_responsivity, fit_band_profile, irradiance_per_count, responsivity_from_amplitudes,
    MonochromatorStep, ReferenceParams, ResponsivityCurve,
};
