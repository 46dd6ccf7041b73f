use rayon::prelude::*;

use crate::calibration::gaussian::{fit_gaussian_profile, GaussianFit};
use crate::error::{Error, Result};
use crate::spectral::{resample, HyperCube, SensorModel, Spectrum, Unit, WavelengthGrid};
use crate::Scalar;

/// One monochromator setting: the captured frame plus the reference
/// power-meter reading and acquisition parameters.
#[derive(Debug, Clone)]
pub struct MonochromatorStep<T> {
    pub lambda_nm: T,
    /// Raw digital counts, usually a single spatial line.
    pub frame: HyperCube<T>,
    pub flux_ref_w: T,
    pub exposure_ref_s: T,
    pub bandwidth_ref_nm: T,
}

impl<T: Scalar> MonochromatorStep<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidStep(format!("{name} must be positive at {} nm, got {v}", self.lambda_nm)))
            }
        };
        positive("lambda_nm", self.lambda_nm)?;
        positive("flux_ref_w", self.flux_ref_w)?;
        positive("exposure_ref_s", self.exposure_ref_s)?;
        positive("bandwidth_ref_nm", self.bandwidth_ref_nm)?;
        crate::spectral::ensure_unit(Unit::DigitalCount, self.frame.unit())
    }
}

/// Relative responsivity recovered from a sweep.
#[derive(Debug, Clone)]
pub struct ResponsivityCurve<T> {
    /// Fit for each step, in wavelength order.
    pub fits: Vec<(T, GaussianFit<T>)>,
    /// Max-normalized responsivity on the sensor grid.
    pub relative: Spectrum<T>,
}

/// Dark-corrected cross-band profile of a sweep frame.
///
/// Spatial pixels whose integrated signal reaches half the brightest pixel's
/// are treated as illuminated; their raw counts are averaged and the sensor
/// dark frame is subtracted.
pub fn band_profile<T: Scalar>(step: &MonochromatorStep<T>, sensor: &SensorModel<T>) -> Result<Vec<T>> {
    step.validate()?;
    let frame = &step.frame;
    frame.grid().ensure_same(sensor.grid())?;
    let dark = sensor.dark_frame().values();
    let bands = frame.bands();

    let signal: Vec<T> = (0..frame.rows())
        .flat_map(|r| (0..frame.cols()).map(move |c| (r, c)))
        .map(|(r, c)| frame.pixel(r, c).iter().zip(dark).map(|(&v, &d)| v - d).sum())
        .collect();
    let brightest = signal.iter().copied().fold(T::neg_infinity(), T::max);
    if !(brightest > T::zero()) {
        return Err(Error::NoPeak { peak: brightest.as_f64(), floor: 0.0 });
    }
    let threshold = brightest / T::lit(2.0);
    let max_dc = sensor.max_dc();

    let mut sum = vec![T::zero(); bands];
    let mut count = 0usize;
    for (idx, &s) in signal.iter().enumerate() {
        if s < threshold {
            continue;
        }
        let px = frame.pixel(idx / frame.cols(), idx % frame.cols());
        if let Some(band) = px.iter().position(|&v| v >= max_dc) {
            return Err(Error::SaturatedProfile { band });
        }
        for (a, &v) in sum.iter_mut().zip(px) {
            *a = *a + v;
        }
        count += 1;
    }
    let n = T::from_usize_lossy(count);
    Ok(sum.iter().zip(dark).map(|(&s, &d)| s / n - d).collect())
}

/// Fits the illuminated band profile of one sweep step.
pub fn fit_band_profile<T: Scalar>(step: &MonochromatorStep<T>, sensor: &SensorModel<T>) -> Result<GaussianFit<T>> {
    fit_gaussian_profile(&band_profile(step, sensor)?)
}

/// Responsivity `amplitude / flux` at each swept wavelength, resampled onto
/// `grid` and divided by its maximum.
pub fn responsivity_from_amplitudes<T: Scalar>(
    lambdas_nm: &[T],
    amplitudes_dc: &[T],
    fluxes_w: &[T],
    grid: &WavelengthGrid<T>,
) -> Result<Spectrum<T>> {
    if lambdas_nm.len() < 2 {
        return Err(Error::InsufficientSteps { needed: 2, got: lambdas_nm.len() });
    }
    if amplitudes_dc.len() != lambdas_nm.len() || fluxes_w.len() != lambdas_nm.len() {
        return Err(Error::InvalidStep("step arrays differ in length".into()));
    }
    if let Some(i) = fluxes_w.iter().position(|&f| !(f > T::zero())) {
        return Err(Error::InvalidStep(format!("flux at step {i} must be positive")));
    }
    let swept = WavelengthGrid::new(lambdas_nm.to_vec())
        .map_err(|_| Error::InvalidStep("step wavelengths must be strictly increasing".into()))?;
    let absolute: Vec<T> = amplitudes_dc.iter().zip(fluxes_w).map(|(&a, &f)| a / f).collect();
    let absolute = Spectrum::new(swept, absolute, Unit::Responsivity)?;
    let on_grid = resample(&absolute, grid)?;
    let peak = on_grid.max_value();
    if !(peak > T::zero()) {
        return Err(Error::ZeroResponsivity { wavelength_nm: grid.first().as_f64() });
    }
    let relative = on_grid.map(|v| v / peak)?;
    if let Some(i) = relative.values().iter().position(|&v| !(v > T::zero())) {
        return Err(Error::ZeroResponsivity { wavelength_nm: grid.as_slice()[i].as_f64() });
    }
    Ok(relative)
}

/// Fits every sweep step (in parallel) and builds the normalized curve on
/// the sensor grid.
pub fn build_responsivity<T: Scalar>(
    steps: &[MonochromatorStep<T>],
    sensor: &SensorModel<T>,
) -> Result<ResponsivityCurve<T>> {
    if steps.len() < 2 {
        return Err(Error::InsufficientSteps { needed: 2, got: steps.len() });
    }
    for w in steps.windows(2) {
        if w[1].lambda_nm <= w[0].lambda_nm {
            return Err(Error::InvalidStep(format!(
                "step wavelengths must be strictly increasing ({} then {})",
                w[0].lambda_nm, w[1].lambda_nm
            )));
        }
    }
    let fits: Vec<GaussianFit<T>> = steps
        .par_iter()
        .map(|s| fit_band_profile(s, sensor))
        .collect::<Result<_>>()?;
    let lambdas: Vec<T> = steps.iter().map(|s| s.lambda_nm).collect();
    let amps: Vec<T> = fits.iter().map(|f| f.amplitude_dc).collect();
    let fluxes: Vec<T> = steps.iter().map(|s| s.flux_ref_w).collect();
    let relative = responsivity_from_amplitudes(&lambdas, &amps, &fluxes, sensor.grid())?;
    Ok(ResponsivityCurve { fits: lambdas.into_iter().zip(fits).collect(), relative })
}

/// Laboratory reference parameters per sensor band: monochromator flux,
/// exposure and bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceParams<T> {
    pub flux_ref_w: Spectrum<T>,
    pub exposure_ref_s: Spectrum<T>,
    pub bandwidth_ref_nm: Spectrum<T>,
}

impl<T: Scalar> ReferenceParams<T> {
    /// Same reference values at every band.
    pub fn uniform(grid: &WavelengthGrid<T>, flux_ref_w: T, exposure_ref_s: T, bandwidth_ref_nm: T) -> Result<Self> {
        Ok(Self {
            flux_ref_w: Spectrum::constant(grid.clone(), flux_ref_w, Unit::Flux)?,
            exposure_ref_s: Spectrum::constant(grid.clone(), exposure_ref_s, Unit::Flux)?,
            bandwidth_ref_nm: Spectrum::constant(grid.clone(), bandwidth_ref_nm, Unit::Flux)?,
        })
    }

    /// Interpolates the per-step readings onto `grid`.
    pub fn from_steps(steps: &[MonochromatorStep<T>], grid: &WavelengthGrid<T>) -> Result<Self> {
        if steps.len() < 2 {
            return Err(Error::InsufficientSteps { needed: 2, got: steps.len() });
        }
        let swept = WavelengthGrid::new(steps.iter().map(|s| s.lambda_nm).collect())
            .map_err(|_| Error::InvalidStep("step wavelengths must be strictly increasing".into()))?;
        let column = |f: fn(&MonochromatorStep<T>) -> T| {
            let s = Spectrum::new(swept.clone(), steps.iter().map(f).collect(), Unit::Flux)?;
            resample(&s, grid)
        };
        Ok(Self {
            flux_ref_w: column(|s| s.flux_ref_w)?,
            exposure_ref_s: column(|s| s.exposure_ref_s)?,
            bandwidth_ref_nm: column(|s| s.bandwidth_ref_nm)?,
        })
    }
}

/// Irradiance per digital count at each band:
///
/// `E/DC = (φ_ref · t_obs/t_ref) · (x_obs² · θ_IFOV² · (B_ref/B_obs) · R_norm)⁻¹`
///
/// With `exposure_ratio_inverted` the exposure factor becomes `t_ref/t_obs`.
pub fn irradiance_per_count<T: Scalar>(
    curve: &ResponsivityCurve<T>,
    refs: &ReferenceParams<T>,
    sensor: &SensorModel<T>,
    exposure_ratio_inverted: bool,
) -> Result<Spectrum<T>> {
    let grid = sensor.grid();
    curve.relative.grid().ensure_same(grid)?;
    refs.flux_ref_w.grid().ensure_same(grid)?;
    refs.exposure_ref_s.grid().ensure_same(grid)?;
    refs.bandwidth_ref_nm.grid().ensure_same(grid)?;

    let t_obs = sensor.exposure_s();
    let x = sensor.gsd_m();
    let ifov = sensor.ifov_rad();
    let mut out = Vec::with_capacity(grid.len());
    for b in 0..grid.len() {
        let r = curve.relative.values()[b];
        if !(r > T::zero()) {
            return Err(Error::ZeroResponsivity { wavelength_nm: grid.as_slice()[b].as_f64() });
        }
        let phi = refs.flux_ref_w.values()[b];
        let t_ref = refs.exposure_ref_s.values()[b];
        let b_ref = refs.bandwidth_ref_nm.values()[b];
        let b_obs = sensor.bandwidths_nm()[b];
        if !(phi > T::zero() && t_ref > T::zero() && b_ref > T::zero()) {
            return Err(Error::InvalidStep(format!("non-positive reference parameter at band {b}")));
        }
        let exposure_ratio = if exposure_ratio_inverted { t_ref / t_obs } else { t_obs / t_ref };
        let numerator = phi * exposure_ratio;
        let denominator = x * x * ifov * ifov * (b_ref / b_obs) * r;
        out.push(numerator / denominator);
    }
    Spectrum::new(grid.clone(), out, Unit::Irradiance)
}
