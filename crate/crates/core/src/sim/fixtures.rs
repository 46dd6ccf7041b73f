//! Synthetic inputs: illumination scenarios, a paint palette, a smooth
//! quantum-efficiency curve and monochromator sweeps generated from it.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::calibration::MonochromatorStep;
use crate::error::Result;
use crate::sim::{poisson::pixel_rng, IlluminationScenario, Material};
use crate::spectral::{HyperCube, SensorModel, Spectrum, Unit, WavelengthGrid};
use crate::Scalar;

/// Wavelength of the oxygen absorption notch carried by [`sunset`].
pub const OXYGEN_NOTCH_NM: f64 = 760.0;
pub const CLOUDY_FACTOR: f64 = 0.4;
const NOON_LEVEL: f64 = 1.2;

/// Flat noon downwelling, W/m²/nm.
pub fn noon<T: Scalar>(grid: &WavelengthGrid<T>) -> Result<IlluminationScenario<T>> {
    IlluminationScenario::new("noon", Spectrum::constant(grid.clone(), T::lit(NOON_LEVEL), Unit::Irradiance)?)
}

/// Noon scaled by [`CLOUDY_FACTOR`].
pub fn cloudy<T: Scalar>(grid: &WavelengthGrid<T>) -> Result<IlluminationScenario<T>> {
    let noon = noon(grid)?;
    IlluminationScenario::new("cloudy", noon.downwelling.scaled(T::lit(CLOUDY_FACTOR))?)
}

/// Reddened low-sun spectrum with a narrow absorption notch near 760 nm.
pub fn sunset<T: Scalar>(grid: &WavelengthGrid<T>) -> Result<IlluminationScenario<T>> {
    let e = Spectrum::from_fn(grid.clone(), Unit::Irradiance, |w| {
        let w = w.as_f64();
        let red = 0.35 + 0.5 * (w - 400.0) / 600.0;
        let notch = 1.0 - 0.6 * (-0.5 * ((w - OXYGEN_NOTCH_NM) / 4.0).powi(2)).exp();
        T::lit(NOON_LEVEL * red * notch)
    })?;
    IlluminationScenario::new("sunset", e)
}

/// Noon, cloudy and sunset.
pub fn standard_scenarios<T: Scalar>(grid: &WavelengthGrid<T>) -> Result<Vec<IlluminationScenario<T>>> {
    Ok(vec![noon(grid)?, cloudy(grid)?, sunset(grid)?])
}

/// Solar-shaped downwelling: a 5778 K blackbody scaled to `peak` W/m²/nm.
pub fn solar_like<T: Scalar>(grid: &WavelengthGrid<T>, peak: f64) -> Result<Spectrum<T>> {
    let planck = |nm: f64| {
        let l = nm * 1e-9;
        1.0 / (l.powi(5) * ((1.438_776_877e-2 / (l * 5778.0)).exp() - 1.0))
    };
    let max = grid.as_slice().iter().map(|w| planck(w.as_f64())).fold(0.0, f64::max);
    Spectrum::from_fn(grid.clone(), Unit::Irradiance, |w| T::lit(peak * planck(w.as_f64()) / max))
}

fn logistic(w: f64, center: f64, width: f64) -> f64 {
    1.0 / (1.0 + (-(w - center) / width).exp())
}

fn bump(w: f64, center: f64, width: f64) -> f64 {
    (-((w - center) / width).powi(2)).exp()
}

/// Fourteen smooth vehicle-paint reflectances spanning the common colours.
pub fn paint_library<T: Scalar>(grid: &WavelengthGrid<T>) -> Result<Vec<Material<T>>> {
    type Curve = fn(f64) -> f64;
    let curves: [(&str, Curve); 14] = [
        ("white", |w| 0.80 + 0.05 * (w - 400.0) / 600.0),
        ("black", |_| 0.04),
        ("silver", |w| 0.45 + 0.05 * (w - 400.0) / 600.0),
        ("gray", |_| 0.25),
        ("red", |w| 0.05 + 0.60 * logistic(w, 600.0, 15.0)),
        ("blue", |w| 0.05 + 0.35 * bump(w, 460.0, 40.0) + 0.20 * logistic(w, 720.0, 30.0)),
        ("green", |w| 0.05 + 0.30 * bump(w, 540.0, 35.0) + 0.30 * logistic(w, 700.0, 25.0)),
        ("yellow", |w| 0.06 + 0.70 * logistic(w, 520.0, 15.0)),
        ("orange", |w| 0.05 + 0.70 * logistic(w, 580.0, 15.0)),
        ("maroon", |w| 0.04 + 0.35 * logistic(w, 640.0, 20.0)),
        ("navy", |w| 0.03 + 0.15 * bump(w, 450.0, 35.0) + 0.10 * logistic(w, 740.0, 30.0)),
        ("beige", |w| 0.35 + 0.30 * logistic(w, 500.0, 60.0)),
        ("teal", |w| 0.05 + 0.25 * bump(w, 500.0, 50.0) + 0.25 * logistic(w, 720.0, 30.0)),
        ("champagne", |w| 0.50 + 0.20 * logistic(w, 480.0, 50.0)),
    ];
    curves
        .iter()
        .map(|(name, f)| {
            let rho = Spectrum::from_fn(grid.clone(), Unit::Reflectance, |w| T::lit(f(w.as_f64())))?;
            Material::new(*name, rho)
        })
        .collect()
}

/// Smooth silicon-like quantum efficiency, 0.2–0.9 over the VNIR.
pub fn smooth_qe(nm: f64) -> f64 {
    0.2 + 0.7 * (-((nm - 600.0) / 230.0).powi(2)).exp()
}

/// Monochromator lamp output reaching the power meter, W.
pub fn lamp_flux(nm: f64) -> f64 {
    1e-6 * (0.5 + 0.5 * (-((nm - 750.0) / 300.0).powi(2)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub first_nm: f64,
    pub step_nm: f64,
    pub steps: usize,
    /// Width of the illuminated band profile, in bands.
    pub sigma_bands: f64,
    /// Profile amplitude at the most responsive step, DC above dark.
    pub peak_dc: f64,
    pub spatial_pixels: usize,
    /// Illuminated pixels, centred in the line.
    pub lit_pixels: usize,
    /// Standard deviation of additive Gaussian read noise, DC. Counts are
    /// clipped at zero, so noisy sweeps need a sensor dark pedestal well above
    /// this or the clipped noise biases every fitted amplitude low.
    pub noise_sigma_dc: f64,
    pub seed: u64,
    pub quantize: bool,
    pub exposure_ref_s: f64,
    pub bandwidth_ref_nm: f64,
}

impl Default for SweepOptions {
    /// 61 steps every 10 nm from 400 to 1000 nm.
    fn default() -> Self {
        Self {
            first_nm: 400.0,
            step_nm: 10.0,
            steps: 61,
            sigma_bands: 1.5,
            peak_dc: 3000.0,
            spatial_pixels: 40,
            lit_pixels: 32,
            noise_sigma_dc: 0.0,
            seed: 0,
            quantize: false,
            exposure_ref_s: 0.010,
            bandwidth_ref_nm: 2.0,
        }
    }
}

/// Fractional band index of `nm` on `grid` by linear interpolation.
pub fn fractional_band<T: Scalar>(grid: &WavelengthGrid<T>, nm: f64) -> f64 {
    let w = grid.as_slice();
    let i = w.partition_point(|&x| x.as_f64() < nm);
    if i == 0 {
        return 0.0;
    }
    if i >= w.len() {
        return (w.len() - 1) as f64;
    }
    let (x0, x1) = (w[i - 1].as_f64(), w[i].as_f64());
    (i - 1) as f64 + (nm - x0) / (x1 - x0)
}

/// Sweep frames whose profile amplitudes follow `qe(λ) · lamp_flux(λ)`, so
/// the responsivity they encode is proportional to `qe`.
pub fn synthetic_sweep<T: Scalar>(
    sensor: &SensorModel<T>,
    qe: impl Fn(f64) -> f64,
    opts: &SweepOptions,
) -> Result<Vec<MonochromatorStep<T>>> {
    let grid = sensor.grid();
    let dark = sensor.dark_frame().values();
    let lambdas: Vec<f64> = (0..opts.steps).map(|k| opts.first_nm + opts.step_nm * k as f64).collect();
    let peak = lambdas.iter().map(|&l| qe(l) * lamp_flux(l)).fold(0.0, f64::max);
    let center_px = (opts.spatial_pixels as f64 - 1.0) / 2.0;
    let half_lit = opts.lit_pixels as f64 / 2.0;

    lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let amplitude = opts.peak_dc * qe(lambda) * lamp_flux(lambda) / peak;
            let mu = fractional_band(grid, lambda);
            let mut rng = pixel_rng(opts.seed, k as u64);
            let frame = HyperCube::from_pixels(1, opts.spatial_pixels, grid.clone(), Unit::DigitalCount, |_, c| {
                let offset = (c as f64 - center_px) / half_lit;
                let weight = if offset.abs() <= 1.0 { 1.0 - 0.1 * offset * offset } else { 0.0 };
                (0..grid.len())
                    .map(|b| {
                        let z = (b as f64 - mu) / opts.sigma_bands;
                        let mut v = dark[b].as_f64() + amplitude * weight * (-0.5 * z * z).exp();
                        if opts.noise_sigma_dc > 0.0 {
                            let n: f64 = rng.sample(StandardNormal);
                            v += opts.noise_sigma_dc * n;
                        }
                        if opts.quantize {
                            v = v.round();
                        }
                        T::lit(v.max(0.0))
                    })
                    .collect()
            })?;
            Ok(MonochromatorStep {
                lambda_nm: T::lit(lambda),
                frame,
                flux_ref_w: T::lit(lamp_flux(lambda)),
                exposure_ref_s: T::lit(opts.exposure_ref_s),
                bandwidth_ref_nm: T::lit(opts.bandwidth_ref_nm),
            })
        })
        .collect()
}
