//! Field conversion: dark correction, counts to radiance, radiance to
//! reflectance against time-matched downwelling irradiance, and ROI
//! signature packaging.

use std::collections::BTreeMap;

use crate::calibration::{irradiance_per_count, ReferenceParams, ResponsivityCurve};
use crate::error::{Error, Result};
use crate::quality::QualitySummary;
use crate::spectral::{
    box_smooth, ensure_unit, roi_mean_spectrum, HyperCube, IrradianceSeries, PixelMask, Roi, SensorModel, Spectrum,
    Unit,
};
use crate::Scalar;

/// Irradiance samples farther than this from the requested time are refused.
pub const DEFAULT_MATCH_WINDOW_S: f64 = 4.0;
pub const DEFAULT_SMOOTHING_WIDTH: usize = 5;
pub const DEFAULT_CLIP_MAX: f64 = 1.5;

/// Everything the field conversion needs besides the data itself.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig<T> {
    pub sensor: SensorModel<T>,
    /// Irradiance per digital count on the sensor grid.
    pub e_per_dc: Option<Spectrum<T>>,
    /// cos θ of the illumination incidence angle, in (0, 1].
    pub incidence_cos: T,
    pub exposure_ratio_inverted: bool,
    pub smoothing_width: usize,
    /// Evaluate reflectance as `L·E/π` instead of `πL/(E cos θ)`; diagnostic only.
    pub eq6_as_printed: bool,
    /// Upper clip applied to reflectance when set.
    pub clip_max: Option<T>,
}

impl<T: Scalar> CalibrationConfig<T> {
    pub fn new(sensor: SensorModel<T>) -> Self {
        Self {
            sensor,
            e_per_dc: None,
            incidence_cos: T::one(),
            exposure_ratio_inverted: false,
            smoothing_width: DEFAULT_SMOOTHING_WIDTH,
            eq6_as_printed: false,
            clip_max: None,
        }
    }

    pub fn with_e_per_dc(mut self, e_per_dc: Spectrum<T>) -> Result<Self> {
        e_per_dc.grid().ensure_same(self.sensor.grid())?;
        if let Some(i) = e_per_dc.values().iter().position(|&v| !(v > T::zero())) {
            return Err(Error::InvalidConfig(format!("irradiance per count must be positive (band {i})")));
        }
        self.e_per_dc = Some(e_per_dc.with_unit(Unit::Irradiance));
        Ok(self)
    }

    /// Computes the irradiance-per-count scale from a responsivity curve,
    /// honouring `exposure_ratio_inverted`.
    pub fn calibrate_from(self, curve: &ResponsivityCurve<T>, refs: &ReferenceParams<T>) -> Result<Self> {
        let e = irradiance_per_count(curve, refs, &self.sensor, self.exposure_ratio_inverted)?;
        self.with_e_per_dc(e)
    }

    pub fn with_incidence_cos(mut self, cos: T) -> Result<Self> {
        if !(cos > T::zero() && cos <= T::one()) {
            return Err(Error::InvalidConfig(format!("incidence_cos {cos} outside (0, 1]")));
        }
        self.incidence_cos = cos;
        Ok(self)
    }

    pub fn with_smoothing_width(mut self, width: usize) -> Result<Self> {
        if width == 0 || width.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("smoothing width {width} must be odd and positive")));
        }
        self.smoothing_width = width;
        Ok(self)
    }

    pub fn with_clip_max(mut self, clip_max: Option<T>) -> Result<Self> {
        if let Some(c) = clip_max {
            if !(c > T::zero()) || !c.is_finite() {
                return Err(Error::InvalidConfig(format!("clip_max {c} must be positive")));
            }
        }
        self.clip_max = clip_max;
        Ok(self)
    }

    pub fn e_per_dc(&self) -> Result<&Spectrum<T>> {
        self.e_per_dc.as_ref().ok_or(Error::MissingCalibration)
    }
}

/// Subtracts the dark spectrum from every pixel, clamping at zero.
pub fn dark_correct<T: Scalar>(cube: &HyperCube<T>, dark: &Spectrum<T>) -> Result<HyperCube<T>> {
    ensure_unit(Unit::DigitalCount, cube.unit())?;
    ensure_unit(Unit::DigitalCount, dark.unit())?;
    cube.grid().ensure_same(dark.grid())?;
    let d = dark.values();
    cube.map_samples(Unit::DigitalCount, |b, v| (v - d[b]).max(T::zero()))
}

/// `L = DC · (E/DC) / π` on a dark-corrected count cube.
pub fn dc_to_radiance<T: Scalar>(cube: &HyperCube<T>, cfg: &CalibrationConfig<T>) -> Result<HyperCube<T>> {
    ensure_unit(Unit::DigitalCount, cube.unit())?;
    let e = cfg.e_per_dc()?;
    cube.grid().ensure_same(e.grid())?;
    let e = e.values();
    let pi = T::PI();
    cube.map_samples(Unit::Radiance, |b, dc| dc * e[b] / pi)
}

fn checked_downwelling<T: Scalar>(downwelling: &Spectrum<T>) -> Result<&[T]> {
    ensure_unit(Unit::Irradiance, downwelling.unit())?;
    let grid = downwelling.grid().as_slice();
    match downwelling.values().iter().position(|&e| !(e > T::zero())) {
        Some(i) => Err(Error::ZeroIrradiance { wavelength_nm: grid[i].as_f64() }),
        None => Ok(downwelling.values()),
    }
}

#[inline]
fn to_reflectance<T: Scalar>(radiance: T, e: T, cfg: &CalibrationConfig<T>) -> T {
    let rho = if cfg.eq6_as_printed {
        radiance * e / T::PI()
    } else {
        T::PI() * radiance / (e * cfg.incidence_cos)
    };
    match cfg.clip_max {
        Some(c) => rho.min(c),
        None => rho,
    }
}

/// `ρ = π·L / (E_downwell · cos θ)` per band, for every pixel.
pub fn radiance_to_reflectance<T: Scalar>(
    cube: &HyperCube<T>,
    downwelling: &Spectrum<T>,
    cfg: &CalibrationConfig<T>,
) -> Result<HyperCube<T>> {
    ensure_unit(Unit::Radiance, cube.unit())?;
    cube.grid().ensure_same(downwelling.grid())?;
    let e = checked_downwelling(downwelling)?;
    cube.map_samples(Unit::Reflectance, |b, l| to_reflectance(l, e[b], cfg))
}

/// Single-spectrum form of [`radiance_to_reflectance`].
pub fn spectrum_to_reflectance<T: Scalar>(
    radiance: &Spectrum<T>,
    downwelling: &Spectrum<T>,
    cfg: &CalibrationConfig<T>,
) -> Result<Spectrum<T>> {
    ensure_unit(Unit::Radiance, radiance.unit())?;
    radiance.grid().ensure_same(downwelling.grid())?;
    let e = checked_downwelling(downwelling)?;
    let values = radiance.values().iter().zip(e).map(|(&l, &e)| to_reflectance(l, e, cfg)).collect();
    Spectrum::new(radiance.grid().clone(), values, Unit::Reflectance)
}

/// Raw counts → dark-corrected counts → radiance → reflectance.
pub fn dc_to_reflectance<T: Scalar>(
    raw: &HyperCube<T>,
    downwelling: &Spectrum<T>,
    cfg: &CalibrationConfig<T>,
) -> Result<HyperCube<T>> {
    let corrected = dark_correct(raw, cfg.sensor.dark_frame())?;
    let radiance = dc_to_radiance(&corrected, cfg)?;
    radiance_to_reflectance(&radiance, downwelling, cfg)
}

/// Downwelling irradiance at time `t`, linearly interpolated between the
/// bracketing log samples. Within `window_s` outside the log the nearest
/// endpoint is returned.
pub fn match_irradiance<T: Scalar>(series: &IrradianceSeries<T>, t: f64, window_s: f64) -> Result<Spectrum<T>> {
    let samples = series.samples();
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return Err(Error::InvalidConfig("irradiance log is empty".into()));
    };
    let out_of_window = || Error::OutOfWindow { t, first: first.0, last: last.0, window: window_s };
    if !t.is_finite() {
        return Err(out_of_window());
    }
    if t <= first.0 {
        return if first.0 - t <= window_s { Ok(first.1.clone()) } else { Err(out_of_window()) };
    }
    if t >= last.0 {
        return if t - last.0 <= window_s { Ok(last.1.clone()) } else { Err(out_of_window()) };
    }
    let i = samples.partition_point(|(ts, _)| *ts < t);
    let (t1, s1) = &samples[i];
    if *t1 == t {
        return Ok(s1.clone());
    }
    let (t0, s0) = &samples[i - 1];
    let w = T::lit((t - t0) / (t1 - t0));
    let values = s0.values().iter().zip(s1.values()).map(|(&a, &b)| a + (b - a) * w).collect();
    s0.with_values(values)
}

/// Mean ROI reflectance, box-smoothed and packaged with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureRecord<T> {
    pub reflectance: Spectrum<T>,
    pub roi: Roi,
    pub timestamp_s: f64,
    /// Free-form descriptive keys; `name` identifies the record.
    pub metadata: BTreeMap<String, String>,
    pub quality: Option<QualitySummary>,
}

impl<T: Scalar> SignatureRecord<T> {
    pub fn name(&self) -> Option<&str> {
        self.metadata.get("name").map(String::as_str)
    }
}

pub(crate) fn validate_metadata(metadata: &BTreeMap<String, String>) -> Result<()> {
    for (k, v) in metadata {
        let key_ok = !k.trim().is_empty() && k.trim() == k && !k.contains([':', '\n', '\r']);
        if !key_ok || v.contains(['\n', '\r']) {
            return Err(Error::InvalidConfig(format!("invalid metadata entry `{k}`")));
        }
    }
    Ok(())
}

pub fn extract_signature<T: Scalar>(
    cube: &HyperCube<T>,
    roi: &Roi,
    mask: Option<&PixelMask>,
    metadata: BTreeMap<String, String>,
    cfg: &CalibrationConfig<T>,
    timestamp_s: f64,
    quality: Option<QualitySummary>,
) -> Result<SignatureRecord<T>> {
    ensure_unit(Unit::Reflectance, cube.unit())?;
    validate_metadata(&metadata)?;
    let mean = roi_mean_spectrum(cube, roi, mask)?;
    let reflectance = box_smooth(&mean, cfg.smoothing_width)?;
    Ok(SignatureRecord { reflectance, roi: roi.clone(), timestamp_s, metadata, quality })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::WavelengthGrid;

    fn grid() -> WavelengthGrid<f64> {
        WavelengthGrid::new(vec![500.0, 600.0, 700.0]).unwrap()
    }

    fn sensor() -> SensorModel<f64> {
        let g = grid();
        let dark = Spectrum::constant(g.clone(), 100.0, Unit::DigitalCount).unwrap();
        SensorModel::new(g, vec![2.0; 3], 12, 0.005, 1e-3, 0.008, dark).unwrap()
    }

    fn cfg() -> CalibrationConfig<f64> {
        let e = Spectrum::constant(grid(), 0.01, Unit::Irradiance).unwrap();
        CalibrationConfig::new(sensor()).with_e_per_dc(e).unwrap()
    }

    #[test]
    fn dark_correction_clamps() {
        let g = grid();
        let dark = Spectrum::new(g.clone(), vec![100.0, 100.0, 0.0], Unit::DigitalCount).unwrap();
        let cube = HyperCube::new(1, 2, g, Unit::DigitalCount, vec![100.0, 100.0, 0.0, 90.0, 150.0, 7.0]).unwrap();
        let out = dark_correct(&cube, &dark).unwrap();
        assert_eq!(out.data(), &[0.0, 0.0, 0.0, 0.0, 50.0, 7.0]);
    }

    #[test]
    fn radiance_arithmetic() {
        let cube = HyperCube::filled(1, 1, grid(), Unit::DigitalCount, 900.0).unwrap();
        let l = dc_to_radiance(&cube, &cfg()).unwrap();
        for &v in l.data() {
            assert!((v - 2.864_788_975_654_116).abs() < 1e-12);
        }
        let bare = CalibrationConfig::new(sensor());
        assert!(matches!(dc_to_radiance(&cube, &bare), Err(Error::MissingCalibration)));
        assert!(matches!(dc_to_radiance(&l, &cfg()), Err(Error::UnitMismatch { .. })));
    }

    #[test]
    fn white_lambertian_is_unity() {
        let e = Spectrum::new(grid(), vec![1.1, 1.3, 0.9], Unit::Irradiance).unwrap();
        let l = e.map(|v| v / std::f64::consts::PI).unwrap().with_unit(Unit::Radiance);
        let rho = spectrum_to_reflectance(&l, &e, &cfg()).unwrap();
        for &v in rho.values() {
            assert!((v - 1.0).abs() < 1e-15);
        }
        let zero = e.map(|_| 0.0).unwrap();
        assert!(matches!(spectrum_to_reflectance(&l, &zero, &cfg()), Err(Error::ZeroIrradiance { .. })));
    }

    #[test]
    fn clip_and_printed_form() {
        let e = Spectrum::constant(grid(), 1.0, Unit::Irradiance).unwrap();
        let l = Spectrum::constant(grid(), 1.0, Unit::Radiance).unwrap();
        let clipped = cfg().with_clip_max(Some(1.5)).unwrap();
        assert!(spectrum_to_reflectance(&l, &e, &clipped).unwrap().values().iter().all(|&v| v == 1.5));
        let mut printed = cfg();
        printed.eq6_as_printed = true;
        let rho = spectrum_to_reflectance(&l, &e, &printed).unwrap();
        assert!((rho.values()[0] - 1.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn irradiance_matching() {
        let g = grid();
        let s = |v: f64| Spectrum::constant(g.clone(), v, Unit::Irradiance).unwrap();
        let series = IrradianceSeries::new(vec![(0.0, s(1.0)), (2.0, s(3.0)), (4.0, s(5.0))]).unwrap();
        assert_eq!(match_irradiance(&series, 2.0, 4.0).unwrap(), s(3.0));
        assert_eq!(match_irradiance(&series, 1.0, 4.0).unwrap(), s(2.0));
        assert_eq!(match_irradiance(&series, 7.0, 4.0).unwrap(), s(5.0));
        assert_eq!(match_irradiance(&series, -4.0, 4.0).unwrap(), s(1.0));
        assert!(matches!(match_irradiance(&series, 8.5, 4.0), Err(Error::OutOfWindow { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(cfg().with_incidence_cos(0.0).is_err());
        assert!(cfg().with_incidence_cos(1.2).is_err());
        assert!(cfg().with_smoothing_width(4).is_err());
        let bad = Spectrum::constant(WavelengthGrid::new(vec![1.0, 2.0]).unwrap(), 1.0, Unit::Irradiance).unwrap();
        assert!(CalibrationConfig::new(sensor()).with_e_per_dc(bad).is_err());
    }
}
