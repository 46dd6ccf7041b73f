//! Pixel screening for signature extraction: saturation, glint, shadow and
//! adjacency (secondary-reflection) contamination.
//!
//! Detectors compare each pixel against the per-band median of its ROI, so
//! the few outliers being hunted do not move the reference. All thresholds
//! are heuristics exposed through [`QualityThresholds`].

use rayon::prelude::*;

use crate::calibration::median;
use crate::error::{Error, Result};
use crate::radcal::{dark_correct, dc_to_radiance, CalibrationConfig};
use crate::spectral::{angle_between, ensure_unit, HyperCube, PixelMask, Roi, SensorModel, Spectrum, Unit};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityThresholds {
    /// Saturated when any band reaches this fraction of full scale.
    pub sat_frac: f64,
    /// Glint needs a spectral angle to the downwelling spectrum below this (rad).
    pub glint_angle_max: f64,
    /// ... and a broadband mean at least this multiple of the ROI median's.
    pub glint_bright_ratio: f64,
    /// Shadow when the broadband mean is at most this multiple of the median's.
    pub shadow_ratio: f64,
    /// Adjacency when the angle to the ROI median exceeds this (rad).
    pub adj_angle_min: f64,
}

impl Default for QualityThresholds {
    fn default() -> Self {
        Self { sat_frac: 0.98, glint_angle_max: 0.10, glint_bright_ratio: 3.0, shadow_ratio: 0.3, adj_angle_min: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PixelFlags {
    pub saturated: bool,
    /// Always set when `saturated` is.
    pub glint: bool,
    pub shadow: bool,
    pub adjacency: bool,
}

impl PixelFlags {
    pub fn any(&self) -> bool {
        self.saturated || self.glint || self.shadow || self.adjacency
    }
}

/// Flag counts carried alongside an extracted signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QualitySummary {
    pub total: usize,
    pub kept: usize,
    pub saturated: usize,
    pub glint: usize,
    pub shadow: usize,
    pub adjacency: usize,
}

impl QualitySummary {
    pub fn kept_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.kept as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoiReport<T> {
    /// Flags for each ROI pixel in row-major order.
    pub pixels: Vec<((usize, usize), PixelFlags)>,
    pub kept_fraction: f64,
    /// Per-band median radiance over the ROI.
    pub median_spectrum: Spectrum<T>,
    pub notes: Vec<String>,
}

impl<T: Scalar> RoiReport<T> {
    pub fn summary(&self) -> QualitySummary {
        let count = |f: fn(&PixelFlags) -> bool| self.pixels.iter().filter(|(_, p)| f(p)).count();
        QualitySummary {
            total: self.pixels.len(),
            kept: count(|p| !p.any()),
            saturated: count(|p| p.saturated),
            glint: count(|p| p.glint),
            shadow: count(|p| p.shadow),
            adjacency: count(|p| p.adjacency),
        }
    }

    /// Keep-mask over the whole cube: true only for unflagged ROI pixels.
    pub fn mask(&self, rows: usize, cols: usize) -> PixelMask {
        let mut m = PixelMask::new(rows, cols, vec![false; rows * cols]).expect("extent matches");
        for &((r, c), flags) in &self.pixels {
            if r < rows && c < cols {
                m.set(r, c, !flags.any());
            }
        }
        m
    }
}

/// Per-pixel saturation over the whole cube, row-major.
pub fn detect_saturation<T: Scalar>(
    cube: &HyperCube<T>,
    sensor: &SensorModel<T>,
    thresholds: &QualityThresholds,
) -> Result<Vec<bool>> {
    ensure_unit(Unit::DigitalCount, cube.unit())?;
    let limit = T::lit(thresholds.sat_frac) * sensor.max_dc();
    Ok((0..cube.rows() * cube.cols())
        .into_par_iter()
        .map(|i| cube.pixel(i / cube.cols(), i % cube.cols()).iter().any(|&v| v >= limit))
        .collect())
}

fn broadband_ratio<T: Scalar>(pixel: &[T], reference: &[T]) -> Result<T> {
    let p: T = pixel.iter().copied().sum();
    let m: T = reference.iter().copied().sum();
    if !(m > T::zero()) {
        return Err(Error::ZeroVector);
    }
    Ok(p / m)
}

/// Relative slack that keeps ratio boundaries inclusive under summation rounding.
fn boundary_slack<T: Scalar>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

fn glint_test<T: Scalar>(pixel: &[T], downwelling: &[T], median: &[T], th: &QualityThresholds) -> Result<bool> {
    let ratio = broadband_ratio(pixel, median)?;
    if !(ratio >= T::lit(th.glint_bright_ratio) * (T::one() - boundary_slack())) {
        return Ok(false);
    }
    Ok(angle_between(pixel, downwelling)? < T::lit(th.glint_angle_max))
}

fn shadow_test<T: Scalar>(pixel: &[T], median: &[T], th: &QualityThresholds) -> Result<bool> {
    Ok(broadband_ratio(pixel, median)? <= T::lit(th.shadow_ratio) * (T::one() + boundary_slack()))
}

/// Source-shaped and much brighter than the ROI: a specular reflection.
pub fn detect_glint<T: Scalar>(
    pixel: &Spectrum<T>,
    downwelling: &Spectrum<T>,
    roi_median: &Spectrum<T>,
    thresholds: &QualityThresholds,
) -> Result<bool> {
    pixel.grid().ensure_same(downwelling.grid())?;
    pixel.grid().ensure_same(roi_median.grid())?;
    glint_test(pixel.values(), downwelling.values(), roi_median.values(), thresholds)
}

/// Broadband level at or below `shadow_ratio` of the ROI median.
pub fn detect_shadow<T: Scalar>(pixel: &Spectrum<T>, roi_median: &Spectrum<T>, thresholds: &QualityThresholds) -> Result<bool> {
    pixel.grid().ensure_same(roi_median.grid())?;
    shadow_test(pixel.values(), roi_median.values(), thresholds)
}

/// Shape departs from the ROI median at normal brightness (neither glint nor
/// shadow), the signature of light reflected from a neighbouring object.
pub fn detect_adjacency<T: Scalar>(
    pixel: &Spectrum<T>,
    roi_median: &Spectrum<T>,
    downwelling: &Spectrum<T>,
    thresholds: &QualityThresholds,
) -> Result<bool> {
    pixel.grid().ensure_same(roi_median.grid())?;
    pixel.grid().ensure_same(downwelling.grid())?;
    adjacency_test(pixel.values(), roi_median.values(), downwelling.values(), thresholds)
}

fn adjacency_test<T: Scalar>(pixel: &[T], median: &[T], downwelling: &[T], th: &QualityThresholds) -> Result<bool> {
    if glint_test(pixel, downwelling, median, th)? || shadow_test(pixel, median, th)? {
        return Ok(false);
    }
    Ok(angle_between(pixel, median)? > T::lit(th.adj_angle_min))
}

/// Runs every detector over the pixels of `roi`.
///
/// `cube` may hold raw counts, in which case saturation is assessed on the
/// raw values and the spectral detectors run on calibrated radiance, or
/// radiance directly, in which case saturation cannot be assessed.
pub fn score_roi<T: Scalar>(
    cube: &HyperCube<T>,
    roi: &Roi,
    downwelling: &Spectrum<T>,
    cfg: &CalibrationConfig<T>,
    thresholds: &QualityThresholds,
) -> Result<RoiReport<T>> {
    cube.grid().ensure_same(downwelling.grid())?;
    let pixels = roi.pixels(cube.rows(), cube.cols())?;
    if pixels.is_empty() {
        return Err(Error::EmptyRoi);
    }
    let mut notes = Vec::new();
    let (radiance, saturated) = match cube.unit() {
        Unit::DigitalCount => {
            let sat = detect_saturation(cube, &cfg.sensor, thresholds)?;
            let corrected = dark_correct(cube, cfg.sensor.dark_frame())?;
            (dc_to_radiance(&corrected, cfg)?, Some(sat))
        }
        Unit::Radiance => {
            notes.push("radiance input: saturation not assessed".to_string());
            (cube.clone(), None)
        }
        other => {
            return Err(Error::UnitMismatch { expected: Unit::DigitalCount.to_string(), found: other.to_string() })
        }
    };

    let bands = cube.bands();
    let median_values: Vec<T> = (0..bands)
        .map(|b| {
            let column: Vec<T> = pixels.iter().map(|&(r, c)| radiance.get(r, c, b)).collect();
            median(&column)
        })
        .collect();
    let median_spectrum = Spectrum::new(cube.grid().clone(), median_values, Unit::Radiance)?;
    let med = median_spectrum.values();
    let down = downwelling.values();
    // Glint brightness is judged against the ROI median, or against a perfect
    // diffuse white when the median itself is brighter than any diffuse surface.
    let white: Vec<T> = down.iter().map(|&e| e * cfg.incidence_cos / T::PI()).collect();
    let glint_ref = if med.iter().copied().sum::<T>() > white.iter().copied().sum::<T>() { &white[..] } else { med };

    let flags: Vec<PixelFlags> = pixels
        .par_iter()
        .map(|&(r, c)| {
            let px = radiance.pixel(r, c);
            let sat = saturated.as_ref().is_some_and(|s| s[r * cube.cols() + c]);
            if px.iter().all(|&v| v == T::zero()) {
                return Ok(PixelFlags { saturated: sat, glint: sat, shadow: true, adjacency: false });
            }
            let glint = sat || glint_test(px, down, glint_ref, thresholds)?;
            let shadow = shadow_test(px, med, thresholds)?;
            let adjacency = !glint && !shadow && angle_between(px, med)? > T::lit(thresholds.adj_angle_min);
            Ok(PixelFlags { saturated: sat, glint, shadow, adjacency })
        })
        .collect::<Result<_>>()?;

    let kept = flags.iter().filter(|f| !f.any()).count();
    let kept_fraction = kept as f64 / pixels.len() as f64;
    if kept == 0 {
        notes.push("no pixels survived screening".to_string());
    }
    let glints = flags.iter().filter(|f| f.glint).count();
    if glints * 2 > pixels.len() {
        notes.push(format!("{glints} of {} pixels flagged as glint", pixels.len()));
    }
    Ok(RoiReport { pixels: pixels.into_iter().zip(flags).collect(), kept_fraction, median_spectrum, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::WavelengthGrid;

    fn grid() -> WavelengthGrid<f64> {
        WavelengthGrid::linspace(400.0, 1000.0, 31).unwrap()
    }

    fn sun() -> Spectrum<f64> {
        Spectrum::from_fn(grid(), Unit::Irradiance, |w| 1.0 + 0.5 * ((w - 400.0) / 200.0).sin()).unwrap()
    }

    fn paint() -> Spectrum<f64> {
        Spectrum::from_fn(grid(), Unit::Radiance, |w| 0.05 + 0.2 * (-((w - 650.0) / 60.0).powi(2)).exp()).unwrap()
    }

    #[test]
    fn glint_rule_is_a_conjunction() {
        let th = QualityThresholds::default();
        let median = paint();
        let k = 10.0 * median.broadband_mean() / sun().broadband_mean();
        let bright_sun = sun().scaled(k).unwrap().with_unit(Unit::Radiance);
        assert!(detect_glint(&bright_sun, &sun(), &median, &th).unwrap());
        assert!(!detect_glint(&median, &sun(), &median, &th).unwrap());
        let dim_sun = sun().scaled(k / 10.0).unwrap().with_unit(Unit::Radiance);
        assert!(!detect_glint(&dim_sun, &sun(), &median, &th).unwrap());
    }

    #[test]
    fn shadow_boundary_is_inclusive() {
        let th = QualityThresholds::default();
        let median = Spectrum::constant(grid(), 1.0, Unit::Radiance).unwrap();
        let at = |k: f64| Spectrum::constant(grid(), k, Unit::Radiance).unwrap();
        assert!(detect_shadow(&at(0.1), &median, &th).unwrap());
        assert!(detect_shadow(&at(0.3), &median, &th).unwrap());
        assert!(!detect_shadow(&at(1.0), &median, &th).unwrap());
    }

    #[test]
    fn adjacency_is_scale_invariant() {
        let th = QualityThresholds::default();
        let median = paint();
        for k in [0.5, 1.0, 2.0] {
            assert!(!detect_adjacency(&median.scaled(k).unwrap(), &median, &sun(), &th).unwrap());
        }
    }

    #[test]
    fn saturation_threshold() {
        let g = grid();
        let sensor = SensorModel::new(
            g.clone(),
            vec![20.0; 31],
            12,
            0.005,
            1e-3,
            0.008,
            Spectrum::constant(g.clone(), 0.0, Unit::DigitalCount).unwrap(),
        )
        .unwrap();
        let mut data = vec![0.0; 3 * 31];
        data[31 + 4] = 4095.0;
        for v in &mut data[62..] {
            *v = (0.97f64 * 4095.0).floor();
        }
        let cube = HyperCube::new(1, 3, g, Unit::DigitalCount, data).unwrap();
        let sat = detect_saturation(&cube, &sensor, &QualityThresholds::default()).unwrap();
        assert_eq!(sat, vec![false, true, false]);
    }
}
