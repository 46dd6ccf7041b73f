//! Run configuration: a TOML file of defaults, overridden by flags.

use std::path::{Path, PathBuf};

use hypercal::io::read_spectrum_file;
use hypercal::quality::QualityThresholds;
use hypercal::radcal::{CalibrationConfig, DEFAULT_MATCH_WINDOW_S, DEFAULT_SMOOTHING_WIDTH};
use hypercal::spectral::{SensorModel, Spectrum, Unit, WavelengthGrid};
use hypercal::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorSection {
    pub first_nm: f64,
    pub last_nm: f64,
    pub bands: usize,
    /// Defaults to the band spacing.
    pub bandwidth_nm: Option<f64>,
    pub bit_depth: u8,
    pub exposure_s: f64,
    pub gsd_m: f64,
    pub altitude_m: f64,
    /// Spectrum file of dark counts on the sensor grid; zero when unset.
    pub dark_frame: Option<PathBuf>,
}

impl Default for SensorSection {
    fn default() -> Self {
        Self {
            first_nm: 400.0,
            last_nm: 1000.0,
            bands: 272,
            bandwidth_nm: None,
            bit_depth: 12,
            exposure_s: 0.005,
            gsd_m: 0.008,
            altitude_m: 15.24,
            dark_frame: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    pub incidence_cos: f64,
    pub smoothing_width: usize,
    pub eq6_as_printed: bool,
    pub exposure_ratio_inverted: bool,
    pub clip_max: Option<f64>,
    pub match_window_s: f64,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            incidence_cos: 1.0,
            smoothing_width: DEFAULT_SMOOTHING_WIDTH,
            eq6_as_printed: false,
            exposure_ratio_inverted: false,
            clip_max: None,
            match_window_s: DEFAULT_MATCH_WINDOW_S,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualitySection {
    pub sat_frac: f64,
    pub glint_angle_max: f64,
    pub glint_bright_ratio: f64,
    pub shadow_ratio: f64,
    pub adj_angle_min: f64,
}

impl Default for QualitySection {
    fn default() -> Self {
        let d = QualityThresholds::default();
        Self {
            sat_frac: d.sat_frac,
            glint_angle_max: d.glint_angle_max,
            glint_bright_ratio: d.glint_bright_ratio,
            shadow_ratio: d.shadow_ratio,
            adj_angle_min: d.adj_angle_min,
        }
    }
}

impl QualitySection {
    pub fn thresholds(&self) -> QualityThresholds {
        QualityThresholds {
            sat_frac: self.sat_frac,
            glint_angle_max: self.glint_angle_max,
            glint_bright_ratio: self.glint_bright_ratio,
            shadow_ratio: self.shadow_ratio,
            adj_angle_min: self.adj_angle_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    /// Photo-electrons per count for shot noise.
    pub electrons_per_dc: f64,
    pub quantize: bool,
    /// Side length of the built-in paint scene.
    pub scene_size: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self { electrons_per_dc: 20.0, quantize: true, scene_size: 64 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub sensor: SensorSection,
    pub calibration: CalibrationSection,
    pub quality: QualitySection,
    pub simulate: SimulateSection,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        if let Some(dark) = &cfg.sensor.dark_frame {
            if dark.is_relative() {
                cfg.sensor.dark_frame = Some(path.parent().unwrap_or(Path::new(".")).join(dark));
            }
        }
        Ok(cfg)
    }

    pub fn sensor(&self) -> Result<SensorModel<f64>> {
        let s = &self.sensor;
        let grid = WavelengthGrid::linspace(s.first_nm, s.last_nm, s.bands)?;
        let bandwidth = s.bandwidth_nm.unwrap_or_else(|| grid.mean_spacing());
        if s.altitude_m.is_nan() || s.altitude_m <= 0.0 {
            return Err(Error::InvalidSensor("altitude_m must be positive".into()));
        }
        let dark = match &s.dark_frame {
            Some(path) => {
                let d = read_spectrum_file::<f64>(path)?.spectrum;
                if d.unit() != Unit::DigitalCount {
                    return Err(Error::UnitMismatch { expected: Unit::DigitalCount.to_string(), found: d.unit().to_string() });
                }
                d.grid().ensure_same(&grid)?;
                Spectrum::new(grid.clone(), d.into_values(), Unit::DigitalCount)?
            }
            None => Spectrum::constant(grid.clone(), 0.0, Unit::DigitalCount)?,
        };
        SensorModel::new(grid, vec![bandwidth; s.bands], s.bit_depth, s.exposure_s, s.gsd_m / s.altitude_m, s.gsd_m, dark)
    }

    pub fn calibration(&self) -> Result<CalibrationConfig<f64>> {
        let c = &self.calibration;
        let mut cfg = CalibrationConfig::new(self.sensor()?)
            .with_incidence_cos(c.incidence_cos)?
            .with_smoothing_width(c.smoothing_width)?
            .with_clip_max(c.clip_max)?;
        cfg.eq6_as_printed = c.eq6_as_printed;
        cfg.exposure_ratio_inverted = c.exposure_ratio_inverted;
        Ok(cfg)
    }
}
