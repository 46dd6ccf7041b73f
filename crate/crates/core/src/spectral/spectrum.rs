use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::WavelengthGrid;
use crate::Scalar;

/// Physical quantity carried by a spectrum or cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    DigitalCount,
    /// W / (m² · sr · nm)
    Radiance,
    /// W / (m² · nm)
    Irradiance,
    /// Unitless.
    Reflectance,
    /// Relative spectral responsivity, max-normalized.
    Responsivity,
    /// W
    Flux,
}

impl Unit {
    pub const ALL: [Unit; 6] = [
        Unit::DigitalCount,
        Unit::Radiance,
        Unit::Irradiance,
        Unit::Reflectance,
        Unit::Responsivity,
        Unit::Flux,
    ];

    /// Tag used in file headers.
    pub fn tag(self) -> &'static str {
        match self {
            Unit::DigitalCount => "digital_count",
            Unit::Radiance => "radiance_w_m2_sr_nm",
            Unit::Irradiance => "irradiance_w_m2_nm",
            Unit::Reflectance => "reflectance",
            Unit::Responsivity => "responsivity_relative",
            Unit::Flux => "flux_w",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        Unit::ALL
            .into_iter()
            .find(|u| u.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown unit `{s}`"))
    }
}

pub(crate) fn ensure_unit(expected: Unit, found: Unit) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::UnitMismatch { expected: expected.to_string(), found: found.to_string() })
    }
}

/// Values on a wavelength grid, tagged with their unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    grid: WavelengthGrid<T>,
    values: Vec<T>,
    unit: Unit,
}

impl<T: Scalar> Spectrum<T> {
    pub fn new(grid: WavelengthGrid<T>, values: Vec<T>, unit: Unit) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidSpectrum(format!(
                "{} values for {} bands",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum(format!("non-finite value at band {i}")));
        }
        Ok(Self { grid, values, unit })
    }

    pub fn constant(grid: WavelengthGrid<T>, value: T, unit: Unit) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![value; n], unit)
    }

    /// Samples `f(λ)` at every band center.
    pub fn from_fn(grid: WavelengthGrid<T>, unit: Unit, f: impl Fn(T) -> T) -> Result<Self> {
        let values = grid.as_slice().iter().map(|&w| f(w)).collect();
        Self::new(grid, values, unit)
    }

    pub fn grid(&self) -> &WavelengthGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same grid and unit, new values.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.unit)
    }

    /// Same grid and values, relabelled unit.
    pub fn with_unit(mut self, unit: Unit) -> Self {
        self.unit = unit;
        self
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, k: T) -> Result<Self> {
        self.map(|v| v * k)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Arithmetic mean over bands.
    pub fn broadband_mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_usize_lossy(self.values.len())
    }

    /// Checks the reflectance range `[0, clip_max]`.
    pub fn check_reflectance_range(&self, clip_max: T) -> Result<()> {
        ensure_unit(Unit::Reflectance, self.unit)?;
        match self.values.iter().position(|&v| v < T::zero() || v > clip_max) {
            Some(i) => Err(Error::InvalidSpectrum(format!(
                "reflectance {} at band {i} outside [0, {clip_max}]",
                self.values[i]
            ))),
            None => Ok(()),
        }
    }

    pub(crate) fn ensure_grid(&self, other: &Self) -> Result<()> {
        self.grid.ensure_same(&other.grid)
    }
}
