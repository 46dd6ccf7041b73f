use crate::error::{Error, Result};
use crate::spectral::{Spectrum, Unit, WavelengthGrid};
use crate::Scalar;

/// Imaging-spectrometer parameters used by the calibration chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel<T> {
    grid: WavelengthGrid<T>,
    bandwidths_nm: Vec<T>,
    bit_depth: u8,
    exposure_s: T,
    ifov_rad: T,
    gsd_m: T,
    dark_frame: Spectrum<T>,
    responsivity: Option<Spectrum<T>>,
}

impl<T: Scalar> SensorModel<T> {
    pub fn new(
        grid: WavelengthGrid<T>,
        bandwidths_nm: Vec<T>,
        bit_depth: u8,
        exposure_s: T,
        ifov_rad: T,
        gsd_m: T,
        dark_frame: Spectrum<T>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidSensor(m));
        if bandwidths_nm.len() != grid.len() {
            return bad(format!("{} bandwidths for {} bands", bandwidths_nm.len(), grid.len()));
        }
        if bandwidths_nm.iter().any(|&b| !(b > T::zero()) || !b.is_finite()) {
            return bad("bandwidths must be finite and positive".into());
        }
        if !(8..=16).contains(&bit_depth) {
            return bad(format!("bit depth {bit_depth} outside [8, 16]"));
        }
        for (name, v) in [("exposure_s", exposure_s), ("ifov_rad", ifov_rad), ("gsd_m", gsd_m)] {
            if !(v > T::zero()) || !v.is_finite() {
                return bad(format!("{name} must be finite and positive, got {v}"));
            }
        }
        if dark_frame.unit() != Unit::DigitalCount {
            return bad("dark frame must be in digital counts".into());
        }
        dark_frame.grid().ensure_same(&grid)?;
        if dark_frame.values().iter().any(|&v| v < T::zero()) {
            return bad("dark frame has negative counts".into());
        }
        Ok(Self { grid, bandwidths_nm, bit_depth, exposure_s, ifov_rad, gsd_m, dark_frame, responsivity: None })
    }

    /// Pushbroom VNIR imager flown at 50 ft: 272 bands over 400–1000 nm,
    /// 12-bit, 5 ms exposure, 0.8 cm ground sample distance.
    ///
    /// Bandwidth is taken as the band spacing and IFOV as GSD / altitude.
    pub fn nano_hyperspec() -> Self {
        let grid = WavelengthGrid::linspace(T::lit(400.0), T::lit(1000.0), 272).expect("static grid");
        let spacing = grid.mean_spacing();
        let gsd = T::lit(0.008);
        let altitude_m = T::lit(50.0 * 0.3048);
        let dark = Spectrum::constant(grid.clone(), T::zero(), Unit::DigitalCount).expect("static dark");
        Self::new(grid, vec![spacing; 272], 12, T::lit(0.005), gsd / altitude_m, gsd, dark)
            .expect("static sensor parameters are valid")
    }

    /// Attaches a max-normalized responsivity curve on the sensor grid.
    pub fn with_responsivity(mut self, responsivity: Spectrum<T>) -> Result<Self> {
        if responsivity.unit() != Unit::Responsivity {
            return Err(Error::InvalidSensor("responsivity has wrong unit".into()));
        }
        responsivity.grid().ensure_same(&self.grid)?;
        if responsivity.values().iter().any(|&v| !(v > T::zero()) || v > T::one()) {
            return Err(Error::InvalidSensor("responsivity values must lie in (0, 1]".into()));
        }
        if responsivity.max_value() != T::one() {
            return Err(Error::InvalidSensor("responsivity maximum must be exactly 1".into()));
        }
        self.responsivity = Some(responsivity);
        Ok(self)
    }

    pub fn with_dark_frame(mut self, dark: Spectrum<T>) -> Result<Self> {
        let s = Self::new(
            self.grid.clone(),
            self.bandwidths_nm.clone(),
            self.bit_depth,
            self.exposure_s,
            self.ifov_rad,
            self.gsd_m,
            dark,
        )?;
        self.dark_frame = s.dark_frame;
        Ok(self)
    }

    pub fn with_exposure(mut self, exposure_s: T) -> Result<Self> {
        if !(exposure_s > T::zero()) || !exposure_s.is_finite() {
            return Err(Error::InvalidSensor(format!("exposure_s must be positive, got {exposure_s}")));
        }
        self.exposure_s = exposure_s;
        Ok(self)
    }

    pub fn grid(&self) -> &WavelengthGrid<T> {
        &self.grid
    }

    pub fn bands(&self) -> usize {
        self.grid.len()
    }

    pub fn bandwidths_nm(&self) -> &[T] {
        &self.bandwidths_nm
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    /// `2^bit_depth − 1`.
    pub fn max_dc(&self) -> T {
        T::from_u32((1u32 << self.bit_depth) - 1).expect("small integer")
    }

    pub fn exposure_s(&self) -> T {
        self.exposure_s
    }

    pub fn ifov_rad(&self) -> T {
        self.ifov_rad
    }

    pub fn gsd_m(&self) -> T {
        self.gsd_m
    }

    pub fn dark_frame(&self) -> &Spectrum<T> {
        &self.dark_frame
    }

    pub fn responsivity(&self) -> Option<&Spectrum<T>> {
        self.responsivity.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sensor_matches_instrument_table() {
        let s = SensorModel::<f64>::nano_hyperspec();
        assert_eq!(s.bands(), 272);
        assert_eq!(s.max_dc(), 4095.0);
        assert_eq!(s.exposure_s(), 0.005);
        assert_eq!(s.grid().first(), 400.0);
        assert_eq!(s.grid().last(), 1000.0);
    }

    #[test]
    fn responsivity_must_peak_at_one() {
        let s = SensorModel::<f64>::nano_hyperspec();
        let g = s.grid().clone();
        let half = Spectrum::constant(g.clone(), 0.5, Unit::Responsivity).unwrap();
        assert!(s.clone().with_responsivity(half).is_err());
        let one = Spectrum::constant(g, 1.0, Unit::Responsivity).unwrap();
        assert!(s.with_responsivity(one).is_ok());
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = WavelengthGrid::new(vec![500.0, 600.0]).unwrap();
        let dark = Spectrum::constant(g.clone(), 0.0, Unit::DigitalCount).unwrap();
        assert!(SensorModel::new(g.clone(), vec![1.0, 1.0], 7, 1.0, 1.0, 1.0, dark.clone()).is_err());
        assert!(SensorModel::new(g.clone(), vec![1.0, 1.0], 12, 0.0, 1.0, 1.0, dark.clone()).is_err());
        assert!(SensorModel::new(g, vec![1.0], 12, 1.0, 1.0, 1.0, dark).is_err());
    }
}
