use crate::error::{Error, Result};
use crate::spectral::{Spectrum, Unit};
use crate::Scalar;

/// Time-ordered downwelling irradiance spectra on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceSeries<T> {
    samples: Vec<(f64, Spectrum<T>)>,
}

impl<T: Scalar> IrradianceSeries<T> {
    pub fn new(samples: Vec<(f64, Spectrum<T>)>) -> Result<Self> {
        for (i, (t, s)) in samples.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::NonMonotoneTime { line: i + 1 });
            }
            if s.unit() != Unit::Irradiance {
                return Err(Error::UnitMismatch {
                    expected: Unit::Irradiance.to_string(),
                    found: s.unit().to_string(),
                });
            }
            if i > 0 {
                if *t <= samples[i - 1].0 {
                    return Err(Error::NonMonotoneTime { line: i + 1 });
                }
                s.grid().ensure_same(samples[0].1.grid())?;
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, Spectrum<T>)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}
