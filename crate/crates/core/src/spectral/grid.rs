use std::sync::Arc;

use crate::error::{Error, Result};
use crate::Scalar;

/// Strictly increasing band centers in nanometres.
///
/// The values are shared behind an `Arc`, so cloning a grid (which every
/// spectrum and cube does) is cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct WavelengthGrid<T> {
    nm: Arc<[T]>,
}

impl<T: Scalar> WavelengthGrid<T> {
    pub fn new(wavelengths_nm: Vec<T>) -> Result<Self> {
        if wavelengths_nm.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        for (i, &w) in wavelengths_nm.iter().enumerate() {
            if !w.is_finite() || w <= T::zero() {
                return Err(Error::InvalidGrid(format!(
                    "band {i}: wavelength {w} is not finite and positive"
                )));
            }
            if i > 0 && w <= wavelengths_nm[i - 1] {
                return Err(Error::InvalidGrid(format!(
                    "band {i}: wavelength {w} does not exceed previous {}",
                    wavelengths_nm[i - 1]
                )));
            }
        }
        Ok(Self { nm: wavelengths_nm.into() })
    }

    /// `bands` evenly spaced centers from `first_nm` to `last_nm` inclusive.
    pub fn linspace(first_nm: T, last_nm: T, bands: usize) -> Result<Self> {
        if bands < 2 {
            return Err(Error::InvalidGrid("linspace needs at least 2 bands".into()));
        }
        let step = (last_nm - first_nm) / T::from_usize_lossy(bands - 1);
        let mut w: Vec<T> = (0..bands)
            .map(|i| first_nm + step * T::from_usize_lossy(i))
            .collect();
        // pin the end point so ranges compare exactly
        w[bands - 1] = last_nm;
        Self::new(w)
    }

    pub fn len(&self) -> usize {
        self.nm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nm.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.nm
    }

    pub fn first(&self) -> T {
        self.nm[0]
    }

    pub fn last(&self) -> T {
        self.nm[self.nm.len() - 1]
    }

    /// Index of the band whose center is nearest to `nm`.
    pub fn nearest_band(&self, nm: T) -> usize {
        let mut best = 0;
        for (i, &w) in self.nm.iter().enumerate() {
            if (w - nm).abs() < (self.nm[best] - nm).abs() {
                best = i;
            }
        }
        best
    }

    /// Mean spacing between adjacent centers.
    pub fn mean_spacing(&self) -> T {
        if self.len() < 2 {
            return T::zero();
        }
        (self.last() - self.first()) / T::from_usize_lossy(self.len() - 1)
    }

    /// Sub-grid of the bands lying inside `[lo, hi]`.
    pub fn restrict(&self, lo: T, hi: T) -> Result<Self> {
        Self::new(self.nm.iter().copied().filter(|&w| w >= lo && w <= hi).collect())
    }

    pub fn ensure_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing() {
        assert!(WavelengthGrid::new(vec![400.0, 400.0]).is_err());
        assert!(WavelengthGrid::new(vec![500.0, 400.0]).is_err());
        assert!(WavelengthGrid::new(vec![0.0, 400.0]).is_err());
        assert!(WavelengthGrid::new(vec![f64::NAN]).is_err());
        assert!(WavelengthGrid::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn linspace_pins_endpoints() {
        let g = WavelengthGrid::linspace(400.0f64, 1000.0, 272).unwrap();
        assert_eq!(g.len(), 272);
        assert_eq!(g.first(), 400.0);
        assert_eq!(g.last(), 1000.0);
        assert_eq!(g.nearest_band(760.0), 163);
    }
}
