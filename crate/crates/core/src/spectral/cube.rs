use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{Spectrum, Unit, WavelengthGrid};
use crate::Scalar;

/// Band/sample ordering of a cube on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Interleave {
    /// Band interleaved by line.
    #[default]
    Bil,
    /// Band sequential.
    Bsq,
    /// Band interleaved by pixel.
    Bip,
}

impl Interleave {
    pub fn tag(self) -> &'static str {
        match self {
            Interleave::Bil => "bil",
            Interleave::Bsq => "bsq",
            Interleave::Bip => "bip",
        }
    }

    /// Position of sample `(row, col, band)` in a flat buffer of this layout.
    pub fn offset(self, rows: usize, cols: usize, bands: usize, r: usize, c: usize, b: usize) -> usize {
        match self {
            Interleave::Bip => (r * cols + c) * bands + b,
            Interleave::Bil => (r * bands + b) * cols + c,
            Interleave::Bsq => (b * rows + r) * cols + c,
        }
    }
}

impl fmt::Display for Interleave {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Interleave {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bil" => Ok(Interleave::Bil),
            "bsq" => Ok(Interleave::Bsq),
            "bip" => Ok(Interleave::Bip),
            other => Err(format!("unknown interleave `{other}`")),
        }
    }
}

/// A `rows × cols × bands` raster.
///
/// Samples are held pixel-contiguous in memory regardless of `interleave`,
/// which only records the layout used when the cube is written out.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube<T> {
    rows: usize,
    cols: usize,
    grid: WavelengthGrid<T>,
    unit: Unit,
    interleave: Interleave,
    data: Vec<T>,
}

impl<T: Scalar> HyperCube<T> {
    /// Builds a cube from pixel-contiguous samples, `data[(r·cols + c)·bands + b]`.
    pub fn new(rows: usize, cols: usize, grid: WavelengthGrid<T>, unit: Unit, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidCube("rows and cols must be positive".into()));
        }
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(grid.len()))
            .ok_or_else(|| Error::InvalidCube("dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::InvalidCube(format!(
                "{} samples for {rows}x{cols}x{} cube",
                data.len(),
                grid.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidCube(format!("non-finite sample at index {i}")));
        }
        if unit == Unit::DigitalCount {
            if let Some(i) = data.iter().position(|&v| v < T::zero()) {
                return Err(Error::InvalidCube(format!("negative digital count at index {i}")));
            }
        }
        Ok(Self { rows, cols, grid, unit, interleave: Interleave::default(), data })
    }

    pub fn filled(rows: usize, cols: usize, grid: WavelengthGrid<T>, unit: Unit, value: T) -> Result<Self> {
        let n = rows * cols * grid.len();
        Self::new(rows, cols, grid, unit, vec![value; n])
    }

    /// Builds a cube by evaluating `f(row, col)` for each pixel's spectrum.
    pub fn from_pixels(
        rows: usize,
        cols: usize,
        grid: WavelengthGrid<T>,
        unit: Unit,
        mut f: impl FnMut(usize, usize) -> Vec<T>,
    ) -> Result<Self> {
        let bands = grid.len();
        let mut data = Vec::with_capacity(rows * cols * bands);
        for r in 0..rows {
            for c in 0..cols {
                let px = f(r, c);
                if px.len() != bands {
                    return Err(Error::InvalidCube(format!("pixel ({r},{c}) has {} bands", px.len())));
                }
                data.extend(px);
            }
        }
        Self::new(rows, cols, grid, unit, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &WavelengthGrid<T> {
        &self.grid
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn interleave(&self) -> Interleave {
        self.interleave
    }

    pub fn with_interleave(mut self, interleave: Interleave) -> Self {
        self.interleave = interleave;
        self
    }

    /// Pixel-contiguous samples.
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize, b: usize) -> T {
        self.data[(r * self.cols + c) * self.bands() + b]
    }

    pub fn pixel(&self, r: usize, c: usize) -> &[T] {
        let bands = self.bands();
        let start = (r * self.cols + c) * bands;
        &self.data[start..start + bands]
    }

    pub fn pixel_spectrum(&self, r: usize, c: usize) -> Spectrum<T> {
        Spectrum::new(self.grid.clone(), self.pixel(r, c).to_vec(), self.unit)
            .expect("cube pixels are validated on construction")
    }

    /// Every sample must lie in `[0, max_dc]`; only meaningful for raw counts.
    pub fn check_counts(&self, max_dc: T) -> Result<()> {
        if self.unit != Unit::DigitalCount {
            return Ok(());
        }
        match self.data.iter().position(|&v| v < T::zero() || v > max_dc) {
            Some(i) => Err(Error::InvalidCube(format!(
                "digital count {} at index {i} outside [0, {max_dc}]",
                self.data[i]
            ))),
            None => Ok(()),
        }
    }

    /// Applies `f(band, value)` to every sample in parallel, producing a cube
    /// tagged `unit`. Output does not depend on how the work is scheduled.
    pub fn map_samples(&self, unit: Unit, f: impl Fn(usize, T) -> T + Sync) -> Result<Self> {
        let bands = self.bands();
        let mut data = vec![T::zero(); self.data.len()];
        data.par_chunks_mut(bands)
            .zip(self.data.par_chunks(bands))
            .for_each(|(out, px)| {
                for (b, (o, &v)) in out.iter_mut().zip(px).enumerate() {
                    *o = f(b, v);
                }
            });
        let cube = Self::new(self.rows, self.cols, self.grid.clone(), unit, data)?;
        Ok(cube.with_interleave(self.interleave))
    }
}
