use crate::error::{Error, Result};
use crate::spectral::{HyperCube, Spectrum};
use crate::Scalar;

/// Pixel region of a cube, in `(row, col)` coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Roi {
    /// Inclusive rectangle.
    Rect { row0: usize, col0: usize, row1: usize, col1: usize },
    /// Closed polygon over pixel centers; a pixel is inside when its center is
    /// inside or on the boundary.
    Polygon(Vec<(usize, usize)>),
}

impl Roi {
    pub fn rect(row0: usize, col0: usize, row1: usize, col1: usize) -> Self {
        Roi::Rect { row0, col0, row1, col1 }
    }

    /// Pixels of the region in row-major order, checked against the cube extent.
    pub fn pixels(&self, rows: usize, cols: usize) -> Result<Vec<(usize, usize)>> {
        let oob = || Error::OutOfBounds { rows, cols };
        match self {
            Roi::Rect { row0, col0, row1, col1 } => {
                if row0 > row1 || col0 > col1 {
                    return Err(Error::EmptyRoi);
                }
                if *row1 >= rows || *col1 >= cols {
                    return Err(oob());
                }
                Ok((*row0..=*row1)
                    .flat_map(|r| (*col0..=*col1).map(move |c| (r, c)))
                    .collect())
            }
            Roi::Polygon(vertices) => {
                if vertices.len() < 3 {
                    return Err(Error::EmptyRoi);
                }
                if vertices.iter().any(|&(r, c)| r >= rows || c >= cols) {
                    return Err(oob());
                }
                let rmin = vertices.iter().map(|v| v.0).min().unwrap_or(0);
                let rmax = vertices.iter().map(|v| v.0).max().unwrap_or(0);
                let cmin = vertices.iter().map(|v| v.1).min().unwrap_or(0);
                let cmax = vertices.iter().map(|v| v.1).max().unwrap_or(0);
                let mut out = Vec::new();
                for r in rmin..=rmax {
                    for c in cmin..=cmax {
                        if polygon_contains(vertices, r as f64, c as f64) {
                            out.push((r, c));
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

fn polygon_contains(vertices: &[(usize, usize)], r: f64, c: f64) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let (r0, c0) = (vertices[i].0 as f64, vertices[i].1 as f64);
        let (r1, c1) = (vertices[(i + 1) % n].0 as f64, vertices[(i + 1) % n].1 as f64);
        // boundary
        let cross = (r1 - r0) * (c - c0) - (c1 - c0) * (r - r0);
        if cross == 0.0 && r >= r0.min(r1) && r <= r0.max(r1) && c >= c0.min(c1) && c <= c0.max(c1) {
            return true;
        }
        if (r0 > r) != (r1 > r) {
            let c_at = c0 + (r - r0) * (c1 - c0) / (r1 - r0);
            if c < c_at {
                inside = !inside;
            }
        }
    }
    inside
}

/// Per-pixel keep flags over a whole cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    rows: usize,
    cols: usize,
    keep: Vec<bool>,
}

impl PixelMask {
    pub fn new(rows: usize, cols: usize, keep: Vec<bool>) -> Result<Self> {
        if keep.len() != rows * cols {
            return Err(Error::InvalidCube(format!("mask has {} flags for {rows}x{cols}", keep.len())));
        }
        Ok(Self { rows, cols, keep })
    }

    pub fn all(rows: usize, cols: usize) -> Self {
        Self { rows, cols, keep: vec![true; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn keep(&self, r: usize, c: usize) -> bool {
        self.keep[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, keep: bool) {
        self.keep[r * self.cols + c] = keep;
    }

    pub fn flags(&self) -> &[bool] {
        &self.keep
    }
}

/// Per-band arithmetic mean (sum / count) over the kept pixels of `roi`.
pub fn roi_mean_spectrum<T: Scalar>(
    cube: &HyperCube<T>,
    roi: &Roi,
    mask: Option<&PixelMask>,
) -> Result<Spectrum<T>> {
    if let Some(m) = mask {
        if m.rows() != cube.rows() || m.cols() != cube.cols() {
            return Err(Error::InvalidCube("mask extent differs from cube".into()));
        }
    }
    let mut sum = vec![T::zero(); cube.bands()];
    let mut count = 0usize;
    for (r, c) in roi.pixels(cube.rows(), cube.cols())? {
        if mask.is_some_and(|m| !m.keep(r, c)) {
            continue;
        }
        for (s, &v) in sum.iter_mut().zip(cube.pixel(r, c)) {
            *s = *s + v;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyRoi);
    }
    let n = T::from_usize_lossy(count);
    Spectrum::new(cube.grid().clone(), sum.into_iter().map(|s| s / n).collect(), cube.unit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Unit, WavelengthGrid};

    fn cube() -> HyperCube<f64> {
        let g = WavelengthGrid::new(vec![500.0, 600.0]).unwrap();
        HyperCube::from_pixels(3, 4, g, Unit::Reflectance, |r, c| {
            vec![(r * 4 + c) as f64, 3.0 * (r * 4 + c) as f64]
        })
        .unwrap()
    }

    #[test]
    fn single_pixel_and_pair() {
        let cube = cube();
        let m = roi_mean_spectrum(&cube, &Roi::rect(1, 2, 1, 2), None).unwrap();
        assert_eq!(m.values(), cube.pixel(1, 2));
        // pixels 1 and 3 → mean 2 and 6
        let mut mask = PixelMask::all(3, 4);
        mask.set(0, 2, false);
        let m = roi_mean_spectrum(&cube, &Roi::rect(0, 1, 0, 3), Some(&mask)).unwrap();
        assert_eq!(m.values(), &[2.0, 6.0]);
    }

    #[test]
    fn errors() {
        let cube = cube();
        assert!(matches!(
            roi_mean_spectrum(&cube, &Roi::rect(0, 0, 3, 0), None),
            Err(Error::OutOfBounds { .. })
        ));
        let mask = PixelMask::new(3, 4, vec![false; 12]).unwrap();
        assert!(matches!(
            roi_mean_spectrum(&cube, &Roi::rect(0, 0, 1, 1), Some(&mask)),
            Err(Error::EmptyRoi)
        ));
    }

    #[test]
    fn polygon_membership() {
        let tri = Roi::Polygon(vec![(0, 0), (4, 0), (4, 4)]);
        let px = tri.pixels(5, 5).unwrap();
        // lower triangle including the diagonal: 1 + 2 + 3 + 4 + 5
        assert_eq!(px.len(), 15);
        assert!(px.contains(&(2, 1)) && px.contains(&(2, 2)) && !px.contains(&(1, 2)));
    }
}
