//! Resampling, smoothing and comparison metrics on single spectra.

use crate::error::{Error, Result};
use crate::spectral::spectrum::ensure_unit;
use crate::spectral::{Spectrum, WavelengthGrid};
use crate::Scalar;

/// Piecewise-linear resampling onto `target`. Never extrapolates.
pub fn resample<T: Scalar>(src: &Spectrum<T>, target: &WavelengthGrid<T>) -> Result<Spectrum<T>> {
    let xs = src.grid().as_slice();
    let ys = src.values();
    if xs.len() < 2 {
        return Err(Error::InvalidGrid("resampling needs a source grid of at least 2 bands".into()));
    }
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let mut out = Vec::with_capacity(target.len());
    for &x in target.as_slice() {
        if x < lo || x > hi {
            return Err(Error::TargetOutOfRange {
                target_nm: x.as_f64(),
                lo_nm: lo.as_f64(),
                hi_nm: hi.as_f64(),
            });
        }
        // first source index with xs[i] >= x
        let i = xs.partition_point(|&w| w < x);
        let y = if xs[i] == x {
            ys[i]
        } else {
            let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        };
        out.push(y);
    }
    Spectrum::new(target.clone(), out, src.unit())
}

/// Angle in radians between two spectra viewed as vectors.
///
/// Units are not compared, so a radiance spectrum can be matched against an
/// irradiance spectrum by shape.
pub fn spectral_angle<T: Scalar>(a: &Spectrum<T>, b: &Spectrum<T>) -> Result<T> {
    a.ensure_grid(b)?;
    angle_between(a.values(), b.values())
}

pub(crate) fn angle_between<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    let mut dot = T::zero();
    let mut aa = T::zero();
    let mut bb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        dot = dot + x * y;
        aa = aa + x * x;
        bb = bb + y * y;
    }
    if aa == T::zero() || bb == T::zero() {
        return Err(Error::ZeroVector);
    }
    let cos = (dot / (aa.sqrt() * bb.sqrt())).max(-T::one()).min(T::one());
    Ok(cos.acos())
}

/// Root-mean-square difference.
pub fn rmse<T: Scalar>(a: &Spectrum<T>, b: &Spectrum<T>) -> Result<T> {
    a.ensure_grid(b)?;
    ensure_unit(a.unit(), b.unit())?;
    let n = T::from_usize_lossy(a.len());
    let ss: T = a.values().iter().zip(b.values()).map(|(&x, &y)| (x - y) * (x - y)).sum();
    Ok((ss / n).sqrt())
}

/// Moving average over `width` bands (odd) with replicated end samples.
///
/// Each output is evaluated as `x_i + Σ(x_j − x_i)/width`, which equals the
/// window mean and leaves constant runs bit-identical.
pub fn box_smooth<T: Scalar>(s: &Spectrum<T>, width: usize) -> Result<Spectrum<T>> {
    let n = s.len();
    if width == 0 || width.is_multiple_of(2) || width > n {
        return Err(Error::BadWidth { width, len: n });
    }
    let half = (width - 1) / 2;
    let v = s.values();
    let w = T::from_usize_lossy(width);
    let out = (0..n)
        .map(|i| {
            let center = v[i];
            let mut acc = T::zero();
            for k in 0..width {
                let j = (i + k).saturating_sub(half).min(n - 1);
                acc = acc + (v[j] - center);
            }
            center + acc / w
        })
        .collect();
    s.with_values(out)
}
