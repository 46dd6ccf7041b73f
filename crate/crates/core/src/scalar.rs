//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar used for spectra, cubes and fits: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or measured value into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable in every Scalar")
    }

    /// Widens to `f64`; used for formatting and error reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Rounds to the nearest integer, ties to even.
    fn round_half_even(self) -> Self {
        let floor = self.floor();
        let diff = self - floor;
        let half = Self::lit(0.5);
        if diff < half {
            floor
        } else if diff > half {
            floor + Self::one()
        } else if (floor / (Self::one() + Self::one())).fract() == Self::zero() {
            floor
        } else {
            floor + Self::one()
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_go_to_even() {
        assert_eq!(0.5f64.round_half_even(), 0.0);
        assert_eq!(1.5f64.round_half_even(), 2.0);
        assert_eq!(2.5f64.round_half_even(), 2.0);
        assert_eq!(2.5000001f64.round_half_even(), 3.0);
        assert_eq!(3.49f32.round_half_even(), 3.0);
        assert_eq!(4095.5f64.round_half_even(), 4096.0);
    }
}
