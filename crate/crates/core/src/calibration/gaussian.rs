//! Damped least-squares fit of a Gaussian line profile plus constant floor.

use crate::error::{Error, Result};
use crate::Scalar;

pub const MAX_ITERATIONS: usize = 200;
const REL_TOL: f64 = 1e-10;
/// FWHM = 2·sqrt(2 ln 2)·σ
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_4;
/// Minimum peak height above the median, in units of the profile MAD.
pub const PEAK_TO_NOISE_MIN: f64 = 5.0;

/// Result of fitting `A·exp(−(i−μ)²/(2σ²)) + baseline` across band index `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFit<T> {
    pub amplitude_dc: T,
    /// Fractional band index of the peak.
    pub center_band: T,
    pub sigma_bands: T,
    pub baseline_dc: T,
    pub residual_rms: T,
    pub iterations: usize,
}

impl<T: Scalar> GaussianFit<T> {
    pub fn eval(&self, band: T) -> T {
        let z = (band - self.center_band) / self.sigma_bands;
        self.amplitude_dc * (-(z * z) / T::lit(2.0)).exp() + self.baseline_dc
    }
}

pub(crate) fn median<T: Scalar>(values: &[T]) -> T {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

/// Median absolute deviation about the median.
pub(crate) fn mad<T: Scalar>(values: &[T]) -> T {
    let m = median(values);
    let dev: Vec<T> = values.iter().map(|&v| (v - m).abs()).collect();
    median(&dev)
}

struct Start<T> {
    params: [T; 4],
}

fn initial_guess<T: Scalar>(y: &[T]) -> Start<T> {
    let base = median(y);
    let (k, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
        .expect("non-empty");
    let amp = ymax - base;
    let half = base + amp / T::lit(2.0);

    // half-maximum crossings, linearly interpolated
    let mut left = None;
    let mut i = k;
    while i > 0 {
        if y[i - 1] < half {
            let t = (y[i] - half) / (y[i] - y[i - 1]);
            left = Some(T::from_usize_lossy(i) - t);
            break;
        }
        i -= 1;
    }
    let lo = i.saturating_sub(1);
    let mut right = None;
    let mut j = k;
    while j + 1 < y.len() {
        if y[j + 1] < half {
            let t = (y[j] - half) / (y[j] - y[j + 1]);
            right = Some(T::from_usize_lossy(j) + t);
            break;
        }
        j += 1;
    }
    let hi = (j + 1).min(y.len() - 1);
    let kf = T::from_usize_lossy(k);
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => (kf - l) * T::lit(2.0),
        (None, Some(r)) => (r - kf) * T::lit(2.0),
        (None, None) => T::one(),
    };
    let sigma = (fwhm / T::lit(FWHM_PER_SIGMA)).max(T::lit(0.3));

    // intensity-weighted centroid over the half-maximum window
    let (mut wsum, mut isum) = (T::zero(), T::zero());
    for (idx, &v) in y.iter().enumerate().take(hi + 1).skip(lo) {
        let w = (v - base).max(T::zero());
        wsum = wsum + w;
        isum = isum + w * T::from_usize_lossy(idx);
    }
    let center = if wsum > T::zero() { isum / wsum } else { kf };
    Start { params: [amp, center, sigma, base] }
}

fn residuals_and_cost<T: Scalar>(y: &[T], p: &[T; 4], r: &mut [T]) -> T {
    let mut cost = T::zero();
    for (i, (ri, &yi)) in r.iter_mut().zip(y).enumerate() {
        let z = (T::from_usize_lossy(i) - p[1]) / p[2];
        let model = p[0] * (-(z * z) / T::lit(2.0)).exp() + p[3];
        *ri = yi - model;
        cost = cost + *ri * *ri;
    }
    cost
}

/// Solves the 4×4 system `a·x = b` by Gaussian elimination with partial pivoting.
fn solve4<T: Scalar>(mut a: [[T; 4]; 4], mut b: [T; 4]) -> Option<[T; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col] == T::zero() || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in row + 1..4 {
            s = s - a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Fits a Gaussian plus baseline to a dark-corrected cross-band profile.
///
/// Levenberg–Marquardt with multiplicative damping on the normal-equation
/// diagonal; stops once every parameter moves by less than 1e-10 of its
/// scale, or fails after [`MAX_ITERATIONS`].
pub fn fit_gaussian_profile<T: Scalar>(profile: &[T]) -> Result<GaussianFit<T>> {
    if profile.len() < 4 {
        return Err(Error::InvalidStep(format!("profile of {} bands is too short to fit", profile.len())));
    }
    if profile.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidStep("profile has non-finite samples".into()));
    }
    let floor = mad(profile);
    let peak = profile.iter().copied().fold(T::neg_infinity(), T::max) - median(profile);
    if !(peak > T::zero()) || peak < T::lit(PEAK_TO_NOISE_MIN) * floor {
        return Err(Error::NoPeak { peak: peak.as_f64(), floor: floor.as_f64() });
    }

    let tol = T::lit(REL_TOL).max(T::epsilon() * T::lit(16.0));
    let n = profile.len();
    let mut p = initial_guess(profile).params;
    let mut r = vec![T::zero(); n];
    let mut trial_r = vec![T::zero(); n];
    let mut cost = residuals_and_cost(profile, &p, &mut r);
    let mut damping = T::lit(1e-3);
    let two = T::lit(2.0);

    for iter in 1..=MAX_ITERATIONS {
        // J is the model Jacobian; normal equations JᵀJ δ = Jᵀr
        let mut jtj = [[T::zero(); 4]; 4];
        let mut jtr = [T::zero(); 4];
        for (i, &ri) in r.iter().enumerate() {
            let d = T::from_usize_lossy(i) - p[1];
            let z = d / p[2];
            let g = (-(z * z) / two).exp();
            let j = [g, p[0] * g * d / (p[2] * p[2]), p[0] * g * d * d / (p[2] * p[2] * p[2]), T::one()];
            for a in 0..4 {
                jtr[a] = jtr[a] + j[a] * ri;
                for b in a..4 {
                    jtj[a][b] = jtj[a][b] + j[a] * j[b];
                }
            }
        }
        for a in 0..4 {
            for b in 0..a {
                jtj[a][b] = jtj[b][a];
            }
        }

        let scale = [p[0].abs(), T::one(), T::one(), p[0].abs()];
        loop {
            let mut damped = jtj;
            for (a, row) in damped.iter_mut().enumerate() {
                row[a] = row[a] * (T::one() + damping);
            }
            let Some(step) = solve4(damped, jtr) else {
                damping = damping * T::lit(10.0);
                if damping > T::lit(1e30) {
                    return Err(Error::FitDiverged { iterations: iter });
                }
                continue;
            };
            let small = step
                .iter()
                .zip(p.iter().zip(scale))
                .all(|(&s, (&v, sc))| s.abs() <= tol * v.abs().max(sc).max(T::min_positive_value()));
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
            let trial_cost = residuals_and_cost(profile, &trial, &mut trial_r);
            if trial_cost <= cost && trial[2] != T::zero() {
                p = trial;
                cost = trial_cost;
                std::mem::swap(&mut r, &mut trial_r);
                damping = (damping / T::lit(10.0)).max(T::lit(1e-12));
                if small {
                    return finish(p, cost, n, iter);
                }
                break;
            }
            if small {
                // no downhill step larger than the tolerance exists
                return finish(p, cost, n, iter);
            }
            damping = damping * T::lit(10.0);
            if damping > T::lit(1e30) {
                return Err(Error::FitDiverged { iterations: iter });
            }
        }
    }
    Err(Error::FitDiverged { iterations: MAX_ITERATIONS })
}

fn finish<T: Scalar>(p: [T; 4], cost: T, n: usize, iterations: usize) -> Result<GaussianFit<T>> {
    let bands = T::from_usize_lossy(n);
    let half = T::lit(0.5);
    // centers may sit up to half a band outside the extent at the grid edges
    if !(p[0] > T::zero()) || p[1] < -half || p[1] > bands - half || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::FitDiverged { iterations });
    }
    Ok(GaussianFit {
        amplitude_dc: p[0],
        center_band: p[1],
        sigma_bands: p[2].abs(),
        baseline_dc: p[3],
        residual_rms: (cost / bands).sqrt(),
        iterations,
    })
}
