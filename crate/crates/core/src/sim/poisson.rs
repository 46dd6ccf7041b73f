use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Means above this use the normal approximation.
pub const NORMAL_APPROX_ABOVE: f64 = 1000.0;
/// Inversion works on pieces no larger than this so `exp(−mean)` stays normal.
const INVERSION_CHUNK: f64 = 500.0;

/// Generator for one pixel: the seed selects the run, `stream` the pixel.
pub(crate) fn pixel_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn invert<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
    }
    k as f64
}

/// Draws a Poisson variate: inversion by sequential search for small means,
/// `mean + sqrt(mean)·z` above [`NORMAL_APPROX_ABOVE`].
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    if !(mean > 0.0) {
        return 0.0;
    }
    if mean > NORMAL_APPROX_ABOVE {
        let z: f64 = rng.sample(StandardNormal);
        return (mean + mean.sqrt() * z).max(0.0);
    }
    // a sum of independent Poisson variates is Poisson in the summed mean
    let pieces = (mean / INVERSION_CHUNK).ceil().max(1.0);
    let part = mean / pieces;
    (0..pieces as usize).map(|_| invert(part, rng)).sum()
}
