use approx::assert_relative_eq;
use hypercal::calibration::{
    build_responsivity, fit_gaussian_profile, irradiance_per_count, responsivity_from_amplitudes, ReferenceParams,
    ResponsivityCurve,
};
use hypercal::sim::fixtures::{smooth_qe, synthetic_sweep, SweepOptions};
use hypercal::spectral::{SensorModel, Spectrum, Unit, WavelengthGrid};
use hypercal::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn gaussian(a: f64, mu: f64, sigma: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (-((i as f64 - mu).powi(2)) / (2.0 * sigma * sigma)).exp()).collect()
}

#[test]
fn exact_profile_is_recovered() {
    let fit = fit_gaussian_profile(&gaussian(2000.0, 135.0, 1.5, 272)).unwrap();
    assert_relative_eq!(fit.amplitude_dc, 2000.0, max_relative = 1e-8);
    assert_relative_eq!(fit.center_band, 135.0, max_relative = 1e-8);
    assert_relative_eq!(fit.sigma_bands, 1.5, max_relative = 1e-8);
    assert!(fit.baseline_dc.abs() < 1e-6);
}

#[test]
fn zero_profile_has_no_peak() {
    assert!(matches!(fit_gaussian_profile(&[0.0f64; 272]), Err(Error::NoPeak { .. })));
}

/// With σ_n = 10 DC on a single 272-band profile the amplitude estimate has a
/// standard deviation near 7.5 DC, so about 99.2 % of draws land within 1 %.
/// A thousand seeds keep the sampling error of the pass rate well under the
/// 0.2 % margin.
#[test]
fn noisy_profile_amplitude_within_one_percent() {
    let clean = gaussian(2000.0, 135.0, 1.5, 272);
    let normal = Normal::new(0.0, 10.0).unwrap();
    let seeds = 1000;
    let mut pass = 0;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy: Vec<f64> = clean.iter().map(|v| v + normal.sample(&mut rng)).collect();
        let fit = fit_gaussian_profile(&noisy).unwrap();
        if (fit.amplitude_dc - 2000.0).abs() <= 20.0 {
            pass += 1;
        }
    }
    assert!(pass as f64 >= 0.99 * seeds as f64, "{pass}/{seeds}");
}

#[test]
fn sweep_recovers_known_curve() {
    let sensor = SensorModel::<f64>::nano_hyperspec();
    let steps = synthetic_sweep(&sensor, smooth_qe, &SweepOptions::default()).unwrap();
    let curve = build_responsivity(&steps, &sensor).unwrap();
    assert_eq!(curve.relative.max_value(), 1.0);

    // oracle: the known curve sampled at the swept wavelengths, linearly
    // interpolated onto the sensor grid, max-normalized
    let swept: Vec<f64> = (0..61).map(|k| 400.0 + 10.0 * k as f64).collect();
    let truth: Vec<f64> = sensor
        .grid()
        .as_slice()
        .iter()
        .map(|&w| {
            let j = swept.iter().rposition(|&s| s <= w).unwrap().min(59);
            let f = (w - swept[j]) / 10.0;
            smooth_qe(swept[j]) * (1.0 - f) + smooth_qe(swept[j + 1]) * f
        })
        .collect();
    let peak = truth.iter().cloned().fold(0.0, f64::max);
    for (got, t) in curve.relative.values().iter().zip(&truth) {
        assert!((got - t / peak).abs() <= 0.01 * t / peak);
    }
}

#[test]
fn one_step_is_not_enough() {
    let sensor = SensorModel::<f64>::nano_hyperspec();
    let opts = SweepOptions { steps: 1, ..SweepOptions::default() };
    let steps = synthetic_sweep(&sensor, smooth_qe, &opts).unwrap();
    assert!(matches!(build_responsivity(&steps, &sensor), Err(Error::InsufficientSteps { .. })));
}

fn sensor(t_obs: f64, x: f64, ifov: f64, b_obs: f64, n: usize) -> SensorModel<f64> {
    let grid = WavelengthGrid::linspace(500.0, 600.0, n).unwrap();
    let dark = Spectrum::constant(grid.clone(), 0.0, Unit::DigitalCount).unwrap();
    SensorModel::new(grid, vec![b_obs; n], 12, t_obs, ifov, x, dark).unwrap()
}

fn curve(sensor: &SensorModel<f64>, r: Vec<f64>) -> ResponsivityCurve<f64> {
    ResponsivityCurve { fits: Vec::new(), relative: Spectrum::new(sensor.grid().clone(), r, Unit::Responsivity).unwrap() }
}

/// (φ_ref, t_obs, t_ref, x, θ, B_ref, B_obs, R) and the value worked out by hand.
const CASES: [([f64; 8], f64); 5] = [
    ([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0], 1.0),
    ([2e-6, 0.005, 0.010, 0.008, 1e-3, 2.0, 2.0, 0.8], 19531.25),
    ([1e-6, 0.005, 0.005, 0.01, 1e-3, 4.0, 2.0, 0.5], 10000.0),
    ([3e-6, 0.02, 0.01, 0.02, 5e-4, 1.0, 2.0, 0.25], 480000.0),
    ([5e-7, 0.004, 0.008, 0.004, 2e-3, 2.5, 5.0, 1.0], 7812.5),
];

#[test]
fn irradiance_per_count_matches_hand_values() {
    for ([phi, t_obs, t_ref, x, ifov, b_ref, b_obs, r], expect) in CASES {
        let s = sensor(t_obs, x, ifov, b_obs, 2);
        let refs = ReferenceParams::uniform(s.grid(), phi, t_ref, b_ref).unwrap();
        let e = irradiance_per_count(&curve(&s, vec![r, 1.0]), &refs, &s, false).unwrap();
        assert_relative_eq!(e.values()[0], expect, max_relative = 1e-12);
    }
}

#[test]
fn halving_responsivity_doubles_e_per_dc() {
    let s = sensor(0.005, 0.008, 1e-3, 2.0, 2);
    let refs = ReferenceParams::uniform(s.grid(), 2e-6, 0.01, 2.0).unwrap();
    let e = irradiance_per_count(&curve(&s, vec![0.5, 1.0]), &refs, &s, false).unwrap();
    assert_eq!(e.values()[0], 2.0 * e.values()[1]);
}

#[test]
fn responsivity_must_be_positive_in_range() {
    let s = sensor(0.005, 0.008, 1e-3, 2.0, 2);
    let refs = ReferenceParams::uniform(s.grid(), 2e-6, 0.01, 2.0).unwrap();
    let c = ResponsivityCurve {
        fits: Vec::new(),
        relative: Spectrum::new(s.grid().clone(), vec![0.0, 1.0], Unit::Responsivity).unwrap(),
    };
    assert!(matches!(irradiance_per_count(&c, &refs, &s, false), Err(Error::ZeroResponsivity { .. })));
}

proptest! {
    #[test]
    fn responsivity_ignores_amplitude_scale(amps in prop::collection::vec(1.0f64..4000.0, 5), k in 1e-3f64..1e3) {
        let lambdas = [400.0, 500.0, 600.0, 700.0, 800.0];
        let fluxes = [1e-6, 1.2e-6, 0.9e-6, 1.1e-6, 1e-6];
        let grid = WavelengthGrid::linspace(400.0, 800.0, 41).unwrap();
        let base = responsivity_from_amplitudes(&lambdas, &amps, &fluxes, &grid).unwrap();
        let scaled: Vec<f64> = amps.iter().map(|a| a * k).collect();
        let other = responsivity_from_amplitudes(&lambdas, &scaled, &fluxes, &grid).unwrap();
        for (x, y) in base.values().iter().zip(other.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn e_per_dc_is_homogeneous_in_exposure(t_obs in 1e-4f64..1.0, r in prop::collection::vec(0.01f64..1.0, 4)) {
        let mut r = r;
        r[3] = 1.0;
        let one = sensor(t_obs, 0.008, 1e-3, 2.0, 4);
        let two = sensor(2.0 * t_obs, 0.008, 1e-3, 2.0, 4);
        let refs = ReferenceParams::uniform(one.grid(), 2e-6, 0.01, 2.0).unwrap();
        let e1 = irradiance_per_count(&curve(&one, r.clone()), &refs, &one, false).unwrap();
        let e2 = irradiance_per_count(&curve(&two, r), &refs, &two, false).unwrap();
        for (a, b) in e1.values().iter().zip(e2.values()) {
            prop_assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn e_per_dc_decreases_with_responsivity(r in 0.01f64..0.9, bump in 1e-6f64..0.09) {
        let s = sensor(0.005, 0.008, 1e-3, 2.0, 2);
        let refs = ReferenceParams::uniform(s.grid(), 2e-6, 0.01, 2.0).unwrap();
        let lo = irradiance_per_count(&curve(&s, vec![r, 1.0]), &refs, &s, false).unwrap();
        let hi = irradiance_per_count(&curve(&s, vec![r + bump, 1.0]), &refs, &s, false).unwrap();
        prop_assert!(hi.values()[0] < lo.values()[0]);
    }
}
