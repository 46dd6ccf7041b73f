//! Desk-scale Lambertian scene simulator.
//!
//! Renders radiance cubes from per-pixel material reflectances under a
//! downwelling spectrum and converts them to raw counts through the inverse
//! of the radiance calibration. Seeded photon noise is drawn from a
//! per-pixel stream, so output is bit-identical regardless of threading.

pub mod fixtures;
mod poisson;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::radcal::CalibrationConfig;
use crate::spectral::{ensure_unit, HyperCube, Spectrum, Unit, PHYSICAL};
use crate::Scalar;

pub use poisson::{sample_poisson, NORMAL_APPROX_ABOVE};

/// Upper bound accepted for material reflectance.
pub const MATERIAL_REFLECTANCE_MAX: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Material<T> {
    pub name: String,
    pub reflectance: Spectrum<T>,
}

impl<T: Scalar> Material<T> {
    pub fn new(name: impl Into<String>, reflectance: Spectrum<T>) -> Result<Self> {
        let name = name.into();
        if reflectance.unit() != Unit::Reflectance {
            return Err(Error::InvalidScene(format!("material `{name}` is not a reflectance")));
        }
        reflectance
            .check_reflectance_range(T::lit(MATERIAL_REFLECTANCE_MAX))
            .map_err(|e| Error::InvalidScene(format!("material `{name}`: {e}")))?;
        Ok(Self { name, reflectance })
    }
}

/// Material assignment for every pixel of a flat scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec<T> {
    rows: usize,
    cols: usize,
    material_map: Vec<usize>,
    materials: Vec<Material<T>>,
    incidence_cos: Vec<T>,
}

impl<T: Scalar> SceneSpec<T> {
    /// All pixels face the illumination (cos θ = 1).
    pub fn new(rows: usize, cols: usize, material_map: Vec<usize>, materials: Vec<Material<T>>) -> Result<Self> {
        let n = rows * cols;
        Self::with_incidence(rows, cols, material_map, materials, vec![T::one(); n])
    }

    pub fn with_incidence(
        rows: usize,
        cols: usize,
        material_map: Vec<usize>,
        materials: Vec<Material<T>>,
        incidence_cos: Vec<T>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidScene("dimensions must be positive".into()));
        }
        if material_map.len() != rows * cols || incidence_cos.len() != rows * cols {
            return Err(Error::InvalidScene(format!("per-pixel arrays must have {} entries", rows * cols)));
        }
        if materials.is_empty() {
            return Err(Error::InvalidScene("no materials".into()));
        }
        if let Some(&bad) = material_map.iter().find(|&&i| i >= materials.len()) {
            return Err(Error::InvalidScene(format!("material index {bad} out of range")));
        }
        if incidence_cos.iter().any(|&c| !(c >= T::zero() && c <= T::one())) {
            return Err(Error::InvalidScene("incidence cosines must lie in [0, 1]".into()));
        }
        let grid = materials[0].reflectance.grid();
        for m in &materials[1..] {
            m.reflectance.grid().ensure_same(grid)?;
        }
        Ok(Self { rows, cols, material_map, materials, incidence_cos })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn materials(&self) -> &[Material<T>] {
        &self.materials
    }

    pub fn material_at(&self, r: usize, c: usize) -> usize {
        self.material_map[r * self.cols + c]
    }

    pub fn material_map(&self) -> &[usize] {
        &self.material_map
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationScenario<T> {
    pub name: String,
    pub downwelling: Spectrum<T>,
}

impl<T: Scalar> IlluminationScenario<T> {
    pub fn new(name: impl Into<String>, downwelling: Spectrum<T>) -> Result<Self> {
        ensure_unit(Unit::Irradiance, downwelling.unit())?;
        if downwelling.values().iter().any(|&e| e < T::zero()) {
            return Err(Error::InvalidScene("downwelling irradiance must be non-negative".into()));
        }
        Ok(Self { name: name.into(), downwelling })
    }
}

/// Photon-noise and quantization settings for count synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel<T> {
    pub enable_poisson: bool,
    pub seed: u64,
    /// Quantum efficiency per band on the sensor grid, η in (0, 1].
    pub quantum_efficiency: Option<Spectrum<T>>,
    /// Conversion gain: photo-electrons per digital count. Sets the Poisson
    /// mean as `counts · electrons_per_dc`.
    pub electrons_per_dc: T,
    /// Round counts half-to-even; when false counts stay real-valued.
    pub quantize: bool,
}

impl<T: Scalar> NoiseModel<T> {
    /// No noise, 12-bit style integer quantization.
    pub fn noiseless() -> Self {
        Self { enable_poisson: false, seed: 0, quantum_efficiency: None, electrons_per_dc: T::one(), quantize: true }
    }

    /// No noise and no quantization: counts carry the exact inverse of the
    /// radiance calibration.
    pub fn ideal() -> Self {
        Self { quantize: false, ..Self::noiseless() }
    }

    pub fn poisson(seed: u64, electrons_per_dc: T) -> Self {
        Self { enable_poisson: true, seed, electrons_per_dc, ..Self::noiseless() }
    }

    pub fn with_quantum_efficiency(mut self, qe: Spectrum<T>) -> Result<Self> {
        if qe.values().iter().any(|&v| !(v > T::zero() && v <= T::one())) {
            return Err(Error::DomainError("quantum efficiency must lie in (0, 1]".into()));
        }
        self.quantum_efficiency = Some(qe);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.enable_poisson && !(self.electrons_per_dc > T::zero()) {
            return Err(Error::DomainError("electrons_per_dc must be positive".into()));
        }
        Ok(())
    }

    /// Mean photo-electrons from flux `flux_w` over `t_s` at band `band`,
    /// using the configured quantum efficiency (1 when unset).
    pub fn mean_electrons(&self, flux_w: T, t_s: T, band: usize) -> Result<T> {
        let Some(qe) = &self.quantum_efficiency else {
            return Err(Error::DomainError("no quantum efficiency configured".into()));
        };
        let lambda = *qe
            .grid()
            .as_slice()
            .get(band)
            .ok_or_else(|| Error::DomainError(format!("band {band} out of range")))?;
        photon_electrons(flux_w, t_s, lambda, qe.values()[band])
    }
}

/// Photo-electrons generated by radiant flux `flux_w` over `t_s` seconds at
/// wavelength `lambda_nm`: `S_e = φ · t · λ / (h c) · η`.
pub fn photon_electrons<T: Scalar>(flux_w: T, t_s: T, lambda_nm: T, eta: T) -> Result<T> {
    for (name, v) in [("flux", flux_w), ("time", t_s), ("wavelength", lambda_nm), ("quantum efficiency", eta)] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::DomainError(format!("{name} must be positive, got {v}")));
        }
    }
    if eta > T::one() {
        return Err(Error::DomainError(format!("quantum efficiency {eta} exceeds 1")));
    }
    let lambda_m = lambda_nm * T::lit(1e-9);
    let hc = T::lit(PHYSICAL.h) * T::lit(PHYSICAL.c);
    Ok(flux_w * t_s * lambda_m / hc * eta)
}

/// Lambertian radiance `L = E · ρ · cos θ / π` for every pixel.
pub fn simulate_radiance<T: Scalar>(scene: &SceneSpec<T>, illum: &IlluminationScenario<T>) -> Result<HyperCube<T>> {
    let grid = illum.downwelling.grid();
    scene.materials[0].reflectance.grid().ensure_same(grid)?;
    let e = illum.downwelling.values();
    let bands = grid.len();
    let pi = T::PI();
    let mut data = vec![T::zero(); scene.rows * scene.cols * bands];
    data.par_chunks_mut(bands).enumerate().for_each(|(i, out)| {
        let rho = scene.materials[scene.material_map[i]].reflectance.values();
        let cos = scene.incidence_cos[i];
        for b in 0..bands {
            out[b] = e[b] * rho[b] * cos / pi;
        }
    });
    HyperCube::new(scene.rows, scene.cols, grid.clone(), Unit::Radiance, data)
}

/// Raw counts from radiance: `DC = round(L·π/(E/DC)) + dark`, clipped to
/// `[0, max_dc]`. With Poisson noise the pre-round signal is replaced by
/// a draw with mean `signal · electrons_per_dc`, scaled back to counts.
pub fn radiance_to_dc<T: Scalar>(
    cube: &HyperCube<T>,
    cfg: &CalibrationConfig<T>,
    noise: &NoiseModel<T>,
) -> Result<HyperCube<T>> {
    radiance_to_dc_stream(cube, cfg, noise, 0)
}

fn radiance_to_dc_stream<T: Scalar>(
    cube: &HyperCube<T>,
    cfg: &CalibrationConfig<T>,
    noise: &NoiseModel<T>,
    stream_base: u64,
) -> Result<HyperCube<T>> {
    ensure_unit(Unit::Radiance, cube.unit())?;
    noise.validate()?;
    let e = cfg.e_per_dc()?;
    cube.grid().ensure_same(e.grid())?;
    let e = e.values();
    let dark = cfg.sensor.dark_frame().values();
    let max_dc = cfg.sensor.max_dc();
    let gain = noise.electrons_per_dc.as_f64();
    let bands = cube.bands();
    let pi = T::PI();

    let mut data = vec![T::zero(); cube.data().len()];
    data.par_chunks_mut(bands)
        .zip(cube.data().par_chunks(bands))
        .enumerate()
        .for_each(|(i, (out, px))| {
            let mut rng = noise.enable_poisson.then(|| poisson::pixel_rng(noise.seed, stream_base + i as u64));
            for b in 0..bands {
                let mut signal = px[b] * pi / e[b];
                if let Some(rng) = rng.as_mut() {
                    let electrons = sample_poisson(signal.as_f64() * gain, rng);
                    signal = T::lit(electrons / gain);
                }
                let mut dc = signal + dark[b];
                if noise.quantize {
                    dc = dc.round_half_even();
                }
                out[b] = dc.max(T::zero()).min(max_dc);
            }
        });
    let out = HyperCube::new(cube.rows(), cube.cols(), cube.grid().clone(), Unit::DigitalCount, data)?;
    Ok(out.with_interleave(cube.interleave()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedScenario<T> {
    pub name: String,
    pub radiance: HyperCube<T>,
    pub dc: Option<HyperCube<T>>,
}

/// Renders `scene` under each scenario. When `counts` is given, each radiance
/// cube is also converted to raw counts; every scenario draws noise from its
/// own block of pixel streams.
pub fn render_scenarios<T: Scalar>(
    scene: &SceneSpec<T>,
    scenarios: &[IlluminationScenario<T>],
    counts: Option<(&CalibrationConfig<T>, &NoiseModel<T>)>,
) -> Result<Vec<RenderedScenario<T>>> {
    let pixels = (scene.rows * scene.cols) as u64;
    scenarios
        .iter()
        .enumerate()
        .map(|(k, sc)| {
            let radiance = simulate_radiance(scene, sc)?;
            let dc = match counts {
                Some((cfg, noise)) => Some(radiance_to_dc_stream(&radiance, cfg, noise, k as u64 * pixels)?),
                None => None,
            };
            Ok(RenderedScenario { name: sc.name.clone(), radiance, dc })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{SensorModel, WavelengthGrid};

    fn grid() -> WavelengthGrid<f64> {
        WavelengthGrid::new(vec![500.0, 600.0, 700.0]).unwrap()
    }

    fn scene(rho: f64) -> SceneSpec<f64> {
        let m = Material::new("m", Spectrum::constant(grid(), rho, Unit::Reflectance).unwrap()).unwrap();
        SceneSpec::new(2, 2, vec![0; 4], vec![m]).unwrap()
    }

    fn flat(e: f64) -> IlluminationScenario<f64> {
        IlluminationScenario::new("flat", Spectrum::constant(grid(), e, Unit::Irradiance).unwrap()).unwrap()
    }

    fn cfg(dark: f64) -> CalibrationConfig<f64> {
        let g = grid();
        let sensor = SensorModel::new(
            g.clone(),
            vec![2.0; 3],
            12,
            0.005,
            1e-3,
            0.008,
            Spectrum::constant(g.clone(), dark, Unit::DigitalCount).unwrap(),
        )
        .unwrap();
        CalibrationConfig::new(sensor).with_e_per_dc(Spectrum::constant(g, 1e-3, Unit::Irradiance).unwrap()).unwrap()
    }

    #[test]
    fn lambertian_radiance() {
        let l = simulate_radiance(&scene(1.0), &flat(2.0)).unwrap();
        assert!(l.data().iter().all(|&v| v == 2.0 / std::f64::consts::PI));
        let l = simulate_radiance(&scene(0.0), &flat(2.0)).unwrap();
        assert!(l.data().iter().all(|&v| v == 0.0));
        let l = simulate_radiance(&scene(0.5), &flat(std::f64::consts::PI)).unwrap();
        assert!(l.data().iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn dark_floor_and_clip() {
        let zero = simulate_radiance(&scene(0.0), &flat(1.0)).unwrap();
        let dc = radiance_to_dc(&zero, &cfg(100.0), &NoiseModel::noiseless()).unwrap();
        assert!(dc.data().iter().all(|&v| v == 100.0));
        let hot = simulate_radiance(&scene(1.0), &flat(100.0)).unwrap();
        let dc = radiance_to_dc(&hot, &cfg(100.0), &NoiseModel::noiseless()).unwrap();
        assert!(dc.data().iter().all(|&v| v == 4095.0));
    }

    #[test]
    fn photon_counting() {
        let (h, c) = (PHYSICAL.h, PHYSICAL.c);
        let lambda_nm = 550.0;
        let one_photon = h * c / (lambda_nm * 1e-9);
        let s = photon_electrons(one_photon, 1.0, lambda_nm, 1.0).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        let half = photon_electrons(one_photon, 1.0, lambda_nm, 0.5).unwrap();
        assert!((half - 0.5).abs() < 1e-12);
        assert!(photon_electrons(0.0, 1.0, 500.0, 0.5).is_err());
        assert!(photon_electrons(1.0, 1.0, 500.0, 1.5).is_err());
    }

    #[test]
    fn empty_scenario_list() {
        assert!(render_scenarios(&scene(0.5), &[], None).unwrap().is_empty());
    }

    #[test]
    fn scene_validation() {
        let m = Material::new("m", Spectrum::constant(grid(), 0.5, Unit::Reflectance).unwrap()).unwrap();
        assert!(SceneSpec::new(2, 2, vec![0, 0, 0, 1], vec![m.clone()]).is_err());
        assert!(SceneSpec::new(2, 2, vec![0; 3], vec![m]).is_err());
        assert!(Material::new("hot", Spectrum::constant(grid(), 1.6, Unit::Reflectance).unwrap()).is_err());
    }
}
