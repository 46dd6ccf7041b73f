//! Subcommand bodies. Every input path is checked before any computation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use hypercal::calibration::{build_responsivity, irradiance_per_count, ReferenceParams};
use hypercal::io::{
    cube_paths, export_library, format_irradiance_log, format_mask, load_cube, load_scene, load_sweep,
    parse_signature_record, parse_spectrum_file, read_irradiance_log, read_mask, read_roi_file, read_spectrum_file,
    save_cube, write_spectrum_file, SpectrumFile,
};
use hypercal::quality::score_roi;
use hypercal::radcal::{dc_to_reflectance, extract_signature, match_irradiance, CalibrationConfig};
use hypercal::sim::{fixtures, render_scenarios, IlluminationScenario, NoiseModel, SceneSpec};
use hypercal::spectral::{resample, rmse, spectral_angle, HyperCube, IrradianceSeries, PixelMask, Spectrum, Unit, WavelengthGrid};
use hypercal::{Error, Result};
use serde::Serialize;

use crate::config::RunConfig;
use crate::Command;

/// File echoing the effective configuration of the last run.
pub const CONFIG_ECHO: &str = "run_config.toml";

#[derive(Serialize)]
struct Echo<'a> {
    command: &'a Command,
    config: &'a RunConfig,
}

pub fn run(cmd: &Command, config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    check_inputs(cmd, &cfg)?;
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let echo = toml::to_string(&Echo { command: cmd, config: &cfg })
        .map_err(|e| Error::InvalidConfig(format!("cannot echo configuration: {e}")))?;
    write(&out.join(CONFIG_ECHO), &echo)?;

    match cmd {
        Command::Calibrate { sweep } => calibrate(&cfg, sweep, out),
        Command::Convert { cube, calibration, irradiance, timestamp } => {
            convert(&cfg, cube, calibration, irradiance, *timestamp, out)
        }
        Command::Roi { cube, rois, irradiance, timestamp, calibration } => {
            roi(&cfg, cube, rois, irradiance, *timestamp, calibration.as_deref(), out)
        }
        Command::Extract { cube, rois, mask, meta, timestamp } => {
            extract(&cfg, cube, rois, mask.as_deref(), meta, *timestamp, out)
        }
        Command::Simulate { scene, scenarios, calibration, poisson } => {
            simulate(&cfg, scene.as_deref(), scenarios, calibration.as_deref(), *poisson, out)
        }
        Command::Compare { a, b } => compare(a, b, out),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(io_err(path, std::io::Error::new(std::io::ErrorKind::NotFound, "input not found")))
    }
}

fn require_cube(path: &Path) -> Result<()> {
    let (hdr, img) = cube_paths(path);
    require(&hdr)?;
    require(&img)
}

fn check_inputs(cmd: &Command, cfg: &RunConfig) -> Result<()> {
    if let Some(dark) = &cfg.sensor.dark_frame {
        require(dark)?;
    }
    match cmd {
        Command::Calibrate { sweep } => require(sweep),
        Command::Convert { cube, calibration, irradiance, .. } => {
            require_cube(cube)?;
            require(calibration)?;
            require(irradiance)
        }
        Command::Roi { cube, rois, irradiance, calibration, .. } => {
            require_cube(cube)?;
            require(rois)?;
            require(irradiance)?;
            calibration.as_deref().map_or(Ok(()), require)
        }
        Command::Extract { cube, rois, mask, .. } => {
            require_cube(cube)?;
            require(rois)?;
            mask.as_deref().map_or(Ok(()), require)
        }
        Command::Simulate { scene, calibration, .. } => {
            scene.as_deref().map_or(Ok(()), require)?;
            calibration.as_deref().map_or(Ok(()), require)
        }
        Command::Compare { a, b } => {
            require(a)?;
            require(b)
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Onto `grid`, interpolating only when the grids differ.
fn onto_grid(s: Spectrum<f64>, grid: &WavelengthGrid<f64>) -> Result<Spectrum<f64>> {
    if s.grid().as_slice() == grid.as_slice() {
        let unit = s.unit();
        Spectrum::new(grid.clone(), s.into_values(), unit)
    } else {
        resample(&s, grid)
    }
}

fn calibrated(cfg: &RunConfig, e_per_dc: &Path) -> Result<CalibrationConfig<f64>> {
    let base = cfg.calibration()?;
    let e = read_spectrum_file::<f64>(e_per_dc)?.spectrum;
    if e.unit() != Unit::Irradiance {
        return Err(Error::UnitMismatch { expected: Unit::Irradiance.to_string(), found: e.unit().to_string() });
    }
    base.with_e_per_dc(e)
}

fn downwelling(cfg: &RunConfig, log: &Path, t: f64, grid: &WavelengthGrid<f64>) -> Result<Spectrum<f64>> {
    let series: IrradianceSeries<f64> = read_irradiance_log(log)?;
    onto_grid(match_irradiance(&series, t, cfg.calibration.match_window_s)?, grid)
}

fn calibrate(cfg: &RunConfig, sweep: &Path, out: &Path) -> Result<()> {
    let sensor = cfg.sensor()?;
    let steps = load_sweep::<f64>(sweep)?;
    let curve = build_responsivity(&steps, &sensor)?;
    let refs = ReferenceParams::from_steps(&steps, sensor.grid())?;
    let e = irradiance_per_count(&curve, &refs, &sensor, cfg.calibration.exposure_ratio_inverted)?;

    write_spectrum_file(&out.join("responsivity.txt"), &SpectrumFile::new(curve.relative.clone()))?;
    write_spectrum_file(&out.join("e_per_dc.txt"), &SpectrumFile::new(e))?;
    let mut report = String::from("lambda_nm center_band sigma_bands amplitude_dc baseline_dc residual_rms iterations\n");
    for (lambda, fit) in &curve.fits {
        let _ = writeln!(
            report,
            "{} {} {} {} {} {} {}",
            num(*lambda),
            num(fit.center_band),
            num(fit.sigma_bands),
            num(fit.amplitude_dc),
            num(fit.baseline_dc),
            num(fit.residual_rms),
            fit.iterations
        );
    }
    write(&out.join("fit_report.txt"), &report)?;
    let peak = curve.relative.values().iter().position(|&v| v == 1.0).unwrap_or(0);
    println!("calibrated {} steps; responsivity peaks at {} nm", steps.len(), curve.relative.grid().as_slice()[peak]);
    Ok(())
}

fn convert(cfg: &RunConfig, cube: &Path, calibration: &Path, irradiance: &Path, t: f64, out: &Path) -> Result<()> {
    let calcfg = calibrated(cfg, calibration)?;
    let raw = load_cube::<f64>(cube)?;
    if raw.unit() != Unit::DigitalCount {
        return Err(Error::UnitMismatch { expected: Unit::DigitalCount.to_string(), found: raw.unit().to_string() });
    }
    raw.grid().ensure_same(calcfg.sensor.grid())?;
    let down = downwelling(cfg, irradiance, t, raw.grid())?;
    let refl = dc_to_reflectance(&raw, &down, &calcfg)?;
    save_cube(&out.join("reflectance"), &refl, None)?;
    write_spectrum_file(&out.join("downwelling.txt"), &SpectrumFile::new(down).with_timestamp(t))?;
    println!("reflectance cube {}x{}x{} written", refl.rows(), refl.cols(), refl.bands());
    Ok(())
}

fn roi(
    cfg: &RunConfig,
    cube: &Path,
    rois: &Path,
    irradiance: &Path,
    t: f64,
    calibration: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let cube = load_cube::<f64>(cube)?;
    let calcfg = match (cube.unit(), calibration) {
        (Unit::DigitalCount, None) => return Err(Error::MissingCalibration),
        (_, Some(path)) => calibrated(cfg, path)?,
        (_, None) => cfg.calibration()?,
    };
    let rois = read_roi_file(rois)?;
    let down = downwelling(cfg, irradiance, t, cube.grid())?;
    let thresholds = cfg.quality.thresholds();

    let mut mask = PixelMask::all(cube.rows(), cube.cols());
    let mut table = String::from("name total kept kept_fraction saturated glint shadow adjacency\n");
    let mut notes = String::new();
    for named in &rois {
        let report = score_roi(&cube, &named.roi, &down, &calcfg, &thresholds)?;
        for ((r, c), flags) in &report.pixels {
            if flags.any() {
                mask.set(*r, *c, false);
            }
        }
        let s = report.summary();
        let _ = writeln!(
            table,
            "{} {} {} {} {} {} {} {}",
            named.name,
            s.total,
            s.kept,
            num(report.kept_fraction),
            s.saturated,
            s.glint,
            s.shadow,
            s.adjacency
        );
        for note in &report.notes {
            let _ = writeln!(notes, "# {}: {}", named.name, note);
        }
    }
    table.push_str(&notes);
    write(&out.join("roi_report.txt"), &table)?;
    write(&out.join("mask.txt"), &format_mask(&mask))?;
    print!("{table}");
    Ok(())
}

fn parse_meta(items: &[String]) -> Result<BTreeMap<String, String>> {
    let mut meta = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("metadata `{item}` is not key=value")))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "name" {
            return Err(Error::InvalidConfig("record names come from the ROI file".into()));
        }
        meta.insert(k.to_string(), v.to_string());
    }
    Ok(meta)
}

fn extract(
    cfg: &RunConfig,
    cube: &Path,
    rois: &Path,
    mask: Option<&Path>,
    meta: &[String],
    t: f64,
    out: &Path,
) -> Result<()> {
    let meta = parse_meta(meta)?;
    let cube = load_cube::<f64>(cube)?;
    let rois = read_roi_file(rois)?;
    let mask = mask.map(read_mask).transpose()?;
    let calcfg = cfg.calibration()?;
    let mut records = Vec::with_capacity(rois.len());
    for named in &rois {
        let mut metadata = meta.clone();
        metadata.insert("name".into(), named.name.clone());
        records.push(extract_signature(&cube, &named.roi, mask.as_ref(), metadata, &calcfg, t, None)?);
    }
    let paths = export_library(&out.join("library"), &records)?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

/// The 14 paints in equal contiguous blocks over a `size × size` scene.
fn builtin_scene(grid: &WavelengthGrid<f64>, size: usize) -> Result<SceneSpec<f64>> {
    let paints = fixtures::paint_library(grid)?;
    let n = size * size;
    let map = (0..n).map(|i| i * paints.len() / n.max(1)).collect();
    SceneSpec::new(size, size, map, paints)
}

fn builtin_scenario(name: &str, grid: &WavelengthGrid<f64>) -> Result<IlluminationScenario<f64>> {
    match name {
        "noon" => fixtures::noon(grid),
        "cloudy" => fixtures::cloudy(grid),
        "sunset" => fixtures::sunset(grid),
        other => Err(Error::InvalidConfig(format!("unknown scenario `{other}` (expected noon, cloudy or sunset)"))),
    }
}

fn save(out: &Path, stem: String, cube: &HyperCube<f64>, bits: u8) -> Result<()> {
    save_cube(&out.join(stem), cube, Some(bits)).map(|_| ())
}

fn simulate(
    cfg: &RunConfig,
    scene: Option<&Path>,
    scenarios: &[String],
    calibration: Option<&Path>,
    poisson: bool,
    out: &Path,
) -> Result<()> {
    let sensor = cfg.sensor()?;
    let grid = sensor.grid().clone();
    let scene = match scene {
        Some(path) => load_scene(path, &grid)?,
        None => builtin_scene(&grid, cfg.simulate.scene_size)?,
    };
    let scenarios = scenarios.iter().map(|s| builtin_scenario(s.trim(), &grid)).collect::<Result<Vec<_>>>()?;
    let calcfg = calibration.map(|p| calibrated(cfg, p)).transpose()?;
    let mut noise = if poisson {
        NoiseModel::poisson(cfg.seed, cfg.simulate.electrons_per_dc)
    } else {
        NoiseModel::noiseless()
    };
    noise.quantize = cfg.simulate.quantize;
    let rendered = render_scenarios(&scene, &scenarios, calcfg.as_ref().map(|c| (c, &noise)))?;

    let bits = sensor.bit_depth();
    let mut table = String::from("wavelength_nm");
    for (sc, r) in scenarios.iter().zip(&rendered) {
        save(out, format!("{}_radiance", r.name), &r.radiance, bits)?;
        if let Some(dc) = &r.dc {
            save(out, format!("{}_dc", r.name), dc, bits)?;
        }
        let series = IrradianceSeries::new(vec![(0.0, sc.downwelling.clone())])?;
        write(&out.join(format!("{}_irradiance.txt", r.name)), &format_irradiance_log(&series))?;
        let _ = write!(table, " {}", r.name);
    }
    table.push('\n');
    for (b, w) in grid.as_slice().iter().enumerate() {
        table.push_str(&num(*w));
        for sc in &scenarios {
            let _ = write!(table, " {}", num(sc.downwelling.values()[b]));
        }
        table.push('\n');
    }
    write(&out.join("downwelling.txt"), &table)?;
    println!("rendered {} scenario(s) over a {}x{} scene", rendered.len(), scene.rows(), scene.cols());
    Ok(())
}

/// A signature record's reflectance, or the spectrum of a plain spectrum file.
fn load_curve(path: &Path) -> Result<Spectrum<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    match parse_signature_record::<f64>(&text) {
        Ok(record) => Ok(record.reflectance),
        Err(_) => parse_spectrum_file::<f64>(&text).map(|f| f.spectrum),
    }
}

/// Both curves on a common grid: unchanged when the grids agree, otherwise
/// `a`'s bands inside the overlap of the two ranges.
pub fn common_grid(a: Spectrum<f64>, b: Spectrum<f64>) -> Result<(Spectrum<f64>, Spectrum<f64>, bool)> {
    if a.grid().as_slice() == b.grid().as_slice() {
        return Ok((a, b, false));
    }
    let lo = a.grid().first().max(b.grid().first());
    let hi = a.grid().last().min(b.grid().last());
    let disjoint = || Error::TargetOutOfRange { target_nm: lo, lo_nm: b.grid().first(), hi_nm: b.grid().last() };
    if lo > hi {
        return Err(disjoint());
    }
    let grid = a.grid().restrict(lo, hi).map_err(|_| disjoint())?;
    Ok((onto_grid(a.clone(), &grid)?, resample(&b, &grid)?, true))
}

fn compare(a: &Path, b: &Path, out: &Path) -> Result<()> {
    let (sa, sb, resampled) = common_grid(load_curve(a)?, load_curve(b)?)?;
    if resampled {
        eprintln!(
            "warning: grids differ; comparing on {} bands over {}-{} nm",
            sa.len(),
            sa.grid().first(),
            sa.grid().last()
        );
    }
    let angle = spectral_angle(&sa, &sb)?;
    let err = rmse(&sa, &sb)?;
    let mut text = format!("# spectral_angle_rad: {}\n# rmse: {}\n", num(angle), num(err));
    text.push_str("wavelength_nm a b difference\n");
    for ((w, x), y) in sa.grid().as_slice().iter().zip(sa.values()).zip(sb.values()) {
        let _ = writeln!(text, "{} {} {} {}", num(*w), num(*x), num(*y), num(x - y));
    }
    write(&out.join("compare.txt"), &text)?;
    println!("spectral_angle_rad {}\nrmse {}", num(angle), num(err));
    Ok(())
}

