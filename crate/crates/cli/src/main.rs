//! `hypercal`: batch front end for calibration, conversion, screening,
//! signature extraction, simulation and comparison.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "hypercal", version, about = "Hyperspectral radiometric calibration toolkit")]
struct Cli {
    /// TOML file of defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every random draw; overrides the config file.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to one per core. Never changes results.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Fit a monochromator sweep: responsivity and irradiance per count.
    Calibrate {
        /// Sweep manifest.
        #[arg(long)]
        sweep: PathBuf,
    },
    /// Convert a raw count cube to reflectance.
    Convert {
        /// Raw count cube (`.hdr`).
        #[arg(long)]
        cube: PathBuf,
        /// Irradiance-per-count spectrum written by `calibrate`.
        #[arg(long)]
        calibration: PathBuf,
        /// Irradiance log: multi-column file or directory of spectra.
        #[arg(long)]
        irradiance: PathBuf,
        /// Acquisition time, seconds on the log's clock.
        #[arg(long)]
        timestamp: f64,
    },
    /// Screen ROIs for saturation, glint, shadow and adjacency.
    Roi {
        /// Count or radiance cube.
        #[arg(long)]
        cube: PathBuf,
        #[arg(long)]
        rois: PathBuf,
        #[arg(long)]
        irradiance: PathBuf,
        #[arg(long)]
        timestamp: f64,
        /// Needed for count cubes.
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Extract ROI mean reflectance signatures into a library.
    Extract {
        /// Reflectance cube.
        #[arg(long)]
        cube: PathBuf,
        #[arg(long)]
        rois: PathBuf,
        /// Pixel mask written by `roi`.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Extra metadata, `key=value`; repeatable.
        #[arg(long = "meta", value_name = "KEY=VALUE")]
        meta: Vec<String>,
        #[arg(long, default_value_t = 0.0)]
        timestamp: f64,
    },
    /// Render a scene under illumination scenarios.
    Simulate {
        /// Scene file; the built-in 14-paint scene when omitted.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Built-in scenarios: noon, cloudy, sunset.
        #[arg(long, value_delimiter = ',', default_value = "noon,cloudy,sunset")]
        scenarios: Vec<String>,
        /// Also synthesize raw counts with this irradiance-per-count spectrum.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Add seeded photon shot noise to the counts.
        #[arg(long)]
        poisson: bool,
    },
    /// Compare two spectra or signature records.
    Compare { a: PathBuf, b: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.command, cli.config.as_deref(), cli.seed, &cli.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
