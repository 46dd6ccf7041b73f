use std::path::PathBuf;

/// Every failure the toolkit can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // spectral types and operations
    #[error("invalid wavelength grid: {0}")]
    InvalidGrid(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid cube: {0}")]
    InvalidCube(String),
    #[error("invalid sensor model: {0}")]
    InvalidSensor(String),
    #[error("target wavelength {target_nm} nm lies outside source range [{lo_nm}, {hi_nm}] nm")]
    TargetOutOfRange { target_nm: f64, lo_nm: f64, hi_nm: f64 },
    #[error("wavelength grids differ")]
    GridMismatch,
    #[error("unit mismatch: expected {expected}, found {found}")]
    UnitMismatch { expected: String, found: String },
    #[error("zero-norm spectrum")]
    ZeroVector,
    #[error("bad smoothing width {width} for spectrum of length {len}")]
    BadWidth { width: usize, len: usize },
    #[error("region of interest has no usable pixels")]
    EmptyRoi,
    #[error("region of interest exceeds cube bounds ({rows}x{cols})")]
    OutOfBounds { rows: usize, cols: usize },

    // calibration
    #[error("no peak above noise floor (peak {peak}, noise floor {floor})")]
    NoPeak { peak: f64, floor: f64 },
    #[error("gaussian fit did not converge within {iterations} iterations")]
    FitDiverged { iterations: usize },
    #[error("profile saturated at band {band}")]
    SaturatedProfile { band: usize },
    #[error("need at least {needed} monochromator steps, got {got}")]
    InsufficientSteps { needed: usize, got: usize },
    #[error("non-positive responsivity at {wavelength_nm} nm")]
    ZeroResponsivity { wavelength_nm: f64 },
    #[error("invalid monochromator step: {0}")]
    InvalidStep(String),

    // field conversion
    #[error("no irradiance-per-count calibration configured")]
    MissingCalibration,
    #[error("non-positive downwelling irradiance at {wavelength_nm} nm")]
    ZeroIrradiance { wavelength_nm: f64 },
    #[error("timestamp {t} s is more than {window} s outside the irradiance log [{first}, {last}]")]
    OutOfWindow { t: f64, first: f64, last: f64, window: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // simulation
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    // file formats
    #[error("not an ENVI header (missing `ENVI` magic)")]
    BadMagic,
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("malformed list for key `{key}`: {reason}")]
    MalformedList { key: String, reason: String },
    #[error("payload size mismatch: expected {expected} bytes, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("unsupported ENVI data type {0}")]
    UnsupportedDataType(u32),
    #[error("line {line}: wavelength not strictly increasing")]
    NonMonotoneWavelength { line: usize },
    #[error("line {line}: timestamp not strictly increasing")]
    NonMonotoneTime { line: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing metadata key `{0}`")]
    MissingMetadataKey(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by malformed or inconsistent inputs rather than
    /// by a numerical procedure failing on well-formed data.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::NoPeak { .. }
                | Error::FitDiverged { .. }
                | Error::SaturatedProfile { .. }
                | Error::ZeroResponsivity { .. }
                | Error::ZeroIrradiance { .. }
                | Error::ZeroVector
                | Error::EmptyRoi
                | Error::DomainError(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
