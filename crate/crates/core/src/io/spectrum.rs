//! Two-column spectrum text files and irradiance logs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{IrradianceSeries, Spectrum, Unit, WavelengthGrid};
use crate::Scalar;

pub const UNIT_KEY: &str = "unit";
pub const TIMESTAMP_KEY: &str = "timestamp";

/// A spectrum plus the `# key: value` block that precedes its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFile<T> {
    pub spectrum: Spectrum<T>,
    pub timestamp_s: Option<f64>,
    /// Remaining header keys such as `instrument`, kept verbatim.
    pub metadata: BTreeMap<String, String>,
}

impl<T: Scalar> SpectrumFile<T> {
    pub fn new(spectrum: Spectrum<T>) -> Self {
        Self { spectrum, timestamp_s: None, metadata: BTreeMap::new() }
    }

    pub fn with_timestamp(mut self, t: f64) -> Self {
        self.timestamp_s = Some(t);
        self
    }
}

/// Shortest decimal that reads back to the same value.
pub(crate) fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

pub(crate) fn parse_num(token: &str, line: usize) -> Result<f64> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("expected a finite number, got `{token}`")))
}

pub(crate) fn split_row(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty())
}

type Metadata = BTreeMap<String, String>;

/// Splits `text` into its metadata block and data rows (1-based line numbers).
pub(crate) fn split_header(text: &str) -> Result<(Metadata, Vec<(usize, &str)>)> {
    let mut meta = BTreeMap::new();
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once(':') {
                let k = k.trim();
                if k.is_empty() {
                    return Err(Error::parse(i + 1, "empty metadata key"));
                }
                if meta.insert(k.to_string(), v.trim().to_string()).is_some() {
                    return Err(Error::parse(i + 1, format!("duplicate metadata key `{k}`")));
                }
            }
            continue;
        }
        rows.push((i + 1, line));
    }
    Ok((meta, rows))
}

fn take_timestamp(meta: &mut BTreeMap<String, String>) -> Result<Option<f64>> {
    meta.remove(TIMESTAMP_KEY)
        .map(|v| parse_num(&v, 0).map_err(|_| Error::parse(0, format!("bad timestamp `{v}`"))))
        .transpose()
}

fn take_unit(meta: &mut BTreeMap<String, String>) -> Result<Unit> {
    let tag = meta.remove(UNIT_KEY).ok_or_else(|| Error::MissingMetadataKey(UNIT_KEY.into()))?;
    tag.parse().map_err(|m: String| Error::parse(0, m))
}

pub fn parse_spectrum_file<T: Scalar>(text: &str) -> Result<SpectrumFile<T>> {
    let (mut meta, rows) = split_header(text)?;
    let unit = take_unit(&mut meta)?;
    let timestamp_s = take_timestamp(&mut meta)?;
    if rows.is_empty() {
        return Err(Error::parse(text.lines().count(), "no data rows"));
    }
    let mut wavelengths: Vec<f64> = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for (no, line) in rows {
        let tokens: Vec<&str> = split_row(line).collect();
        if tokens.len() != 2 {
            return Err(Error::parse(no, format!("expected 2 columns, found {}", tokens.len())));
        }
        let w = parse_num(tokens[0], no)?;
        if w <= 0.0 {
            return Err(Error::parse(no, "wavelength must be positive"));
        }
        if wavelengths.last().is_some_and(|&prev| w <= prev) {
            return Err(Error::NonMonotoneWavelength { line: no });
        }
        wavelengths.push(w);
        values.push(T::lit(parse_num(tokens[1], no)?));
    }
    let grid = WavelengthGrid::new(wavelengths.into_iter().map(T::lit).collect())?;
    Ok(SpectrumFile { spectrum: Spectrum::new(grid, values, unit)?, timestamp_s, metadata: meta })
}

pub(crate) fn check_entry(k: &str, v: &str) -> Result<()> {
    let key_ok = !k.is_empty() && k.trim() == k && !k.contains([':', '\n', '\r']) && !k.starts_with('#');
    if !key_ok || v.trim() != v || v.contains(['\n', '\r']) {
        return Err(Error::InvalidConfig(format!("metadata entry `{k}` cannot be written losslessly")));
    }
    Ok(())
}

pub(crate) fn write_rows<T: Scalar>(out: &mut String, s: &Spectrum<T>) {
    for (w, v) in s.grid().as_slice().iter().zip(s.values()) {
        let _ = writeln!(out, "{} {}", fmt_num(w.as_f64()), fmt_num(v.as_f64()));
    }
}

pub fn format_spectrum_file<T: Scalar>(file: &SpectrumFile<T>) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# {UNIT_KEY}: {}", file.spectrum.unit());
    if let Some(t) = file.timestamp_s {
        let _ = writeln!(out, "# {TIMESTAMP_KEY}: {}", fmt_num(t));
    }
    for (k, v) in &file.metadata {
        if k == UNIT_KEY || k == TIMESTAMP_KEY {
            return Err(Error::InvalidConfig(format!("metadata key `{k}` is reserved")));
        }
        check_entry(k, v)?;
        let _ = writeln!(out, "# {k}: {v}");
    }
    write_rows(&mut out, &file.spectrum);
    Ok(out)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| Error::parse(0, format!("{}: not UTF-8 ({e})", path.display())))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_spectrum_file<T: Scalar>(path: &Path) -> Result<SpectrumFile<T>> {
    parse_spectrum_file(&read_text(path)?)
}

pub fn write_spectrum_file<T: Scalar>(path: &Path, file: &SpectrumFile<T>) -> Result<()> {
    write_text(path, &format_spectrum_file(file)?)
}

/// Header token that opens a multi-column irradiance log.
pub const LOG_TIME_COLUMN: &str = "timestamp_s";

/// Multi-column log: a `timestamp_s λ1 λ2 ...` row, then one `t E1 E2 ...`
/// row per sample.
pub fn parse_irradiance_log<T: Scalar>(text: &str) -> Result<IrradianceSeries<T>> {
    let (mut meta, rows) = split_header(text)?;
    if let Some(tag) = meta.remove(UNIT_KEY) {
        let unit: Unit = tag.parse().map_err(|m: String| Error::parse(0, m))?;
        if unit != Unit::Irradiance {
            return Err(Error::UnitMismatch { expected: Unit::Irradiance.to_string(), found: unit.to_string() });
        }
    }
    let mut rows = rows.into_iter();
    let (head_no, head) = rows.next().ok_or_else(|| Error::parse(0, "empty irradiance log"))?;
    let mut tokens = split_row(head);
    if tokens.next() != Some(LOG_TIME_COLUMN) {
        return Err(Error::parse(head_no, format!("header row must start with `{LOG_TIME_COLUMN}`")));
    }
    let mut wavelengths: Vec<f64> = Vec::new();
    for tok in tokens {
        let w = parse_num(tok, head_no)?;
        if w <= 0.0 {
            return Err(Error::parse(head_no, "wavelength must be positive"));
        }
        if wavelengths.last().is_some_and(|&prev| w <= prev) {
            return Err(Error::NonMonotoneWavelength { line: head_no });
        }
        wavelengths.push(w);
    }
    let grid = WavelengthGrid::new(wavelengths.iter().copied().map(T::lit).collect())
        .map_err(|_| Error::parse(head_no, "no wavelength columns"))?;
    let mut samples: Vec<(f64, Spectrum<T>)> = Vec::new();
    for (no, line) in rows {
        let tokens: Vec<&str> = split_row(line).collect();
        if tokens.len() != wavelengths.len() + 1 {
            return Err(Error::parse(no, format!("expected {} columns, found {}", wavelengths.len() + 1, tokens.len())));
        }
        let t = parse_num(tokens[0], no)?;
        if samples.last().is_some_and(|(prev, _)| t <= *prev) {
            return Err(Error::NonMonotoneTime { line: no });
        }
        let values = tokens[1..].iter().map(|tok| parse_num(tok, no).map(T::lit)).collect::<Result<Vec<_>>>()?;
        samples.push((t, Spectrum::new(grid.clone(), values, Unit::Irradiance)?));
    }
    if samples.is_empty() {
        return Err(Error::parse(head_no, "irradiance log has no samples"));
    }
    IrradianceSeries::new(samples)
}

pub fn format_irradiance_log<T: Scalar>(series: &IrradianceSeries<T>) -> String {
    let mut out = format!("# {UNIT_KEY}: {}\n{LOG_TIME_COLUMN}", Unit::Irradiance);
    if let Some((_, first)) = series.samples().first() {
        for w in first.grid().as_slice() {
            let _ = write!(out, " {}", fmt_num(w.as_f64()));
        }
    }
    out.push('\n');
    for (t, s) in series.samples() {
        out.push_str(&fmt_num(*t));
        for v in s.values() {
            let _ = write!(out, " {}", fmt_num(v.as_f64()));
        }
        out.push('\n');
    }
    out
}

/// Orders timestamped spectra into a series; equal timestamps are rejected,
/// reported by position in `files`.
pub fn series_from_files<T: Scalar>(files: Vec<SpectrumFile<T>>) -> Result<IrradianceSeries<T>> {
    let mut stamped = Vec::with_capacity(files.len());
    for (i, f) in files.into_iter().enumerate() {
        let t = f.timestamp_s.ok_or_else(|| Error::MissingMetadataKey(TIMESTAMP_KEY.into()))?;
        stamped.push((t, i, f.spectrum));
    }
    stamped.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in stamped.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::NonMonotoneTime { line: pair[1].1 + 1 });
        }
    }
    IrradianceSeries::new(stamped.into_iter().map(|(t, _, s)| (t, s)).collect())
}

/// Reads either a directory of timestamped spectrum files (visited in name
/// order) or a single multi-column log.
pub fn read_irradiance_log<T: Scalar>(path: &Path) -> Result<IrradianceSeries<T>> {
    if path.is_dir() {
        let mut entries: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        let files = entries.iter().map(|p| read_spectrum_file(p)).collect::<Result<Vec<_>>>()?;
        series_from_files(files)
    } else {
        parse_irradiance_log(&read_text(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_rows() {
        let f: SpectrumFile<f64> = parse_spectrum_file("# unit: reflectance\n400 0.1\n1000 0.9\n").unwrap();
        assert_eq!(f.spectrum.len(), 2);
        assert_eq!(f.spectrum.values(), &[0.1, 0.9]);
    }

    #[test]
    fn out_of_order_rows_name_the_line() {
        let text = "# unit: reflectance\n# instrument: SVC\n500 0.1\n600 0.2\n550 0.3\n";
        assert!(matches!(parse_spectrum_file::<f64>(text), Err(Error::NonMonotoneWavelength { line: 5 })));
        let dup = "# unit: reflectance\n500 0.1\n500 0.2\n";
        assert!(matches!(parse_spectrum_file::<f64>(dup), Err(Error::NonMonotoneWavelength { line: 3 })));
    }

    #[test]
    fn bad_tokens_carry_line_numbers() {
        let text = "# unit: reflectance\n500 0.1\n600 abc\n";
        assert!(matches!(parse_spectrum_file::<f64>(text), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_spectrum_file::<f64>("500 0.1\n"), Err(Error::MissingMetadataKey(_))));
    }

    #[test]
    fn metadata_round_trip() {
        let text = "# unit: irradiance_w_m2_nm\n# timestamp: 12.5\n# instrument: ASD\n350.0 1.25\n2500.0 0.5\n";
        let f: SpectrumFile<f64> = parse_spectrum_file(text).unwrap();
        assert_eq!(f.timestamp_s, Some(12.5));
        assert_eq!(f.metadata["instrument"], "ASD");
        assert_eq!(format_spectrum_file(&f).unwrap(), text);
    }

    #[test]
    fn log_formats_agree() {
        let log = "timestamp_s 400 500\n0 1 2\n2 3 4\n";
        let series: IrradianceSeries<f64> = parse_irradiance_log(log).unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(parse_irradiance_log::<f64>(&format_irradiance_log(&series)).unwrap(), series);
        assert!(matches!(
            parse_irradiance_log::<f64>("timestamp_s 400 500\n2 1 2\n2 3 4\n"),
            Err(Error::NonMonotoneTime { line: 3 })
        ));

        let files: Vec<SpectrumFile<f64>> = series
            .samples()
            .iter()
            .rev()
            .map(|(t, s)| SpectrumFile::new(s.clone()).with_timestamp(*t))
            .collect();
        assert_eq!(series_from_files(files).unwrap(), series);
    }
}
