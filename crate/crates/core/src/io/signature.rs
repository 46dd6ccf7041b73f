//! Signature records and library export.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::quality::QualitySummary;
use crate::radcal::SignatureRecord;
use crate::spectral::{Spectrum, Unit, WavelengthGrid};
use crate::Scalar;

use super::plain::{format_roi_tokens, parse_roi_tokens};
use super::spectrum::{check_entry, fmt_num, parse_num, read_text, split_header, split_row, write_rows, write_text};

pub const NAME_KEY: &str = "name";
const RESERVED: [&str; 4] = ["roi", "timestamp", "quality", "unit"];
/// File extension of library entries.
pub const SIGNATURE_EXT: &str = "sig";

fn format_quality(q: &QualitySummary) -> String {
    format!(
        "total={} kept={} saturated={} glint={} shadow={} adjacency={}",
        q.total, q.kept, q.saturated, q.glint, q.shadow, q.adjacency
    )
}

fn parse_quality(text: &str) -> Result<QualitySummary> {
    let mut q = QualitySummary::default();
    let mut seen = 0u8;
    for item in text.split_whitespace() {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::parse(0, format!("bad quality entry `{item}`")))?;
        let v: usize = v.parse().map_err(|_| Error::parse(0, format!("bad quality count `{item}`")))?;
        let (slot, bit) = match k {
            "total" => (&mut q.total, 0),
            "kept" => (&mut q.kept, 1),
            "saturated" => (&mut q.saturated, 2),
            "glint" => (&mut q.glint, 3),
            "shadow" => (&mut q.shadow, 4),
            "adjacency" => (&mut q.adjacency, 5),
            _ => return Err(Error::parse(0, format!("unknown quality field `{k}`"))),
        };
        *slot = v;
        seen |= 1 << bit;
    }
    if seen != 0b11_1111 {
        return Err(Error::parse(0, "quality summary is incomplete"));
    }
    Ok(q)
}

pub fn format_signature_record<T: Scalar>(record: &SignatureRecord<T>) -> Result<String> {
    if record.name().is_none() {
        return Err(Error::MissingMetadataKey(NAME_KEY.into()));
    }
    if record.reflectance.unit() != Unit::Reflectance {
        return Err(Error::UnitMismatch { expected: Unit::Reflectance.to_string(), found: record.reflectance.unit().to_string() });
    }
    let mut out = String::new();
    let _ = writeln!(out, "# unit: {}", Unit::Reflectance);
    let _ = writeln!(out, "# timestamp: {}", fmt_num(record.timestamp_s));
    let _ = writeln!(out, "# roi: {}", format_roi_tokens(&record.roi).join(" "));
    if let Some(q) = &record.quality {
        let _ = writeln!(out, "# quality: {}", format_quality(q));
    }
    for (k, v) in &record.metadata {
        if RESERVED.contains(&k.as_str()) {
            return Err(Error::InvalidConfig(format!("metadata key `{k}` is reserved")));
        }
        check_entry(k, v)?;
        let _ = writeln!(out, "# {k}: {v}");
    }
    write_rows(&mut out, &record.reflectance);
    Ok(out)
}

pub fn parse_signature_record<T: Scalar>(text: &str) -> Result<SignatureRecord<T>> {
    let (mut meta, rows) = split_header(text)?;
    if !meta.contains_key(NAME_KEY) {
        return Err(Error::MissingMetadataKey(NAME_KEY.into()));
    }
    let take = |meta: &mut std::collections::BTreeMap<String, String>, key: &str| {
        meta.remove(key).ok_or_else(|| Error::MissingMetadataKey(key.into()))
    };
    let unit: Unit = take(&mut meta, "unit")?.parse().map_err(|m: String| Error::parse(0, m))?;
    if unit != Unit::Reflectance {
        return Err(Error::UnitMismatch { expected: Unit::Reflectance.to_string(), found: unit.to_string() });
    }
    let timestamp_s = parse_num(&take(&mut meta, "timestamp")?, 0)?;
    let roi_text = take(&mut meta, "roi")?;
    let roi = parse_roi_tokens(&roi_text.split_whitespace().collect::<Vec<_>>(), 0)?;
    let quality = meta.remove("quality").map(|q| parse_quality(&q)).transpose()?;

    let mut wavelengths: Vec<f64> = Vec::new();
    let mut values = Vec::new();
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
    if wavelengths.is_empty() {
        return Err(Error::parse(text.lines().count(), "no data rows"));
    }
    let grid = WavelengthGrid::new(wavelengths.into_iter().map(T::lit).collect())?;
    let reflectance = Spectrum::new(grid, values, Unit::Reflectance)?;
    Ok(SignatureRecord { reflectance, roi, timestamp_s, metadata: meta, quality })
}

pub fn read_signature_record<T: Scalar>(path: &Path) -> Result<SignatureRecord<T>> {
    parse_signature_record(&read_text(path)?)
}

pub fn write_signature_record<T: Scalar>(path: &Path, record: &SignatureRecord<T>) -> Result<()> {
    write_text(path, &format_signature_record(record)?)
}

/// Lowercase ASCII slug of a record name; runs of other characters become `_`.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    let trimmed = out.trim_matches('_');
    if trimmed.is_empty() { "record".to_string() } else { trimmed.to_string() }
}

/// Library file names for `names`, in order; repeated slugs get `_2`, `_3`, ...
pub fn library_file_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut used = std::collections::BTreeSet::new();
    names
        .into_iter()
        .map(|name| {
            let base = slug(name);
            let mut candidate = base.clone();
            let mut k = 2;
            while !used.insert(candidate.clone()) {
                candidate = format!("{base}_{k}");
                k += 1;
            }
            format!("{candidate}.{SIGNATURE_EXT}")
        })
        .collect()
}

/// Writes one file per record into `dir`, returning the paths in record order.
pub fn export_library<T: Scalar>(dir: &Path, records: &[SignatureRecord<T>]) -> Result<Vec<PathBuf>> {
    let texts = records.iter().map(format_signature_record).collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let names = library_file_names(records.iter().map(|r| r.name().unwrap_or_default()));
    let mut paths = Vec::with_capacity(records.len());
    for (name, text) in names.into_iter().zip(texts) {
        let path = dir.join(name);
        write_text(&path, &text)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Reads every `.sig` file of `dir`, in file-name order.
pub fn read_library<T: Scalar>(dir: &Path) -> Result<Vec<(PathBuf, SignatureRecord<T>)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == SIGNATURE_EXT))
        .collect();
    paths.sort();
    paths.into_iter().map(|p| read_signature_record(&p).map(|r| (p, r))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Roi;
    use std::collections::BTreeMap;

    fn record() -> SignatureRecord<f64> {
        let g = WavelengthGrid::new(vec![400.0, 500.0, 600.0]).unwrap();
        let reflectance = Spectrum::new(g, vec![0.05, 0.31, 0.125], Unit::Reflectance).unwrap();
        let metadata: BTreeMap<String, String> = [("name", "sedan red"), ("make", "Ford"), ("model", "Fusion"), ("color", "red")]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let quality = QualitySummary { total: 20, kept: 17, saturated: 1, glint: 2, shadow: 0, adjacency: 1 };
        SignatureRecord { reflectance, roi: Roi::rect(1, 2, 3, 4), timestamp_s: 41.5, metadata, quality: Some(quality) }
    }

    #[test]
    fn round_trip() {
        let r = record();
        let text = format_signature_record(&r).unwrap();
        assert_eq!(parse_signature_record::<f64>(&text).unwrap(), r);
        let mut poly = r.clone();
        poly.roi = Roi::Polygon(vec![(0, 0), (0, 5), (4, 2)]);
        poly.quality = None;
        assert_eq!(parse_signature_record::<f64>(&format_signature_record(&poly).unwrap()).unwrap(), poly);
    }

    #[test]
    fn name_is_required() {
        let mut r = record();
        r.metadata.remove("name");
        assert!(matches!(format_signature_record(&r), Err(Error::MissingMetadataKey(k)) if k == "name"));
        let text = format_signature_record(&record()).unwrap().replace("# name: sedan red\n", "");
        assert!(matches!(parse_signature_record::<f64>(&text), Err(Error::MissingMetadataKey(k)) if k == "name"));
    }

    #[test]
    fn slugs_are_unique() {
        assert_eq!(library_file_names(["Red Sedan", "red-sedan", "", "??"]), vec![
            "red_sedan.sig",
            "red_sedan_2.sig",
            "record.sig",
            "record_2.sig"
        ]);
    }
}
