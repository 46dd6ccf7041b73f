//! ENVI-style header and raw cube payloads.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::spectral::{HyperCube, Interleave, Unit, WavelengthGrid};
use crate::Scalar;

pub const DATA_TYPE_U8: u32 = 1;
pub const DATA_TYPE_I16: u32 = 2;
pub const DATA_TYPE_F32: u32 = 4;
pub const DATA_TYPE_F64: u32 = 5;
pub const DATA_TYPE_U16: u32 = 12;

/// Header key carrying the physical unit of the samples.
pub const UNIT_KEY: &str = "unit";
/// Header key carrying the ADC bit depth of count cubes.
pub const BIT_DEPTH_KEY: &str = "bit depth";
/// Bit depth assumed for count cubes whose header does not state one.
pub const DEFAULT_BIT_DEPTH: u8 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ByteOrder {
    #[default]
    Little,
    Big,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnviHeader {
    pub samples: usize,
    pub lines: usize,
    pub bands: usize,
    pub data_type: u32,
    pub interleave: Interleave,
    pub byte_order: ByteOrder,
    pub header_offset: usize,
    pub wavelengths_nm: Option<Vec<f64>>,
    /// Keys the reader does not interpret, in file order, values verbatim.
    pub extra: Vec<(String, String)>,
}

fn bytes_per_sample(data_type: u32) -> Result<usize> {
    match data_type {
        DATA_TYPE_U8 => Ok(1),
        DATA_TYPE_I16 | DATA_TYPE_U16 => Ok(2),
        DATA_TYPE_F32 => Ok(4),
        DATA_TYPE_F64 => Ok(8),
        other => Err(Error::UnsupportedDataType(other)),
    }
}

impl EnviHeader {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.extra.iter().rev().find(|(k, _)| k.eq_ignore_ascii_case(key)).map(|(_, v)| v.as_str())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.extra.iter_mut().find(|(k, _)| k.eq_ignore_ascii_case(key)) {
            Some(entry) => entry.1 = value,
            None => self.extra.push((key.to_string(), value)),
        }
    }

    /// Payload size in bytes, including the header offset.
    pub fn payload_len(&self) -> Result<usize> {
        let overflow = || Error::InvalidCube("cube dimensions overflow".into());
        self.samples
            .checked_mul(self.lines)
            .and_then(|n| n.checked_mul(self.bands))
            .and_then(|n| n.checked_mul(bytes_per_sample(self.data_type).ok()?))
            .and_then(|n| n.checked_add(self.header_offset))
            .ok_or_else(|| match bytes_per_sample(self.data_type) {
                Err(e) => e,
                Ok(_) => overflow(),
            })
    }

    pub fn unit(&self) -> Result<Unit> {
        match self.get(UNIT_KEY) {
            Some(tag) => tag.parse().map_err(|m: String| Error::parse(0, m)),
            None if matches!(self.data_type, DATA_TYPE_U8 | DATA_TYPE_I16 | DATA_TYPE_U16) => Ok(Unit::DigitalCount),
            None => Err(Error::MissingKey(UNIT_KEY.into())),
        }
    }

    pub fn bit_depth(&self) -> Result<u8> {
        match self.get(BIT_DEPTH_KEY) {
            Some(v) => v
                .trim()
                .parse::<u8>()
                .ok()
                .filter(|b| (1..=16).contains(b))
                .ok_or_else(|| Error::parse(0, format!("invalid bit depth `{v}`"))),
            None => Ok(DEFAULT_BIT_DEPTH),
        }
    }
}

fn parse_usize(key: &str, value: &str, line: usize) -> Result<usize> {
    value.trim().parse().map_err(|_| Error::parse(line, format!("`{key}` expects an integer, got `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let malformed = |reason: &str| Error::MalformedList { key: key.into(), reason: reason.into() };
    let inner = value
        .trim()
        .strip_prefix('{')
        .and_then(|v| v.strip_suffix('}'))
        .ok_or_else(|| malformed("expected `{...}`"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(&format!("bad entry `{item}`")))
        })
        .collect()
}

/// Parses `key = value` header text that starts with the `ENVI` magic.
pub fn parse_envi_header(text: &str) -> Result<EnviHeader> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.by_ref().find(|(_, l)| !l.is_empty()) {
        Some((_, "ENVI")) => {}
        _ => return Err(Error::BadMagic),
    }

    let mut fields: Vec<(String, String, usize)> = Vec::new();
    while let Some((no, line)) = lines.next() {
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::parse(no, "empty key"));
        }
        let mut value = value.trim().to_string();
        if value.starts_with('{') {
            while !value.ends_with('}') {
                match lines.next() {
                    Some((_, more)) => {
                        value.push('\n');
                        value.push_str(more);
                    }
                    None => {
                        return Err(Error::MalformedList { key: key.into(), reason: "unterminated `{`".into() })
                    }
                }
            }
        }
        fields.push((key.to_string(), value, no));
    }

    let mut header = EnviHeader {
        samples: 0,
        lines: 0,
        bands: 0,
        data_type: 0,
        interleave: Interleave::Bsq,
        byte_order: ByteOrder::Little,
        header_offset: 0,
        wavelengths_nm: None,
        extra: Vec::new(),
    };
    let mut seen = [false; 5];
    for (key, value, no) in fields {
        match key.to_ascii_lowercase().as_str() {
            "samples" => {
                header.samples = parse_usize(&key, &value, no)?;
                seen[0] = true;
            }
            "lines" => {
                header.lines = parse_usize(&key, &value, no)?;
                seen[1] = true;
            }
            "bands" => {
                header.bands = parse_usize(&key, &value, no)?;
                seen[2] = true;
            }
            "interleave" => {
                header.interleave = value.parse().map_err(|m: String| Error::parse(no, m))?;
                seen[3] = true;
            }
            "data type" => {
                header.data_type = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(no, format!("`data type` expects an integer, got `{value}`")))?;
                seen[4] = true;
            }
            "byte order" => {
                header.byte_order = match value.trim() {
                    "0" => ByteOrder::Little,
                    "1" => ByteOrder::Big,
                    other => return Err(Error::parse(no, format!("byte order must be 0 or 1, got `{other}`"))),
                }
            }
            "header offset" => header.header_offset = parse_usize(&key, &value, no)?,
            "wavelength" => header.wavelengths_nm = Some(parse_list(&key, &value)?),
            _ => header.extra.push((key, value)),
        }
    }
    for (present, name) in seen.iter().zip(["samples", "lines", "bands", "interleave", "data type"]) {
        if !present {
            return Err(Error::MissingKey(name.into()));
        }
    }
    if let Some(w) = &header.wavelengths_nm {
        if w.len() != header.bands {
            return Err(Error::MalformedList {
                key: "wavelength".into(),
                reason: format!("{} entries for {} bands", w.len(), header.bands),
            });
        }
    }
    Ok(header)
}

/// Serializes a header; [`parse_envi_header`] inverts it exactly.
pub fn format_envi_header(h: &EnviHeader) -> String {
    let mut s = String::from("ENVI\n");
    let _ = writeln!(s, "samples = {}", h.samples);
    let _ = writeln!(s, "lines = {}", h.lines);
    let _ = writeln!(s, "bands = {}", h.bands);
    let _ = writeln!(s, "header offset = {}", h.header_offset);
    let _ = writeln!(s, "data type = {}", h.data_type);
    let _ = writeln!(s, "interleave = {}", h.interleave);
    let _ = writeln!(s, "byte order = {}", if h.byte_order == ByteOrder::Big { 1 } else { 0 });
    if let Some(w) = &h.wavelengths_nm {
        let items: Vec<String> = w.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "wavelength = {{{}}}", items.join(", "));
    }
    for (k, v) in &h.extra {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

fn decode(data_type: u32, order: ByteOrder, raw: &[u8]) -> f64 {
    macro_rules! num {
        ($t:ty) => {{
            let arr = raw.try_into().expect("sample width checked");
            match order {
                ByteOrder::Little => <$t>::from_le_bytes(arr) as f64,
                ByteOrder::Big => <$t>::from_be_bytes(arr) as f64,
            }
        }};
    }
    match data_type {
        DATA_TYPE_U8 => raw[0] as f64,
        DATA_TYPE_I16 => num!(i16),
        DATA_TYPE_U16 => num!(u16),
        DATA_TYPE_F32 => num!(f32),
        _ => num!(f64),
    }
}

fn encode(data_type: u32, order: ByteOrder, v: f64, out: &mut Vec<u8>) {
    macro_rules! put {
        ($x:expr) => {
            match order {
                ByteOrder::Little => out.extend_from_slice(&$x.to_le_bytes()),
                ByteOrder::Big => out.extend_from_slice(&$x.to_be_bytes()),
            }
        };
    }
    match data_type {
        DATA_TYPE_U8 => out.push(v as u8),
        DATA_TYPE_I16 => put!(v as i16),
        DATA_TYPE_U16 => put!(v as u16),
        DATA_TYPE_F32 => put!(v as f32),
        _ => put!(v),
    }
}

/// Decodes a payload laid out as `header` describes.
pub fn read_cube<T: Scalar>(header: &EnviHeader, bytes: &[u8]) -> Result<HyperCube<T>> {
    let width = bytes_per_sample(header.data_type)?;
    let expected = header.payload_len()?;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch { expected, found: bytes.len() });
    }
    let wavelengths = header.wavelengths_nm.clone().ok_or_else(|| Error::MissingKey("wavelength".into()))?;
    let grid = WavelengthGrid::new(wavelengths.into_iter().map(T::lit).collect())?;
    let unit = header.unit()?;
    let (rows, cols, bands) = (header.lines, header.samples, header.bands);
    let payload = &bytes[header.header_offset..];
    let mut data = vec![T::zero(); rows * cols * bands];
    for r in 0..rows {
        for c in 0..cols {
            for b in 0..bands {
                let at = header.interleave.offset(rows, cols, bands, r, c, b) * width;
                data[(r * cols + c) * bands + b] = T::lit(decode(header.data_type, header.byte_order, &payload[at..at + width]));
            }
        }
    }
    let cube = HyperCube::new(rows, cols, grid, unit, data)?.with_interleave(header.interleave);
    if unit == Unit::DigitalCount {
        let max_dc = ((1u32 << header.bit_depth()?) - 1) as f64;
        cube.check_counts(T::lit(max_dc))?;
    }
    Ok(cube)
}

/// Encodes `cube` in its own interleave. Count cubes holding only integers in
/// the 16-bit range are stored as unsigned 16-bit words, everything else as
/// 64-bit floats.
pub fn write_cube<T: Scalar>(cube: &HyperCube<T>, byte_order: ByteOrder, bit_depth: Option<u8>) -> (EnviHeader, Vec<u8>) {
    let integral = cube.unit() == Unit::DigitalCount
        && cube.data().iter().all(|&v| v.fract() == T::zero() && v >= T::zero() && v.as_f64() <= u16::MAX as f64);
    let data_type = if integral { DATA_TYPE_U16 } else { DATA_TYPE_F64 };
    let mut header = EnviHeader {
        samples: cube.cols(),
        lines: cube.rows(),
        bands: cube.bands(),
        data_type,
        interleave: cube.interleave(),
        byte_order,
        header_offset: 0,
        wavelengths_nm: Some(cube.grid().as_slice().iter().map(|w| w.as_f64()).collect()),
        extra: Vec::new(),
    };
    header.set(UNIT_KEY, cube.unit().tag());
    if cube.unit() == Unit::DigitalCount {
        header.set(BIT_DEPTH_KEY, bit_depth.unwrap_or(DEFAULT_BIT_DEPTH).to_string());
    }
    let (rows, cols, bands) = (cube.rows(), cube.cols(), cube.bands());
    let mut ordered = vec![T::zero(); cube.data().len()];
    for r in 0..rows {
        for c in 0..cols {
            for b in 0..bands {
                ordered[cube.interleave().offset(rows, cols, bands, r, c, b)] = cube.get(r, c, b);
            }
        }
    }
    let mut bytes = Vec::with_capacity(ordered.len() * bytes_per_sample(data_type).unwrap_or(8));
    for v in ordered {
        encode(data_type, byte_order, v.as_f64(), &mut bytes);
    }
    (header, bytes)
}

/// Header and payload paths for a cube stored as `<stem>.hdr` + `<stem>.img`.
pub fn cube_paths(path: &Path) -> (PathBuf, PathBuf) {
    (path.with_extension("hdr"), path.with_extension("img"))
}

pub fn load_cube<T: Scalar>(path: &Path) -> Result<HyperCube<T>> {
    let (hdr_path, img_path) = cube_paths(path);
    let text = std::fs::read(&hdr_path).map_err(|e| Error::io(&hdr_path, e))?;
    let text = String::from_utf8(text).map_err(|_| Error::parse(0, "header is not UTF-8"))?;
    let header = parse_envi_header(&text)?;
    let bytes = std::fs::read(&img_path).map_err(|e| Error::io(&img_path, e))?;
    read_cube(&header, &bytes)
}

pub fn save_cube<T: Scalar>(path: &Path, cube: &HyperCube<T>, bit_depth: Option<u8>) -> Result<(PathBuf, PathBuf)> {
    let (hdr_path, img_path) = cube_paths(path);
    let (header, bytes) = write_cube(cube, ByteOrder::Little, bit_depth);
    std::fs::write(&hdr_path, format_envi_header(&header)).map_err(|e| Error::io(&hdr_path, e))?;
    std::fs::write(&img_path, bytes).map_err(|e| Error::io(&img_path, e))?;
    Ok((hdr_path, img_path))
}
