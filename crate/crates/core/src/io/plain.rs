//! Small line-oriented formats: ROI lists, masks, sweep manifests, scenes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::calibration::MonochromatorStep;
use crate::error::{Error, Result};
use crate::sim::{Material, SceneSpec};
use crate::spectral::{resample, PixelMask, Roi, Spectrum, Unit, WavelengthGrid};
use crate::Scalar;

use super::envi::{cube_paths, load_cube};
use super::spectrum::{fmt_num, parse_num, read_spectrum_file, read_text};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_index(token: &str, line: usize) -> Result<usize> {
    token.parse().map_err(|_| Error::parse(line, format!("expected a non-negative integer, got `{token}`")))
}

/// `rect r0 c0 r1 c1`, bare `r0 c0 r1 c1`, or `poly r c r c ...`.
pub(crate) fn parse_roi_tokens(tokens: &[&str], line: usize) -> Result<Roi> {
    let ints = |ts: &[&str]| ts.iter().map(|t| parse_index(t, line)).collect::<Result<Vec<_>>>();
    match tokens.first().copied() {
        Some("poly") => {
            let v = ints(&tokens[1..])?;
            if v.len() < 6 || v.len() % 2 != 0 {
                return Err(Error::parse(line, "polygon needs at least 3 `row col` vertices"));
            }
            Ok(Roi::Polygon(v.chunks(2).map(|p| (p[0], p[1])).collect()))
        }
        Some(first) => {
            let rest = if first == "rect" { &tokens[1..] } else { tokens };
            let v = ints(rest)?;
            if v.len() != 4 {
                return Err(Error::parse(line, "rectangle needs `r0 c0 r1 c1`"));
            }
            if v[0] > v[2] || v[1] > v[3] {
                return Err(Error::parse(line, "rectangle corners are reversed"));
            }
            Ok(Roi::rect(v[0], v[1], v[2], v[3]))
        }
        None => Err(Error::parse(line, "missing region")),
    }
}

pub(crate) fn format_roi_tokens(roi: &Roi) -> Vec<String> {
    match roi {
        Roi::Rect { row0, col0, row1, col1 } => {
            vec!["rect".into(), row0.to_string(), col0.to_string(), row1.to_string(), col1.to_string()]
        }
        Roi::Polygon(v) => std::iter::once("poly".to_string())
            .chain(v.iter().flat_map(|(r, c)| [r.to_string(), c.to_string()]))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedRoi {
    pub name: String,
    pub roi: Roi,
}

/// One region per line: `name, r0, c0, r1, c1` or `name, poly, r, c, ...`.
pub fn parse_roi_file(text: &str) -> Result<Vec<NamedRoi>> {
    let mut out: Vec<NamedRoi> = Vec::new();
    for (no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let name = fields[0];
        if name.is_empty() {
            return Err(Error::parse(no, "ROI name is empty"));
        }
        if out.iter().any(|r| r.name == name) {
            return Err(Error::parse(no, format!("duplicate ROI name `{name}`")));
        }
        let roi = parse_roi_tokens(&fields[1..], no)?;
        out.push(NamedRoi { name: name.to_string(), roi });
    }
    if out.is_empty() {
        return Err(Error::parse(0, "ROI file lists no regions"));
    }
    Ok(out)
}

pub fn format_roi_file(rois: &[NamedRoi]) -> Result<String> {
    let mut out = String::new();
    for r in rois {
        if r.name.trim() != r.name || r.name.is_empty() || r.name.contains([',', '\n', '\r']) || r.name.starts_with('#') {
            return Err(Error::InvalidConfig(format!("ROI name `{}` cannot be written", r.name)));
        }
        let mut tokens = format_roi_tokens(&r.roi);
        if matches!(r.roi, Roi::Rect { .. }) {
            tokens.remove(0);
        }
        let _ = writeln!(out, "{}, {}", r.name, tokens.join(", "));
    }
    Ok(out)
}

pub fn read_roi_file(path: &Path) -> Result<Vec<NamedRoi>> {
    parse_roi_file(&read_text(path)?)
}

/// `rows cols`, then one line of `0`/`1` characters per row (1 = keep).
pub fn parse_mask(text: &str) -> Result<PixelMask> {
    let mut lines = content_lines(text);
    let (no, head) = lines.next().ok_or_else(|| Error::parse(0, "empty mask file"))?;
    let dims: Vec<&str> = head.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::parse(no, "mask header must be `rows cols`"));
    }
    let (rows, cols) = (parse_index(dims[0], no)?, parse_index(dims[1], no)?);
    let mut keep = Vec::new();
    let mut seen = 0;
    for (no, line) in lines {
        if seen == rows {
            return Err(Error::parse(no, format!("mask has more than {rows} rows")));
        }
        let row: Vec<char> = line.chars().filter(|c| !c.is_whitespace()).collect();
        if row.len() != cols {
            return Err(Error::parse(no, format!("expected {cols} flags, found {}", row.len())));
        }
        for ch in row {
            keep.push(match ch {
                '1' => true,
                '0' => false,
                other => return Err(Error::parse(no, format!("mask flag must be 0 or 1, got `{other}`"))),
            });
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::parse(text.lines().count(), format!("expected {rows} mask rows, found {seen}")));
    }
    PixelMask::new(rows, cols, keep)
}

pub fn format_mask(mask: &PixelMask) -> String {
    let mut out = format!("{} {}\n", mask.rows(), mask.cols());
    for row in mask.flags().chunks(mask.cols().max(1)) {
        out.extend(row.iter().map(|&k| if k { '1' } else { '0' }));
        out.push('\n');
    }
    out
}

pub fn read_mask(path: &Path) -> Result<PixelMask> {
    parse_mask(&read_text(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub lambda_nm: f64,
    /// Cube path; absolute, or joined onto the manifest's directory.
    pub frame: PathBuf,
    pub flux_ref_w: f64,
    pub exposure_ref_s: f64,
    pub bandwidth_ref_nm: f64,
}

/// Rows of `lambda_nm, frame_path, flux_ref_w, exposure_ref_s, bandwidth_ref_nm`.
/// An optional header row starting with `lambda_nm` is skipped.
pub fn parse_sweep_manifest(text: &str, base_dir: &Path) -> Result<Vec<SweepEntry>> {
    let mut out = Vec::new();
    for (no, line) in content_lines(text) {
        let fields: Vec<&str> = if line.contains(',') {
            line.split(',').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        if fields.first() == Some(&"lambda_nm") {
            continue;
        }
        if fields.len() != 5 {
            return Err(Error::parse(no, format!("expected 5 fields, found {}", fields.len())));
        }
        let positive = |i: usize| {
            parse_num(fields[i], no).and_then(|v| {
                if v > 0.0 { Ok(v) } else { Err(Error::parse(no, format!("field {} must be positive", i + 1))) }
            })
        };
        if fields[1].is_empty() {
            return Err(Error::parse(no, "empty frame path"));
        }
        out.push(SweepEntry {
            lambda_nm: positive(0)?,
            frame: base_dir.join(fields[1]),
            flux_ref_w: positive(2)?,
            exposure_ref_s: positive(3)?,
            bandwidth_ref_nm: positive(4)?,
        });
    }
    Ok(out)
}

pub fn format_sweep_manifest(entries: &[SweepEntry]) -> String {
    let mut out = String::from("lambda_nm, frame_path, flux_ref_w, exposure_ref_s, bandwidth_ref_nm\n");
    for e in entries {
        let _ = writeln!(
            out,
            "{}, {}, {}, {}, {}",
            fmt_num(e.lambda_nm),
            e.frame.display(),
            fmt_num(e.flux_ref_w),
            fmt_num(e.exposure_ref_s),
            fmt_num(e.bandwidth_ref_nm)
        );
    }
    out
}

/// Parses a manifest and loads its frames. Every referenced file is checked
/// before any frame is decoded.
pub fn load_sweep<T: Scalar>(manifest: &Path) -> Result<Vec<MonochromatorStep<T>>> {
    let base = manifest.parent().unwrap_or(Path::new("."));
    let entries = parse_sweep_manifest(&read_text(manifest)?, base)?;
    for e in &entries {
        let (hdr, img) = cube_paths(&e.frame);
        for p in [hdr, img] {
            if !p.is_file() {
                return Err(Error::io(&p, std::io::Error::new(std::io::ErrorKind::NotFound, "frame file not found")));
            }
        }
    }
    entries
        .iter()
        .map(|e| {
            Ok(MonochromatorStep {
                lambda_nm: T::lit(e.lambda_nm),
                frame: load_cube(&e.frame)?,
                flux_ref_w: T::lit(e.flux_ref_w),
                exposure_ref_s: T::lit(e.exposure_ref_s),
                bandwidth_ref_nm: T::lit(e.bandwidth_ref_nm),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaletteEntry {
    pub index: usize,
    pub name: String,
    pub spectrum_path: PathBuf,
}

/// Scene layout: `rows cols`, palette lines `index name spectrum_path`, then
/// `rows` lines of `cols` palette indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneFile {
    pub rows: usize,
    pub cols: usize,
    pub palette: Vec<PaletteEntry>,
    /// Row-major palette indices.
    pub grid: Vec<usize>,
}

/// Palette lines are told apart from grid rows by their name token, which
/// must not be an integer.
pub fn parse_scene_file(text: &str) -> Result<SceneFile> {
    let mut lines = content_lines(text).peekable();
    let (no, head) = lines.next().ok_or_else(|| Error::parse(0, "empty scene file"))?;
    let dims: Vec<&str> = head.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::parse(no, "scene header must be `rows cols`"));
    }
    let (rows, cols) = (parse_index(dims[0], no)?, parse_index(dims[1], no)?);
    if rows == 0 || cols == 0 {
        return Err(Error::parse(no, "scene dimensions must be positive"));
    }
    let mut palette: Vec<PaletteEntry> = Vec::new();
    while let Some(&(no, line)) = lines.peek() {
        let mut tokens = line.splitn(3, char::is_whitespace);
        let (Some(idx), Some(name), Some(path)) = (tokens.next(), tokens.next(), tokens.next()) else { break };
        if name.parse::<usize>().is_ok() {
            break;
        }
        let index = parse_index(idx, no)?;
        if palette.iter().any(|p| p.index == index) {
            return Err(Error::parse(no, format!("palette index {index} repeated")));
        }
        palette.push(PaletteEntry { index, name: name.to_string(), spectrum_path: PathBuf::from(path.trim()) });
        lines.next();
    }
    if palette.is_empty() {
        return Err(Error::parse(no, "scene has no palette"));
    }
    let mut grid = Vec::with_capacity(rows.saturating_mul(cols).min(1 << 20));
    let mut seen = 0;
    for (no, line) in lines {
        if seen == rows {
            return Err(Error::parse(no, format!("scene has more than {rows} rows")));
        }
        let row = line.split_whitespace().map(|t| parse_index(t, no)).collect::<Result<Vec<_>>>()?;
        if row.len() != cols {
            return Err(Error::parse(no, format!("expected {cols} indices, found {}", row.len())));
        }
        if let Some(bad) = row.iter().find(|i| !palette.iter().any(|p| p.index == **i)) {
            return Err(Error::parse(no, format!("index {bad} is not in the palette")));
        }
        grid.extend(row);
        seen += 1;
    }
    if seen != rows {
        return Err(Error::parse(text.lines().count(), format!("expected {rows} grid rows, found {seen}")));
    }
    Ok(SceneFile { rows, cols, palette, grid })
}

pub fn format_scene_file(scene: &SceneFile) -> String {
    let mut out = format!("{} {}\n", scene.rows, scene.cols);
    for p in &scene.palette {
        let _ = writeln!(out, "{} {} {}", p.index, p.name, p.spectrum_path.display());
    }
    for row in scene.grid.chunks(scene.cols.max(1)) {
        let items: Vec<String> = row.iter().map(usize::to_string).collect();
        out.push_str(&items.join(" "));
        out.push('\n');
    }
    out
}

/// Builds a scene from a scene file, reading each palette spectrum (relative
/// paths resolve against the scene file) and resampling it onto `grid`.
pub fn load_scene<T: Scalar>(path: &Path, grid: &WavelengthGrid<T>) -> Result<SceneSpec<T>> {
    let file = parse_scene_file(&read_text(path)?)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut materials = Vec::with_capacity(file.palette.len());
    for p in &file.palette {
        let src = read_spectrum_file::<T>(&base.join(&p.spectrum_path))?.spectrum;
        if src.unit() != Unit::Reflectance {
            return Err(Error::UnitMismatch { expected: Unit::Reflectance.to_string(), found: src.unit().to_string() });
        }
        let on_grid = if src.grid().as_slice() == grid.as_slice() {
            Spectrum::new(grid.clone(), src.into_values(), Unit::Reflectance)?
        } else {
            resample(&src, grid)?
        };
        materials.push(Material::new(p.name.clone(), on_grid)?);
    }
    let map = file
        .grid
        .iter()
        .map(|i| file.palette.iter().position(|p| p.index == *i).expect("indices validated at parse"))
        .collect();
    SceneSpec::new(file.rows, file.cols, map, materials)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roi_file_round_trip() {
        let text = "# regions\nhood, 2, 3, 5, 7\nroof, poly, 0, 0, 0, 4, 3, 2\n";
        let rois = parse_roi_file(text).unwrap();
        assert_eq!(rois[0].roi, Roi::rect(2, 3, 5, 7));
        assert_eq!(rois[1].roi, Roi::Polygon(vec![(0, 0), (0, 4), (3, 2)]));
        assert_eq!(parse_roi_file(&format_roi_file(&rois).unwrap()).unwrap(), rois);
        assert!(matches!(parse_roi_file("a, 1, 2, 3"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn mask_round_trip() {
        let mask = parse_mask("2 3\n101\n0 1 1\n").unwrap();
        assert_eq!(mask.flags(), &[true, false, true, false, true, true]);
        assert_eq!(parse_mask(&format_mask(&mask)).unwrap(), mask);
        assert!(matches!(parse_mask("2 3\n101\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn manifest_paths_are_relative() {
        let text = "lambda_nm, frame_path, flux_ref_w, exposure_ref_s, bandwidth_ref_nm\n400, f/a.hdr, 1e-6, 0.01, 2\n";
        let entries = parse_sweep_manifest(text, Path::new("/data/sweep")).unwrap();
        assert_eq!(entries[0].frame, PathBuf::from("/data/sweep/f/a.hdr"));
        assert!(matches!(parse_sweep_manifest("400, a, 0, 0.01, 2", Path::new(".")), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn missing_frame_fails_before_loading() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("sweep.txt");
        std::fs::write(&manifest, "400, missing.hdr, 1e-6, 0.01, 2\n").unwrap();
        assert!(matches!(load_sweep::<f64>(&manifest), Err(Error::Io { .. })));
    }

    #[test]
    fn scene_file_round_trip() {
        let text = "2 3\n0 white paints/white.txt\n1 red paints/red.txt\n0 0 1\n1 1 0\n";
        let scene = parse_scene_file(text).unwrap();
        assert_eq!(scene.palette.len(), 2);
        assert_eq!(scene.grid, vec![0, 0, 1, 1, 1, 0]);
        assert_eq!(format_scene_file(&scene), text);
        assert!(parse_scene_file("1 1\n0 white w.txt\n2\n").is_err());
    }
}
