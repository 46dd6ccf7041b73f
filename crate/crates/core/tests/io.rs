use std::collections::BTreeMap;

use hypercal::io::*;
use hypercal::quality::QualitySummary;
use hypercal::radcal::SignatureRecord;
use hypercal::spectral::{HyperCube, Interleave, IrradianceSeries, PixelMask, Roi, Spectrum, Unit, WavelengthGrid};
use hypercal::Error;
use proptest::prelude::*;

fn small_cube() -> HyperCube<f64> {
    let g = WavelengthGrid::new(vec![450.0, 550.0, 650.0]).unwrap();
    HyperCube::from_pixels(2, 2, g, Unit::DigitalCount, |r, c| (0..3).map(|b| (100 * r + 10 * c + b) as f64).collect())
        .unwrap()
}

/// Samples in file order for each layout, by explicit nested loops.
fn layout_oracle(cube: &HyperCube<f64>, interleave: Interleave) -> Vec<f64> {
    let (rows, cols, bands) = (cube.rows(), cube.cols(), cube.bands());
    let mut out = Vec::new();
    match interleave {
        Interleave::Bsq => {
            for b in 0..bands {
                for r in 0..rows {
                    for c in 0..cols {
                        out.push(cube.get(r, c, b));
                    }
                }
            }
        }
        Interleave::Bil => {
            for r in 0..rows {
                for b in 0..bands {
                    for c in 0..cols {
                        out.push(cube.get(r, c, b));
                    }
                }
            }
        }
        Interleave::Bip => {
            for r in 0..rows {
                for c in 0..cols {
                    for b in 0..bands {
                        out.push(cube.get(r, c, b));
                    }
                }
            }
        }
    }
    out
}

#[test]
fn layouts_match_index_oracle() {
    let cube = small_cube();
    let mut payloads = Vec::new();
    for il in [Interleave::Bsq, Interleave::Bil, Interleave::Bip] {
        let c = cube.clone().with_interleave(il);
        let (h, bytes) = write_cube(&c, ByteOrder::Little, None);
        assert_eq!(h.data_type, DATA_TYPE_U16);
        let words: Vec<f64> = bytes.chunks(2).map(|w| u16::from_le_bytes([w[0], w[1]]) as f64).collect();
        assert_eq!(words, layout_oracle(&cube, il));
        let back: HyperCube<f64> = read_cube(&h, &bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.data(), cube.data());
        payloads.push(bytes);
    }
    assert_ne!(payloads[0], payloads[1]);
    assert_ne!(payloads[1], payloads[2]);
}

#[test]
fn big_endian_and_float_payloads() {
    let cube = small_cube().with_interleave(Interleave::Bsq);
    let (h, bytes) = write_cube(&cube, ByteOrder::Big, None);
    assert_eq!(&bytes[..2], &[0, 0]);
    assert_eq!(&bytes[2..4], &10u16.to_be_bytes());
    assert_eq!(read_cube::<f64>(&h, &bytes).unwrap(), cube);

    let mut h32 = h.clone();
    h32.data_type = DATA_TYPE_F32;
    h32.set("unit", "radiance_w_m2_sr_nm");
    let values = layout_oracle(&cube, Interleave::Bsq);
    let raw: Vec<u8> = values.iter().flat_map(|v| (*v as f32 * 0.5).to_be_bytes()).collect();
    let r: HyperCube<f32> = read_cube(&h32, &raw).unwrap();
    assert_eq!(r.unit(), Unit::Radiance);
    assert_eq!(r.get(1, 1, 2), 56.0);
}

#[test]
fn interleave_conversion_commutes_with_io() {
    let dir = tempfile::tempdir().unwrap();
    let cube = small_cube();
    for il in [Interleave::Bsq, Interleave::Bil, Interleave::Bip] {
        let converted = cube.clone().with_interleave(il);
        let path = dir.path().join(format!("c_{il}"));
        save_cube(&path, &converted, None).unwrap();
        assert_eq!(load_cube::<f64>(&path.with_extension("hdr")).unwrap(), converted);
    }
}

fn record(name: &str, k: f64) -> SignatureRecord<f64> {
    let g = WavelengthGrid::linspace(400.0, 1000.0, 272).unwrap();
    let reflectance = Spectrum::from_fn(g, Unit::Reflectance, |w| k * 0.01 + w * 1e-4).unwrap();
    let metadata: BTreeMap<String, String> = [("name", name), ("make", "Honda"), ("model", "Civic"), ("color", name)]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    SignatureRecord { reflectance, roi: Roi::rect(0, 0, 4, 4), timestamp_s: k, metadata, quality: Some(QualitySummary::default()) }
}

#[test]
fn fourteen_records_make_fourteen_files() {
    let names = [
        "white", "black", "silver", "gray", "red", "blue", "green", "yellow", "orange", "maroon", "navy", "beige",
        "teal", "champagne",
    ];
    let records: Vec<_> = names.iter().enumerate().map(|(i, n)| record(n, i as f64)).collect();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let pa = export_library(a.path(), &records).unwrap();
    let pb = export_library(b.path(), &records).unwrap();
    assert_eq!(std::fs::read_dir(a.path()).unwrap().count(), 14);
    for (x, y) in pa.iter().zip(&pb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
    let back = read_library::<f64>(a.path()).unwrap();
    assert_eq!(back.len(), 14);
    for (_, r) in back {
        let original = records.iter().find(|o| o.name() == r.name()).unwrap();
        assert_eq!(&r, original);
    }
}

#[test]
fn irradiance_directory_is_sorted_by_time() {
    let dir = tempfile::tempdir().unwrap();
    let g = WavelengthGrid::new(vec![350.0, 1000.0, 2500.0]).unwrap();
    for (file, t) in [("a.txt", 4.0), ("b.txt", 0.0), ("c.txt", 2.0)] {
        let s = Spectrum::constant(g.clone(), t + 1.0, Unit::Irradiance).unwrap();
        write_spectrum_file(&dir.path().join(file), &SpectrumFile::new(s).with_timestamp(t)).unwrap();
    }
    let series: IrradianceSeries<f64> = read_irradiance_log(dir.path()).unwrap();
    let times: Vec<f64> = series.samples().iter().map(|(t, _)| *t).collect();
    assert_eq!(times, vec![0.0, 2.0, 4.0]);
    let s = Spectrum::constant(g, 9.0, Unit::Irradiance).unwrap();
    write_spectrum_file(&dir.path().join("d.txt"), &SpectrumFile::new(s).with_timestamp(2.0)).unwrap();
    assert!(matches!(read_irradiance_log::<f64>(dir.path()), Err(Error::NonMonotoneTime { .. })));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, -1.0f64..1.0, any::<f64>().prop_filter("finite", |v| v.is_finite())]
}

fn grid_strategy(max: usize) -> impl Strategy<Value = Vec<f64>> {
    (1usize..max, 1e-3f64..2000.0, prop::collection::vec(1e-6f64..50.0, max)).prop_map(|(n, start, steps)| {
        let mut w = vec![start];
        for s in steps.iter().take(n - 1) {
            let next = w.last().unwrap() + s;
            if next > *w.last().unwrap() {
                w.push(next);
            }
        }
        w
    })
}

proptest! {
    #[test]
    fn spectrum_text_round_trips(w in grid_strategy(40), vals in prop::collection::vec(finite(), 40), t in prop::option::of(finite())) {
        let values = vals[..w.len()].to_vec();
        let g = WavelengthGrid::new(w).unwrap();
        let mut f = SpectrumFile::new(Spectrum::new(g, values, Unit::Radiance).unwrap());
        f.timestamp_s = t;
        f.metadata.insert("instrument".into(), "SVC HR-1024i".into());
        let back = parse_spectrum_file::<f64>(&format_spectrum_file(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn cube_bytes_round_trip(rows in 1usize..5, cols in 1usize..5, w in grid_strategy(6), il in 0usize..3, big in any::<bool>(),
                             ints in any::<bool>(), seed in prop::collection::vec(0u16..4096, 150), f in prop::collection::vec(finite(), 150)) {
        let g = WavelengthGrid::new(w).unwrap();
        let n = rows * cols * g.len();
        let (unit, data): (Unit, Vec<f64>) = if ints {
            (Unit::DigitalCount, seed[..n].iter().map(|&v| v as f64).collect())
        } else {
            (Unit::Radiance, f[..n].to_vec())
        };
        let il = [Interleave::Bil, Interleave::Bsq, Interleave::Bip][il];
        let cube = HyperCube::new(rows, cols, g, unit, data).unwrap().with_interleave(il);
        let order = if big { ByteOrder::Big } else { ByteOrder::Little };
        let (h, bytes) = write_cube(&cube, order, None);
        let h2 = parse_envi_header(&format_envi_header(&h)).unwrap();
        prop_assert_eq!(&h2, &h);
        let back: HyperCube<f64> = read_cube(&h2, &bytes).unwrap();
        let bits = |c: &HyperCube<f64>| c.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&cube));
        prop_assert_eq!(back.interleave(), il);
    }

    #[test]
    fn parsers_never_panic_on_text(text in ".{0,400}") {
        let _ = parse_envi_header(&text);
        let _ = parse_spectrum_file::<f64>(&text);
        let _ = parse_irradiance_log::<f64>(&text);
        let _ = parse_signature_record::<f64>(&text);
        let _ = parse_roi_file(&text);
        let _ = parse_mask(&text);
        let _ = parse_scene_file(&text);
        let _ = parse_sweep_manifest(&text, std::path::Path::new("."));
    }

    #[test]
    fn near_miss_headers_fail_cleanly(samples in 0usize..5, lines in 0usize..5, bands in 0usize..5, dt in 0u32..16,
                                      drop in 0usize..6, junk in prop::collection::vec(any::<u8>(), 0..200)) {
        let keys = [
            format!("samples = {samples}"),
            format!("lines = {lines}"),
            format!("bands = {bands}"),
            format!("data type = {dt}"),
            "interleave = bsq".to_string(),
            format!("wavelength = {{{}}}", (0..bands).map(|i| (400 + i).to_string()).collect::<Vec<_>>().join(",")),
        ];
        let text: String = std::iter::once("ENVI".to_string())
            .chain(keys.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, k)| k.clone()))
            .collect::<Vec<_>>()
            .join("\n");
        match parse_envi_header(&text) {
            Ok(h) => {
                let _ = read_cube::<f64>(&h, &junk);
            }
            Err(e) => {
                let structured = matches!(e, Error::MissingKey(_) | Error::MalformedList { .. } | Error::Parse { .. });
                prop_assert!(structured);
            }
        }
    }

    #[test]
    fn mask_and_roi_files_round_trip(rows in 1usize..6, cols in 1usize..6, flags in prop::collection::vec(any::<bool>(), 36),
                                     rects in prop::collection::vec((0usize..50, 0usize..50, 0usize..50, 0usize..50), 1..5)) {
        let mask = PixelMask::new(rows, cols, flags[..rows * cols].to_vec()).unwrap();
        prop_assert_eq!(parse_mask(&format_mask(&mask)).unwrap(), mask);
        let rois: Vec<NamedRoi> = rects
            .iter()
            .enumerate()
            .map(|(i, &(a, b, c, d))| NamedRoi {
                name: format!("region {i}"),
                roi: if i % 2 == 0 { Roi::rect(a.min(c), b.min(d), a.max(c), b.max(d)) } else { Roi::Polygon(vec![(a, b), (c, d), (a, d)]) },
            })
            .collect();
        prop_assert_eq!(parse_roi_file(&format_roi_file(&rois).unwrap()).unwrap(), rois);
    }
}
