//! File formats: ENVI-style cubes, spectrum text, signature libraries and the
//! small line-oriented inputs of the command-line tool.

mod envi;
mod plain;
mod signature;
mod spectrum;

pub use envi::{
    cube_paths, format_envi_header, load_cube, parse_envi_header, read_cube, save_cube, write_cube, ByteOrder,
    EnviHeader, BIT_DEPTH_KEY, DATA_TYPE_F32, DATA_TYPE_F64, DATA_TYPE_I16, DATA_TYPE_U16, DATA_TYPE_U8,
    DEFAULT_BIT_DEPTH,
};
pub use plain::{
    format_mask, format_roi_file, format_scene_file, format_sweep_manifest, load_scene, load_sweep, parse_mask,
    parse_roi_file, parse_scene_file, parse_sweep_manifest, read_mask, read_roi_file, NamedRoi, PaletteEntry,
    SceneFile, SweepEntry,
};
pub use signature::{
    export_library, format_signature_record, library_file_names, parse_signature_record, read_library,
    read_signature_record, slug, write_signature_record, SIGNATURE_EXT,
};
pub use spectrum::{
    format_irradiance_log, format_spectrum_file, parse_irradiance_log, parse_spectrum_file, read_irradiance_log,
    read_spectrum_file, series_from_files, write_spectrum_file, SpectrumFile, LOG_TIME_COLUMN,
};
