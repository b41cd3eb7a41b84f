//! Distortion-spec JSON loading: a single spec object or a batch manifest
//! holding a JSON array of specs.

use std::fs;
use std::path::Path;

use qcwarp_core::DistortionSpec;

use crate::error::{CliError, CliResult};

pub struct SpecSet {
    pub specs: Vec<DistortionSpec>,
    pub batch: bool,
}

pub fn load_specs(path: &Path) -> CliResult<SpecSet> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.is_array() {
        let specs: Vec<DistortionSpec> = serde_json::from_value(value)?;
        if specs.is_empty() {
            return Err(CliError::input("batch manifest is empty".to_string()));
        }
        Ok(SpecSet { specs, batch: true })
    } else {
        let spec: DistortionSpec = serde_json::from_value(value)?;
        Ok(SpecSet {
            specs: vec![spec],
            batch: false,
        })
    }
}

/// Inserts a zero-padded index before the extension: out.png -> out_003.png.
pub fn indexed_path(path: &Path, index: usize) -> std::path::PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{index:03}.{ext}"),
        None => format!("{stem}_{index:03}"),
    };
    path.with_file_name(name)
}
