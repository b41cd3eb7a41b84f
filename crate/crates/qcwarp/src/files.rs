//! File wrappers for the QCM1 map and QCB1 field formats.

use std::fs;
use std::path::Path;

use qcwarp_core::{format, BeltramiField, DeformationMap};

use crate::error::{CliError, CliResult};

pub fn read_map(path: &Path) -> CliResult<DeformationMap> {
    let bytes =
        fs::read(path).map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
    Ok(format::decode_map(&bytes)?)
}

pub fn write_map(path: &Path, map: &DeformationMap) -> CliResult<()> {
    fs::write(path, format::encode_map(map))
        .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}

pub fn read_field(path: &Path) -> CliResult<BeltramiField> {
    let bytes =
        fs::read(path).map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
    Ok(format::decode_field(&bytes)?)
}

pub fn write_field(path: &Path, field: &BeltramiField) -> CliResult<()> {
    fs::write(path, format::encode_field(field))
        .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}
