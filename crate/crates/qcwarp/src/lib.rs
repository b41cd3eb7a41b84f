//! Standard-library companion to `qcwarp-core`: image and file IO, spec
//! manifests, report serialization, grid visualization, and the error/exit
//! taxonomy shared with the `qcwarp` binary.

pub mod error;
pub mod files;
pub mod image_io;
pub mod manifest;
pub mod render;
pub mod report;

pub use qcwarp_core as core;
