//! Computational quasiconformal imaging toolkit.
//!
//! The crate models geometric image distortion as piecewise-linear
//! deformation maps over a triangulated pixel grid. The local distortion of
//! a map is its per-face Beltrami coefficient; maps with coefficient
//! magnitude below 1 everywhere are orientation preserving, and the linear
//! Beltrami solver reconstructs such a map exactly from its coefficient
//! field and boundary conditions. On top of these primitives sit bijective
//! backward warping, parametric synthetic-distortion generators, a
//! model-based restoration loop with a fold-free guarantee, and the usual
//! image quality metrics.
//!
//! The crate is `no_std` + `alloc`; every floating-point transcendental goes
//! through `libm`, so all seeded pipelines are reproducible bit-for-bit
//! across platforms. File and image IO live in the companion `qcwarp` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod beltrami;
pub mod complex;
pub mod distort;
pub mod error;
pub mod fft;
mod filter;
pub mod format;
pub mod lbs;
pub mod mesh;
pub mod metrics;
pub mod restore;
pub mod rng;
pub mod sparse;
pub mod warp;

pub use beltrami::BeltramiField;
pub use complex::Complex;
pub use distort::DistortionSpec;
pub use error::{Error, Result};
pub use lbs::{BoundaryCondition, LbsSystem};
pub use mesh::{DeformationMap, Point, TriMesh};
pub use metrics::MetricReport;
pub use restore::{RestoreConfig, RestoreResult};
pub use warp::RasterImage;
