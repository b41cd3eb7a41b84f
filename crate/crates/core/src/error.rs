//! Error type shared by every module of the toolkit.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised by toolkit operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violated a documented precondition.
    InvalidArgument(String),
    /// The reference mesh contains a face with (near-)zero area.
    InvalidMesh { face: usize },
    /// A map is locally degenerate: |f_z| fell below the threshold on a face.
    DegenerateMap { face: usize },
    /// A Beltrami coefficient left the admissible disk |mu| < 1.
    Inadmissible { face: Option<usize>, magnitude: f64 },
    /// No boundary conditions were supplied; the solution is not unique.
    Underdetermined,
    /// Two objects that must share a shape do not.
    SizeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// A deformation map contains flipped faces (first offenders listed).
    Fold { faces: Vec<usize> },
    /// An iterative solver failed to reach its tolerance.
    NumericalFailure { residual: f64, iterations: usize },
    /// A byte stream does not hold the expected file format.
    Format(String),
}

impl Error {
    /// Machine-parsable category token; the CLI maps these onto exit codes.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_)
            | Error::SizeMismatch { .. }
            | Error::Underdetermined
            | Error::Format(_) => "input",
            Error::InvalidMesh { .. }
            | Error::DegenerateMap { .. }
            | Error::Inadmissible { .. }
            | Error::NumericalFailure { .. } => "numeric",
            Error::Fold { .. } => "fold",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            Error::InvalidMesh { face } => {
                write!(
                    f,
                    "invalid mesh: face {face} has (near-)zero reference area"
                )
            }
            Error::DegenerateMap { face } => {
                write!(f, "degenerate map: |f_z| vanishes on face {face}")
            }
            Error::Inadmissible { face, magnitude } => match face {
                Some(face) => write!(
                    f,
                    "inadmissible Beltrami coefficient |mu| = {magnitude} on face {face}"
                ),
                None => write!(f, "inadmissible Beltrami coefficient |mu| = {magnitude}"),
            },
            Error::Underdetermined => {
                write!(f, "underdetermined system: no boundary conditions given")
            }
            Error::SizeMismatch { expected, got } => write!(
                f,
                "size mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::Fold { faces } => {
                write!(f, "map is not bijective: flipped faces {faces:?}")
            }
            Error::NumericalFailure {
                residual,
                iterations,
            } => write!(
                f,
                "solver did not converge: residual {residual:.3e} after {iterations} iterations"
            ),
            Error::Format(what) => write!(f, "bad file format: {what}"),
        }
    }
}

impl core::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
