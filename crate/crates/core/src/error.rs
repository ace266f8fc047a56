use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the geometry, field, solver and bench layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sphere dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("vector is not on the unit sphere (norm {norm})")]
    NotUnitNorm { norm: f64 },

    #[error("vector is not tangent at its base point (inner product {inner})")]
    NotTangent { inner: f64 },

    #[error("tangent vector is based at a different point")]
    BaseMismatch,

    #[error("points are antipodal (inner product {inner}); logarithm and transport are undefined")]
    AntipodalPoints { inner: f64 },

    #[error("raw sparse matrix stayed numerically singular after {attempts} attempts (last sigma_min {sigma_min:e})")]
    DegenerateMatrix { attempts: usize, sigma_min: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed instance: {0}")]
    MalformedInstance(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
