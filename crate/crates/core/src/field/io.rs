//! Versioned JSON instance files.
//!
//! Floats are written in shortest round-trip decimal form and parsed with
//! correct rounding, so write followed by read reproduces every bit.

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{AvvfInstance, CsrMatrix};
use crate::error::{Error, Result};
use crate::geometry::SpherePoint;

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub n: usize,
    pub seed: u64,
    pub density: f64,
    pub sigma_min: f64,
    /// `[row, col, value]`, row-major sorted.
    #[serde(rename = "A")]
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub p_star: Vec<f64>,
}

impl From<&AvvfInstance> for InstanceFile {
    fn from(inst: &AvvfInstance) -> Self {
        Self {
            version: INSTANCE_FORMAT_VERSION,
            n: inst.matrix().dim(),
            seed: inst.seed(),
            density: inst.density(),
            sigma_min: inst.sigma_min(),
            a: inst.matrix().triplets(),
            b: inst.rhs().iter().copied().collect(),
            p_star: inst.planted_solution().coords().iter().copied().collect(),
        }
    }
}

impl TryFrom<InstanceFile> for AvvfInstance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.version != INSTANCE_FORMAT_VERSION {
            return Err(Error::MalformedInstance(format!(
                "unsupported version {}",
                file.version
            )));
        }
        if file.b.len() != file.n || file.p_star.len() != file.n {
            return Err(Error::MalformedInstance(format!(
                "n = {} but b has {} and p_star has {} entries",
                file.n,
                file.b.len(),
                file.p_star.len()
            )));
        }
        let a = CsrMatrix::from_triplets(file.n, &file.a)?;
        let planted = SpherePoint::new(DVector::from_vec(file.p_star))
            .map_err(|e| Error::MalformedInstance(format!("p_star: {e}")))?;
        AvvfInstance::new(
            a,
            DVector::from_vec(file.b),
            planted,
            file.seed,
            file.density,
            file.sigma_min,
        )
        .map_err(|e| match e {
            Error::MalformedInstance(_) => e,
            other => Error::MalformedInstance(other.to_string()),
        })
    }
}

impl AvvfInstance {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceFile::from(self)).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::MalformedInstance(e.to_string()))?;
        file.try_into()
    }
}

pub fn write_instance(inst: &AvvfInstance, path: &Path) -> Result<()> {
    let mut text = inst.to_json();
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn read_instance(path: &Path) -> Result<AvvfInstance> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    AvvfInstance::from_json(&text)
}
