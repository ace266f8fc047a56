//! Seeded random AVVF instances and starting points.
//!
//! The default generator follows the construction of a sparse matrix with
//! prescribed singular values: start from `diag(s)` and apply random plane
//! rotations, alternately to rows and columns, until the requested number of
//! nonzeros is reached. Rotations are orthogonal, so the singular values stay
//! exactly `s` (up to rounding). The values are `s_i = 3.3 (1 + u_i)` with
//! `u_i` uniform on (0, 1), which keeps `||A^{-1}|| < 1/3` with a 10% margin.
//!
//! [`MatrixGenerator::RescaledRaw`] instead draws a raw sparse matrix with
//! entries uniform on (-1, 1), measures its smallest singular value and scales
//! the whole matrix so that it equals 3.3. Its pattern always contains a random
//! permutation (one entry per row and column) so that empty rows or columns
//! cannot make the raw matrix structurally singular at low densities.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AvvfInstance, CsrMatrix};
use crate::error::{Error, Result};
use crate::geometry::SpherePoint;

/// Lower end of the singular values placed by the rotation generator, and the
/// `sigma_min` enforced by the rescaling generator.
pub const TARGET_SIGMA_MIN: f64 = 3.3;
/// Raw matrices with `sigma_min` below this are redrawn.
pub const DEGENERATE_SIGMA: f64 = 1e-8;
pub const MAX_GENERATION_ATTEMPTS: usize = 20;

const MATRIX_STREAM: u64 = 0;
const POINT_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixGenerator {
    /// Plane rotations applied to `diag(s)`, `s` uniform on (3.3, 6.6).
    #[default]
    Rotations,
    /// Raw sparse draw scaled to `sigma_min = 3.3`.
    RescaledRaw,
}

impl fmt::Display for MatrixGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixGenerator::Rotations => "rotations",
            MatrixGenerator::RescaledRaw => "rescaled-raw",
        })
    }
}

impl FromStr for MatrixGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotations" => Ok(MatrixGenerator::Rotations),
            "rescaled-raw" => Ok(MatrixGenerator::RescaledRaw),
            other => Err(Error::InvalidParameter(format!(
                "unknown generator {other:?}"
            ))),
        }
    }
}

/// Requested density raised to the floor `5 / n` (and capped at 1).
pub fn effective_density(n: usize, density: f64) -> f64 {
    density.max(5.0 / n as f64).min(1.0)
}

/// Point drawn componentwise uniform on (-100, 100) and normalized.
///
/// The planted solution of `generate_instance(n, _, seed)` is exactly
/// `random_start(n, seed)`, so starting a solve with the instance's own seed
/// starts at the solution.
pub fn random_start(n: usize, seed: u64) -> Result<SpherePoint> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(POINT_STREAM);
    loop {
        let draw = DVector::from_fn(n, |_, _| rng.random_range(-100.0..100.0));
        if draw.norm() >= 1e-12 {
            return SpherePoint::normalize(draw);
        }
    }
}

/// [`generate_instance_with`] using the default generator.
pub fn generate_instance(n: usize, density: f64, seed: u64) -> Result<AvvfInstance> {
    generate_instance_with(n, density, seed, MatrixGenerator::default())
}

pub fn generate_instance_with(
    n: usize,
    density: f64,
    seed: u64,
    generator: MatrixGenerator,
) -> Result<AvvfInstance> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    let density = effective_density(n, density);
    let cells = n * n;
    let nnz = ((density * cells as f64).round() as usize).clamp(n, cells);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(MATRIX_STREAM);
    let (a, sigma_min) = match generator {
        MatrixGenerator::Rotations => rotated_diagonal(&mut rng, n, nnz)?,
        MatrixGenerator::RescaledRaw => rescaled_raw(&mut rng, n, nnz)?,
    };
    let planted = random_start(n, seed)?;
    AvvfInstance::with_planted_solution(a, planted, seed, density, sigma_min)
}

fn rotated_diagonal(rng: &mut ChaCha8Rng, n: usize, nnz: usize) -> Result<(CsrMatrix, f64)> {
    let sigmas: Vec<f64> = (0..n)
        .map(|_| TARGET_SIGMA_MIN * (1.0 + rng.random_range(0.0..1.0)))
        .collect();
    let sigma_min = sigmas.iter().copied().fold(f64::INFINITY, f64::min);
    let mut m = DMatrix::from_diagonal(&DVector::from_vec(sigmas));
    let mut count = n;
    // every rotation can only grow the pattern by O(n); the cap is never hit
    // for reachable targets but bounds the loop regardless
    let max_rotations = 64 * n * n;
    let mut on_rows = true;
    for _ in 0..max_rotations {
        if count >= nnz {
            break;
        }
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let (c, s) = (theta.cos(), theta.sin());
        for k in 0..n {
            let (ai, aj) = if on_rows {
                ((i, k), (j, k))
            } else {
                ((k, i), (k, j))
            };
            let (x, y) = (m[ai], m[aj]);
            let before = (x != 0.0) as usize + (y != 0.0) as usize;
            let (nx, ny) = (c * x - s * y, s * x + c * y);
            m[ai] = nx;
            m[aj] = ny;
            count = count + (nx != 0.0) as usize + (ny != 0.0) as usize - before;
        }
        on_rows = !on_rows;
    }
    let mut triplets = Vec::with_capacity(count);
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] != 0.0 {
                triplets.push((i, j, m[(i, j)]));
            }
        }
    }
    Ok((CsrMatrix::from_triplets(n, &triplets)?, sigma_min))
}

fn rescaled_raw(rng: &mut ChaCha8Rng, n: usize, nnz: usize) -> Result<(CsrMatrix, f64)> {
    let mut last_sigma = 0.0;
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let raw = sample_pattern(rng, n, nnz)?;
        let sigma = smallest_singular_value(&raw);
        last_sigma = sigma;
        if sigma >= DEGENERATE_SIGMA {
            return Ok((raw.scaled(TARGET_SIGMA_MIN / sigma), TARGET_SIGMA_MIN));
        }
    }
    Err(Error::DegenerateMatrix {
        attempts: MAX_GENERATION_ATTEMPTS,
        sigma_min: last_sigma,
    })
}

fn sample_pattern(rng: &mut ChaCha8Rng, n: usize, nnz: usize) -> Result<CsrMatrix> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(nnz);
    for (i, &j) in perm.iter().enumerate() {
        triplets.push((i, j, rng.random_range(-1.0..1.0)));
    }
    // off-permutation cells, indexed row by row with the permutation cell skipped
    let mut extra = index::sample(rng, n * (n - 1), nnz - n).into_vec();
    extra.sort_unstable();
    for idx in extra {
        let i = idx / (n - 1);
        let c = idx % (n - 1);
        let j = if c >= perm[i] { c + 1 } else { c };
        triplets.push((i, j, rng.random_range(-1.0..1.0)));
    }
    CsrMatrix::from_triplets(n, &triplets)
}

/// Smallest singular value of the densified matrix (NaN propagates as 0).
pub fn smallest_singular_value(a: &CsrMatrix) -> f64 {
    let s = a
        .to_dense()
        .singular_values_unordered()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if s.is_nan() {
        0.0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VectorField;

    #[test]
    fn deterministic_per_seed() {
        for g in [MatrixGenerator::Rotations, MatrixGenerator::RescaledRaw] {
            let a = generate_instance_with(30, 0.05, 11, g).unwrap();
            let b = generate_instance_with(30, 0.05, 11, g).unwrap();
            assert_eq!(a, b);
            let c = generate_instance_with(30, 0.05, 12, g).unwrap();
            assert_ne!(a.matrix(), c.matrix());
        }
    }

    #[test]
    fn density_floor_and_nnz() {
        assert_eq!(effective_density(100, 0.003), 0.05);
        assert_eq!(effective_density(10, 0.9), 0.9);
        assert_eq!(effective_density(2, 0.1), 1.0);
        let raw = generate_instance_with(40, 0.003, 3, MatrixGenerator::RescaledRaw).unwrap();
        assert_eq!(raw.matrix().nnz(), 200);
        assert_eq!(raw.density(), 0.125);
        let rot = generate_instance(40, 0.003, 3).unwrap();
        assert!(rot.matrix().nnz() >= 200);
        assert!(rot.matrix().nnz() < 200 + 2 * 40);
        let full = generate_instance(5, 1.0, 3).unwrap();
        assert_eq!(full.matrix().nnz(), 25);
    }

    #[test]
    fn planted_solution_is_a_zero() {
        for g in [MatrixGenerator::Rotations, MatrixGenerator::RescaledRaw] {
            let inst = generate_instance_with(50, 0.003, 99, g).unwrap();
            assert!(inst.eval(inst.planted_solution()).unwrap().norm() <= 1e-10);
            assert!(inst.rhs_matches_planted());
            assert_eq!(inst.planted_solution(), &random_start(50, 99).unwrap());
            let sigma = smallest_singular_value(inst.matrix());
            assert!(sigma > 3.0);
            assert!((sigma - inst.sigma_min()).abs() < 1e-9);
        }
    }

    #[test]
    fn rotations_keep_singular_values_in_band() {
        let inst = generate_instance(60, 0.1, 5).unwrap();
        let s = inst.matrix().to_dense().singular_values();
        assert!(s.min() >= TARGET_SIGMA_MIN * (1.0 - 1e-12));
        assert!(s.max() <= 2.0 * TARGET_SIGMA_MIN * (1.0 + 1e-12));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            generate_instance(1, 0.5, 0),
            Err(Error::DimensionTooSmall(1))
        ));
        assert!(generate_instance(10, 0.0, 0).is_err());
        assert!(generate_instance(10, 1.5, 0).is_err());
        assert!(generate_instance(10, f64::NAN, 0).is_err());
        assert!(random_start(1, 0).is_err());
        assert!("bogus".parse::<MatrixGenerator>().is_err());
        assert_eq!(
            "rescaled-raw".parse::<MatrixGenerator>().unwrap(),
            MatrixGenerator::RescaledRaw
        );
    }

    #[test]
    fn random_start_properties() {
        let p = random_start(20, 5).unwrap();
        assert_eq!(p, random_start(20, 5).unwrap());
        assert!((p.coords().norm() - 1.0).abs() < 1e-12);
        assert_ne!(p, random_start(20, 6).unwrap());
    }
}
