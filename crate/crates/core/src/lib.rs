//! Newton-type solvers for singularities of nonsmooth vector fields on the
//! unit sphere `S^{n-1}`, with the absolute value vector field
//! `X(p) = (I - p p^T)(A p - |p| - b)` as the reference problem family and a
//! seeded batch harness for comparing the methods.
//!
//! ```
//! use nsnewton::field::{generate_instance, random_start};
//! use nsnewton::solver::{gnm_solve, SolverConfig};
//!
//! let inst = generate_instance(30, 0.003, 7).unwrap();
//! let p0 = random_start(30, 1234).unwrap();
//! let trace = gnm_solve(&inst, &p0, &SolverConfig::default()).unwrap();
//! println!("{} after {} steps", trace.status, trace.iterations());
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod field;
pub mod geometry;
pub mod solver;

pub use bench::{BenchPlan, BenchRow, RunSummary};
pub use error::{Error, Result};
pub use field::{AvvfInstance, ClarkeElement, MatrixGenerator, VectorField};
pub use geometry::{SpherePoint, TangentBasis, TangentVector};
pub use solver::{Method, SolveStatus, SolveTrace, SolverConfig};
