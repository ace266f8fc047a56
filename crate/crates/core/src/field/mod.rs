//! Nonsmooth vector fields on the sphere.
//!
//! A field supplies its value `X(p)` (a tangent vector) and one element `V` of
//! its Clarke generalized covariant derivative at `p`, represented as an
//! ambient `n x n` matrix whose action on `T_p S^{n-1}` is what matters.

mod avvf;
mod generate;
mod io;
mod sparse;

use nalgebra::DMatrix;

pub use avvf::{sign, AvvfInstance, AVVF_RESIDUAL_TOL};
pub use generate::{
    effective_density, generate_instance, generate_instance_with, random_start,
    smallest_singular_value, MatrixGenerator, DEGENERATE_SIGMA, MAX_GENERATION_ATTEMPTS,
    TARGET_SIGMA_MIN,
};
pub use io::{read_instance, write_instance, InstanceFile, INSTANCE_FORMAT_VERSION};
pub use sparse::CsrMatrix;

use crate::error::Result;
use crate::geometry::{SpherePoint, TangentVector};

/// One selected element of the Clarke generalized covariant derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct ClarkeElement {
    pub base: SpherePoint,
    pub matrix: DMatrix<f64>,
}

/// A locally Lipschitz vector field on `S^{n-1}`.
pub trait VectorField {
    fn dim(&self) -> usize;

    /// `X(p)`; tangent at `p`.
    fn eval(&self, p: &SpherePoint) -> Result<TangentVector>;

    /// One `V in dX(p)`.
    fn clarke_element(&self, p: &SpherePoint) -> Result<ClarkeElement>;
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, p: &SpherePoint) -> Result<TangentVector> {
        (**self).eval(p)
    }

    fn clarke_element(&self, p: &SpherePoint) -> Result<ClarkeElement> {
        (**self).clarke_element(p)
    }
}
