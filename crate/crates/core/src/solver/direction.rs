//! Search directions: the Newton step in tangent coordinates, with the
//! negative merit gradient as fallback when the Newton system is not
//! acceptably solvable.

use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SolverConfig;
use crate::error::Error;
use crate::field::{ClarkeElement, VectorField};
use crate::geometry::{project_raw, tangent_basis, SpherePoint, TangentVector};

/// Directions shorter than this are treated as zero (stationary point).
pub const ZERO_DIRECTION_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    Newton,
    GradientFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub vector: TangentVector,
    pub kind: DirectionKind,
    /// Directional derivative of the merit along `vector`.
    pub slope: f64,
}

#[derive(Debug, Error)]
pub enum DirectionError {
    #[error("search direction vanished")]
    ZeroDirection,
    #[error("Clarke element is singular on the tangent space")]
    SingularClarkeElement,
    #[error(transparent)]
    Field(#[from] Error),
}

/// `phi(p) = ||X(p)||^2 / 2`.
pub fn merit<F: VectorField + ?Sized>(field: &F, p: &SpherePoint) -> Result<f64, Error> {
    Ok(0.5 * field.eval(p)?.coords().norm_squared())
}

/// Riemannian gradient of the merit, `(I - p p^T) V^T X(p)`.
pub fn merit_gradient<F: VectorField + ?Sized>(
    field: &F,
    p: &SpherePoint,
) -> Result<TangentVector, Error> {
    let x = field.eval(p)?;
    let v = field.clarke_element(p)?;
    Ok(gradient_from(&x, &v))
}

pub(crate) fn gradient_from(x: &TangentVector, v: &ClarkeElement) -> TangentVector {
    let g = v.matrix.tr_mul(x.coords());
    TangentVector::from_parts(x.base().clone(), project_raw(x.base(), &g))
}

/// Direction for the globalized method at `p` (Newton when solvable,
/// gradient fallback otherwise).
pub fn newton_direction<F: VectorField + ?Sized>(
    field: &F,
    p: &SpherePoint,
    cfg: &SolverConfig,
) -> Result<Direction, DirectionError> {
    let x = field.eval(p)?;
    let v = field.clarke_element(p)?;
    direction_from(&x, &v, cfg, true)
}

/// Shared by both drivers; `fallback = false` turns an unsolvable Newton
/// system into `SingularClarkeElement`.
pub(crate) fn direction_from(
    x: &TangentVector,
    elem: &ClarkeElement,
    cfg: &SolverConfig,
    fallback: bool,
) -> Result<Direction, DirectionError> {
    let grad = gradient_from(x, elem);
    let direction = match solve_newton(x, elem, cfg) {
        Some(step) => {
            let slope = grad.coords().dot(&step);
            Direction {
                vector: TangentVector::from_parts(x.base().clone(), step),
                kind: DirectionKind::Newton,
                slope,
            }
        }
        None if fallback => Direction {
            slope: -grad.coords().norm_squared(),
            vector: grad.scale(-1.0),
            kind: DirectionKind::GradientFallback,
        },
        None => return Err(DirectionError::SingularClarkeElement),
    };
    if direction.vector.norm() < ZERO_DIRECTION_TOL {
        return Err(DirectionError::ZeroDirection);
    }
    Ok(direction)
}

/// Solves `Q^T V Q w = -Q^T X` and returns `v = Q w` when the reduced system is
/// well conditioned and the ambient residual is small.
fn solve_newton(
    x: &TangentVector,
    elem: &ClarkeElement,
    cfg: &SolverConfig,
) -> Option<DVector<f64>> {
    let basis = tangent_basis(x.base());
    let reduced = basis.compress(&elem.matrix);
    let rhs = -basis.coords_of(x.coords());
    let lu = reduced.clone().lu();
    if !lu.is_invertible() {
        return None;
    }
    let w = lu.solve(&rhs)?;
    if !w.iter().all(|c| c.is_finite()) {
        return None;
    }
    if condition_estimate(&reduced, &lu) >= cfg.condition_cap {
        return None;
    }
    let step = basis.embed(&w);
    let residual = (&elem.matrix * &step + x.coords()).norm();
    (residual <= cfg.solve_residual_factor * x.norm()).then_some(step)
}

/// Transposed solves reusing the factors of `P B = L U`.
struct Factors {
    l: DMatrix<f64>,
    u: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factors {
    fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        self.lu.solve(b)
    }

    // B^T = U^T L^T P
    fn solve_transpose(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        let z = self.u.tr_solve_upper_triangular(b)?;
        let mut w = self.l.tr_solve_lower_triangular(&z)?;
        self.lu.p().inv_permute_rows(&mut w);
        Some(w)
    }
}

/// 1-norm condition estimate `||B||_1 * est(||B^{-1}||_1)` (Hager's method with
/// Higham's alternating-sign safeguard). Never exceeds the true value.
pub(crate) fn condition_estimate(
    b: &DMatrix<f64>,
    lu: &LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
) -> f64 {
    let m = b.nrows();
    let norm_b = (0..m)
        .map(|j| b.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let factors = Factors {
        l: lu.l(),
        u: lu.u(),
        lu: lu.clone(),
    };
    match inverse_norm_estimate(&factors, m) {
        Some(inv) => norm_b * inv,
        None => f64::INFINITY,
    }
}

fn inverse_norm_estimate(f: &Factors, m: usize) -> Option<f64> {
    let one_norm = |v: &DVector<f64>| v.iter().map(|c| c.abs()).sum::<f64>();
    let mut x = DVector::from_element(m, 1.0 / m as f64);
    let mut est = 0.0;
    for iter in 0..5 {
        let y = f.solve(&x)?;
        let new_est = one_norm(&y);
        if iter > 0 && new_est <= est {
            break;
        }
        est = new_est;
        let xi = y.map(|c| if c >= 0.0 { 1.0 } else { -1.0 });
        let z = f.solve_transpose(&xi)?;
        let (j, zj) = z
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, c)| {
                if c.abs() > acc.1 {
                    (i, c.abs())
                } else {
                    acc
                }
            });
        if iter > 0 && zj <= z.dot(&x) {
            break;
        }
        x = DVector::zeros(m);
        x[j] = 1.0;
    }
    let alt = if m > 1 {
        DVector::from_fn(m, |i, _| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / (m - 1) as f64)
        })
    } else {
        DVector::from_element(1, 1.0)
    };
    let alt_est = 2.0 * one_norm(&f.solve(&alt)?) / (3.0 * m as f64);
    let out = est.max(alt_est);
    out.is_finite().then_some(out)
}
