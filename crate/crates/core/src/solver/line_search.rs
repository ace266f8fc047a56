use thiserror::Error;

use super::{Direction, SolverConfig};
use crate::error::Error;
use crate::field::VectorField;
use crate::geometry::{exp_raw, SpherePoint, TangentVector};

/// Memory index `m_k` under the rule `m_0 = 0`, `m_k = min(m_{k-1} + 1, M)`.
pub fn memory_index(k: usize, depth: usize) -> usize {
    k.min(depth)
}

/// `max_{0 <= j <= m_k} phi(p_{k-j})` with `merits[i] = phi(p_i)`.
///
/// # Panics
///
/// Panics if `merits` holds fewer than `k + 1` values.
pub fn nonmonotone_reference(merits: &[f64], k: usize, depth: usize) -> f64 {
    let m = memory_index(k, depth);
    merits[k - m..=k]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    pub alpha: f64,
    pub backtracks: usize,
    /// `exp_p(alpha v)` and the field data there, reused by the driver.
    pub point: SpherePoint,
    pub value: TangentVector,
    pub merit: f64,
}

#[derive(Debug, Error)]
pub enum LineSearchError {
    #[error("direction is not a descent direction (slope {0})")]
    NotDescent(f64),
    #[error("no acceptable step after {0} backtracks")]
    Stall(usize),
    #[error(transparent)]
    Field(#[from] Error),
}

/// Backtracks `alpha = 1, beta, beta^2, ...` until
/// `phi(exp_p(alpha v)) <= reference + sigma * alpha * slope`.
pub fn line_search<F: VectorField + ?Sized>(
    field: &F,
    p: &SpherePoint,
    dir: &Direction,
    reference: f64,
    cfg: &SolverConfig,
) -> Result<LineSearchOutcome, LineSearchError> {
    if !(dir.slope < 0.0) {
        return Err(LineSearchError::NotDescent(dir.slope));
    }
    let mut alpha = 1.0;
    for backtracks in 0..=cfg.max_backtracks {
        let point = exp_raw(p, &(dir.vector.coords() * alpha));
        let value = field.eval(&point)?;
        let merit = 0.5 * value.coords().norm_squared();
        if merit <= reference + cfg.sigma * alpha * dir.slope {
            return Ok(LineSearchOutcome {
                alpha,
                backtracks,
                point,
                value,
                merit,
            });
        }
        alpha *= cfg.beta;
    }
    Err(LineSearchError::Stall(cfg.max_backtracks))
}

#[cfg(test)]
mod tests {
    use nalgebra::{dvector, DMatrix, DVector};

    use super::*;
    use crate::field::ClarkeElement;
    use crate::geometry::{exp, project_to_tangent};
    use crate::solver::DirectionKind;

    #[test]
    fn reference_examples() {
        let merits = [9.0, 1.0, 4.0];
        assert_eq!(nonmonotone_reference(&merits, 2, 0), 4.0);
        assert_eq!(nonmonotone_reference(&merits, 0, 7), 9.0);
        assert_eq!(nonmonotone_reference(&merits, 2, 5), 9.0);
        assert_eq!(nonmonotone_reference(&merits, 2, 1), 4.0);
        assert_eq!(memory_index(0, 3), 0);
        assert_eq!(memory_index(10, 3), 3);
    }

    /// `X(p) = (I - p p^T) t`; along the geodesic from `p` towards `t` the
    /// merit is `|t|^2 sin^2(theta - s) / 2` in the arc parameter `s`.
    struct Pull(DVector<f64>);

    impl VectorField for Pull {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn eval(&self, p: &SpherePoint) -> crate::error::Result<TangentVector> {
            project_to_tangent(p, &self.0)
        }
        fn clarke_element(&self, p: &SpherePoint) -> crate::error::Result<ClarkeElement> {
            let n = self.dim();
            let shift = p.coords().dot(&self.0);
            Ok(ClarkeElement {
                base: p.clone(),
                matrix: DMatrix::identity(n, n) * -shift,
            })
        }
    }

    fn direction(field: &Pull, p: &SpherePoint, scale: f64) -> Direction {
        let g = crate::solver::merit_gradient(field, p).unwrap();
        Direction {
            slope: -scale * g.coords().norm_squared(),
            vector: g.scale(-scale),
            kind: DirectionKind::GradientFallback,
        }
    }

    #[test]
    fn full_step_accepted_when_it_decreases_enough() {
        // Near the zero, the Newton step lands almost exactly on it.
        let field = Pull(dvector![0.0, 0.0, 1.0]);
        let p = SpherePoint::normalize(dvector![0.05, 0.0, 1.0]).unwrap();
        let d = crate::solver::newton_direction(&field, &p, &SolverConfig::default()).unwrap();
        assert_eq!(d.kind, DirectionKind::Newton);
        let phi0 = crate::solver::merit(&field, &p).unwrap();
        let out = line_search(&field, &p, &d, phi0, &SolverConfig::default()).unwrap();
        assert_eq!((out.alpha, out.backtracks), (1.0, 0));
        assert!(out.merit <= phi0 + 1e-4 * d.slope);
    }

    #[test]
    fn unit_curvature_quadratic_model() {
        // Tiny angle theta: phi(s) ~ (theta - s)^2 / 2 has unit curvature and
        // the Newton step lands within O(theta^3) of the zero, so Armijo at
        // alpha = 1 holds for any sigma < 1/2.
        let theta: f64 = 1e-3;
        let field = Pull(dvector![0.0, 1.0]);
        let p = SpherePoint::from_slice(&[theta.sin(), theta.cos()]).unwrap();
        let d = crate::solver::newton_direction(&field, &p, &SolverConfig::default()).unwrap();
        let phi0 = crate::solver::merit(&field, &p).unwrap();
        let cfg = SolverConfig {
            sigma: 0.49,
            ..SolverConfig::default()
        };
        let out = line_search(&field, &p, &d, phi0, &cfg).unwrap();
        assert_eq!(out.alpha, 1.0);
        // the Newton step has length tan(theta), leaving angle theta - tan(theta)
        let expected = 0.5 * (theta - theta.tan()).sin().powi(2);
        assert!((out.merit - expected).abs() <= 1e-6 * expected);
    }

    #[test]
    fn long_step_backtracks() {
        // A gradient step long enough to rotate past the zero by a quarter
        // turn raises the merit and must be cut back once.
        let field = Pull(dvector![0.0, 1.0, 0.0]);
        let p = SpherePoint::normalize(dvector![1.0, 0.2, 0.0]).unwrap();
        let angle = p.coords()[1].acos();
        let g = crate::solver::merit_gradient(&field, &p).unwrap();
        let d = direction(&field, &p, (angle + std::f64::consts::FRAC_PI_2) / g.norm());
        let phi0 = crate::solver::merit(&field, &p).unwrap();
        let cfg = SolverConfig::default();
        let out = line_search(&field, &p, &d, phi0, &cfg).unwrap();
        assert_eq!(out.backtracks, 1);
        assert_eq!(out.alpha, 0.5f64.powi(out.backtracks as i32));
        let q = exp(&p, &d.vector.scale(out.alpha)).unwrap();
        assert!((q.coords() - out.point.coords()).norm() < 1e-15);
        assert!(out.merit <= phi0 + cfg.sigma * out.alpha * d.slope);
    }

    #[test]
    fn rejects_non_descent() {
        let field = Pull(dvector![0.0, 1.0]);
        let p = SpherePoint::normalize(dvector![1.0, 0.3]).unwrap();
        let mut d = direction(&field, &p, 1.0);
        d.slope = 0.0;
        assert!(matches!(
            line_search(&field, &p, &d, 1.0, &SolverConfig::default()),
            Err(LineSearchError::NotDescent(_))
        ));
    }

    #[test]
    fn stalls_when_slope_is_a_lie() {
        let field = Pull(dvector![0.0, 1.0]);
        let p = SpherePoint::normalize(dvector![1.0, 0.3]).unwrap();
        // ascent vector with a claimed negative slope
        let mut d = direction(&field, &p, -1.0);
        d.slope = -1.0;
        let phi0 = crate::solver::merit(&field, &p).unwrap();
        let cfg = SolverConfig {
            max_backtracks: 10,
            ..SolverConfig::default()
        };
        assert!(matches!(
            line_search(&field, &p, &d, phi0, &cfg),
            Err(LineSearchError::Stall(10))
        ));
    }
}
