use nalgebra::DVector;

use super::{ClarkeElement, CsrMatrix, VectorField};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{project_raw, SpherePoint, TangentVector};

/// Bound on `||X(p_*)||` at the planted solution.
pub const AVVF_RESIDUAL_TOL: f64 = 1e-10;

/// Componentwise sign with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The absolute value vector field `X(p) = (I - p p^T)(A p - |p| - b)` with a
/// planted singularity `p_*` (`b = A p_* - |p_*|`).
#[derive(Debug, Clone, PartialEq)]
pub struct AvvfInstance {
    a: CsrMatrix,
    b: DVector<f64>,
    planted: SpherePoint,
    seed: u64,
    density: f64,
    sigma_min: f64,
}

impl AvvfInstance {
    /// Assembles an instance from stored parts; only shapes are validated.
    pub fn new(
        a: CsrMatrix,
        b: DVector<f64>,
        planted: SpherePoint,
        seed: u64,
        density: f64,
        sigma_min: f64,
    ) -> Result<Self> {
        let n = a.dim();
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        check_dim(n, b.len())?;
        check_dim(n, planted.dim())?;
        Ok(Self {
            a,
            b,
            planted,
            seed,
            density,
            sigma_min,
        })
    }

    /// Builds an instance whose right-hand side makes `planted` a zero.
    pub fn with_planted_solution(
        a: CsrMatrix,
        planted: SpherePoint,
        seed: u64,
        density: f64,
        sigma_min: f64,
    ) -> Result<Self> {
        let b = planted_rhs(&a, &planted)?;
        Self::new(a, b, planted, seed, density, sigma_min)
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn planted_solution(&self) -> &SpherePoint {
        &self.planted
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// The unprojected map `A p - |p| - b`.
    pub fn ambient_residual(&self, p: &SpherePoint) -> Result<DVector<f64>> {
        let mut r = self.a.mul_vec(p.coords())?;
        for i in 0..r.len() {
            r[i] -= p.coords()[i].abs() + self.b[i];
        }
        Ok(r)
    }

    /// Whether `b` equals `A p_* - |p_*|` bit for bit.
    pub fn rhs_matches_planted(&self) -> bool {
        planted_rhs(&self.a, &self.planted).is_ok_and(|b| b == self.b)
    }
}

fn planted_rhs(a: &CsrMatrix, planted: &SpherePoint) -> Result<DVector<f64>> {
    let mut b = a.mul_vec(planted.coords())?;
    for i in 0..b.len() {
        b[i] -= planted.coords()[i].abs();
    }
    Ok(b)
}

impl VectorField for AvvfInstance {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn eval(&self, p: &SpherePoint) -> Result<TangentVector> {
        let r = self.ambient_residual(p)?;
        Ok(TangentVector::from_parts(p.clone(), project_raw(p, &r)))
    }

    /// `V = (I - p p^T)[A - diag(sgn p)] - (p^T (A p - |p| - b)) I`.
    fn clarke_element(&self, p: &SpherePoint) -> Result<ClarkeElement> {
        let r = self.ambient_residual(p)?;
        let n = self.dim();
        let pc = p.coords();
        let mut m = self.a.to_dense();
        for i in 0..n {
            m[(i, i)] -= sign(pc[i]);
        }
        // (I - p p^T) M = M - p (M^T p)^T
        let row = m.tr_mul(pc);
        m.ger(-1.0, pc, &row, 1.0);
        let shift = pc.dot(&r);
        for i in 0..n {
            m[(i, i)] -= shift;
        }
        Ok(ClarkeElement {
            base: p.clone(),
            matrix: m,
        })
    }
}

/// Dense reference used by tests: same formulas, no sparsity, no rank-one
/// tricks.
#[cfg(test)]
pub(crate) fn dense_reference(
    a: &nalgebra::DMatrix<f64>,
    b: &DVector<f64>,
    p: &DVector<f64>,
) -> (DVector<f64>, nalgebra::DMatrix<f64>) {
    let n = p.len();
    let abs_p = p.map(f64::abs);
    let f = a * p - abs_p - b;
    use nalgebra::DMatrix;
    let proj = DMatrix::identity(n, n) - p * p.transpose();
    let x = &proj * &f;
    let d = DMatrix::from_diagonal(&p.map(sign));
    let v = &proj * (a - d) - DMatrix::identity(n, n) * p.dot(&f);
    (x, v)
}

#[cfg(test)]
mod tests {
    use nalgebra::{dmatrix, dvector};

    use super::*;
    use crate::geometry::{exp, project_to_tangent};

    fn two_by_two() -> AvvfInstance {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 4.0), (1, 1, 4.0)]).unwrap();
        let planted = SpherePoint::from_slice(&[1.0, 0.0]).unwrap();
        AvvfInstance::with_planted_solution(a, planted, 0, 1.0, 4.0).unwrap()
    }

    #[test]
    fn hand_example_value() {
        let inst = two_by_two();
        assert_eq!(inst.rhs(), &dvector![3.0, 0.0]);
        let p = SpherePoint::from_slice(&[0.0, 1.0]).unwrap();
        assert_eq!(inst.ambient_residual(&p).unwrap(), dvector![-3.0, 3.0]);
        let x = inst.eval(&p).unwrap();
        assert_eq!(x.coords(), &dvector![-3.0, 0.0]);
        assert_eq!(x.norm(), 3.0);
        assert_eq!(inst.eval(inst.planted_solution()).unwrap().norm(), 0.0);
    }

    #[test]
    fn hand_example_clarke() {
        let inst = two_by_two();
        let p = SpherePoint::from_slice(&[0.0, 1.0]).unwrap();
        let v = inst.clarke_element(&p).unwrap();
        assert_eq!(v.matrix, dmatrix![1.0, 0.0; 0.0, -3.0]);
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(sign(0.0), 0.0);
        assert_eq!(sign(-0.0), 0.0);
        assert_eq!(sign(-2.0), -1.0);
        // at p = e1: diag(sgn p) = diag(1, 0) and p^T F = 0, so V = (I - e1 e1^T) diag(3, 4)
        let inst = two_by_two();
        let p = SpherePoint::from_slice(&[1.0, 0.0]).unwrap();
        let v = inst.clarke_element(&p).unwrap();
        assert_eq!(v.matrix, dmatrix![0.0, 0.0; 0.0, 4.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let inst = two_by_two();
        let p = SpherePoint::from_slice(&[0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            inst.eval(&p),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(inst.clarke_element(&p).is_err());
    }

    #[test]
    fn clarke_matches_finite_differences_at_smooth_points() {
        let a = CsrMatrix::from_triplets(
            3,
            &[
                (0, 0, 3.5),
                (0, 2, -1.0),
                (1, 1, 4.0),
                (2, 0, 0.5),
                (2, 2, 5.0),
            ],
        )
        .unwrap();
        let planted = SpherePoint::normalize(dvector![0.2, -0.7, 0.4]).unwrap();
        let inst = AvvfInstance::with_planted_solution(a, planted, 0, 0.5, 3.3).unwrap();
        let p = SpherePoint::normalize(dvector![0.5, 0.3, -0.8]).unwrap();
        let v = project_to_tangent(&p, &dvector![0.1, -0.4, 0.9]).unwrap();
        let h = 1e-6;
        let plus = exp(&p, &v.scale(h)).unwrap();
        let minus = exp(&p, &v.scale(-h)).unwrap();
        // ambient derivative of the projected expression, then projected back
        let fd = (inst.eval(&plus).unwrap().into_coords()
            - inst.eval(&minus).unwrap().into_coords())
            / (2.0 * h);
        let fd = project_raw(&p, &fd);
        let analytic = inst.clarke_element(&p).unwrap().matrix * v.coords();
        assert!((fd - analytic).norm() < 1e-4);
    }

    #[test]
    fn matches_dense_reference() {
        let a = CsrMatrix::from_triplets(3, &[(0, 1, 3.0), (1, 0, -2.0), (2, 2, 4.5), (0, 0, 1.0)])
            .unwrap();
        let planted = SpherePoint::normalize(dvector![1.0, 2.0, -2.0]).unwrap();
        let inst = AvvfInstance::with_planted_solution(a.clone(), planted, 1, 0.4, 3.3).unwrap();
        let p = SpherePoint::normalize(dvector![-0.3, 0.1, 0.9]).unwrap();
        let (x, v) = dense_reference(&a.to_dense(), inst.rhs(), p.coords());
        assert!((inst.eval(&p).unwrap().into_coords() - x).abs().max() < 1e-14);
        assert!((inst.clarke_element(&p).unwrap().matrix - v).abs().max() < 1e-14);
    }
}
