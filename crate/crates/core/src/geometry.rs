//! Exact primitives on the unit sphere S^{n-1} embedded in R^n.
//!
//! Points are unit vectors, tangent vectors at `p` are ambient vectors
//! orthogonal to `p`, and the metric is the one induced by the Euclidean inner
//! product. Every map here is the closed-form geodesic version (no
//! retractions), so `exp`, `log`, `distance` and `parallel_transport` agree
//! with each other to rounding.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// Tolerance on `| ||p|| - 1 |` accepted when constructing a point.
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// Relative tolerance on `<p, v>` accepted when constructing a tangent vector.
pub const TANGENCY_TOL: f64 = 1e-10;
/// `log` and `parallel_transport` refuse pairs with `<p, q> <= -1 + ANTIPODAL_TOL`.
pub const ANTIPODAL_TOL: f64 = 1e-10;

/// A point on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: DVector<f64>,
}

impl SpherePoint {
    /// Wraps `coords`, which must already have unit norm.
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        let norm = coords.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnitNorm { norm });
        }
        Ok(Self { coords })
    }

    /// Radially projects a nonzero vector onto the sphere.
    pub fn normalize(coords: DVector<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        let norm = coords.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::NotUnitNorm { norm });
        }
        Ok(Self {
            coords: coords / norm,
        })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(values))
    }

    /// The `i`-th standard basis vector of R^n.
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidParameter(format!(
                "basis index {i} out of range for n = {n}"
            )));
        }
        let mut coords = DVector::zeros(n);
        coords[i] = 1.0;
        Self::new(coords)
    }

    // Used for results that are unit by construction up to rounding.
    fn renormalized(coords: DVector<f64>) -> Self {
        let norm = coords.norm();
        Self {
            coords: coords / norm,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.coords.dot(&other.coords)
    }
}

/// An ambient vector orthogonal to its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: SpherePoint,
    coords: DVector<f64>,
}

impl TangentVector {
    /// Checks tangency of `coords` at `base` (no projection is applied).
    pub fn new(base: SpherePoint, coords: DVector<f64>) -> Result<Self> {
        check_dim(base.dim(), coords.len())?;
        let inner = base.coords.dot(&coords);
        if !inner.is_finite() || inner.abs() > TANGENCY_TOL * coords.norm().max(1.0) {
            return Err(Error::NotTangent { inner });
        }
        Ok(Self { base, coords })
    }

    pub fn zero(base: &SpherePoint) -> Self {
        Self {
            coords: DVector::zeros(base.dim()),
            base: base.clone(),
        }
    }

    pub(crate) fn from_parts(base: SpherePoint, coords: DVector<f64>) -> Self {
        debug_assert_eq!(base.dim(), coords.len());
        Self { base, coords }
    }

    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn dot(&self, other: &TangentVector) -> f64 {
        self.coords.dot(&other.coords)
    }

    pub fn scale(&self, factor: f64) -> TangentVector {
        Self {
            base: self.base.clone(),
            coords: &self.coords * factor,
        }
    }
}

/// Orthonormal basis of `T_p S^{n-1}` stored as the columns of an `n x (n-1)`
/// matrix, built from the Householder reflector that sends `e_1` to `+-p`.
#[derive(Debug, Clone)]
pub struct TangentBasis {
    base: SpherePoint,
    columns: DMatrix<f64>,
    reflector: DVector<f64>,
    tau: f64,
}

impl TangentBasis {
    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    // H u with H = I - tau w w^T.
    fn reflect(&self, u: &DVector<f64>) -> DVector<f64> {
        let s = self.tau * self.reflector.dot(u);
        u - &self.reflector * s
    }

    /// Coordinates `Q^T u` of an ambient vector in this basis.
    pub fn coords_of(&self, u: &DVector<f64>) -> DVector<f64> {
        let h = self.reflect(u);
        h.rows(1, h.len() - 1).into_owned()
    }

    /// The tangent vector `Q y` with coordinates `y`.
    pub fn embed(&self, y: &DVector<f64>) -> DVector<f64> {
        let n = self.base.dim();
        let mut full = DVector::zeros(n);
        full.rows_mut(1, n - 1).copy_from(y);
        self.reflect(&full)
    }

    /// The compressed operator `Q^T M Q` of an ambient `n x n` matrix, in
    /// O(n^2) via two rank-one updates.
    pub fn compress(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.base.dim();
        let w = &self.reflector;
        // H M = M - tau w (M^T w)^T
        let row = m.tr_mul(w);
        let mut hm = m.clone();
        hm.ger(-self.tau, w, &row, 1.0);
        // (H M) H = HM - tau (HM w) w^T
        let col = &hm * w;
        hm.ger(-self.tau, &col, w, 1.0);
        hm.view((1, 1), (n - 1, n - 1)).into_owned()
    }
}

/// `(I - p p^T) u`, based at `p`.
pub fn project_to_tangent(p: &SpherePoint, u: &DVector<f64>) -> Result<TangentVector> {
    check_dim(p.dim(), u.len())?;
    Ok(TangentVector::from_parts(p.clone(), project_raw(p, u)))
}

pub(crate) fn project_raw(p: &SpherePoint, u: &DVector<f64>) -> DVector<f64> {
    let s = p.coords.dot(u);
    u - &p.coords * s
}

fn check_base(p: &SpherePoint, v: &TangentVector) -> Result<()> {
    check_dim(p.dim(), v.coords.len())?;
    if v.base.coords != p.coords {
        return Err(Error::BaseMismatch);
    }
    Ok(())
}

/// Exponential map `cos(|v|) p + sin(|v|) v / |v|`.
pub fn exp(p: &SpherePoint, v: &TangentVector) -> Result<SpherePoint> {
    check_base(p, v)?;
    Ok(exp_raw(p, &v.coords))
}

pub(crate) fn exp_raw(p: &SpherePoint, v: &DVector<f64>) -> SpherePoint {
    let t = v.norm();
    let sinc = if t < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    };
    SpherePoint::renormalized(&p.coords * t.cos() + v * sinc)
}

/// Inverse of [`exp`] inside the injectivity radius.
pub fn log(p: &SpherePoint, q: &SpherePoint) -> Result<TangentVector> {
    check_dim(p.dim(), q.dim())?;
    let inner = p.dot(q);
    if inner <= -1.0 + ANTIPODAL_TOL {
        return Err(Error::AntipodalPoints { inner });
    }
    let w = &q.coords - &p.coords * inner;
    let wn = w.norm();
    if wn == 0.0 {
        return Ok(TangentVector::zero(p));
    }
    let theta = wn.atan2(inner);
    Ok(TangentVector::from_parts(p.clone(), w * (theta / wn)))
}

/// Geodesic distance in `[0, pi]`.
pub fn distance(p: &SpherePoint, q: &SpherePoint) -> Result<f64> {
    check_dim(p.dim(), q.dim())?;
    let inner = p.dot(q).clamp(-1.0, 1.0);
    let w = &q.coords - &p.coords * inner;
    Ok(w.norm().atan2(inner))
}

/// Parallel transport of `v` from `p` to `q` along the minimizing geodesic.
///
/// With `u` the unit initial direction of the geodesic and `theta = d(p, q)`,
/// the component of `v` along `u` is rotated to `cos(theta) u - sin(theta) p`
/// and the rest is left alone. This equals
/// `v - <q, v> / (1 + <p, q>) (p + q)` but stays an isometry to rounding even
/// near antipodal pairs, where that form cancels badly.
pub fn parallel_transport(
    p: &SpherePoint,
    q: &SpherePoint,
    v: &TangentVector,
) -> Result<TangentVector> {
    check_base(p, v)?;
    check_dim(p.dim(), q.dim())?;
    let inner = p.dot(q);
    if inner <= -1.0 + ANTIPODAL_TOL {
        return Err(Error::AntipodalPoints { inner });
    }
    let mut u = &q.coords - &p.coords * inner;
    let sin = u.norm();
    if sin == 0.0 {
        return Ok(TangentVector::from_parts(q.clone(), v.coords.clone()));
    }
    u /= sin;
    // re-orthogonalize so the rotation below is orthogonal to rounding
    u -= &p.coords * p.coords.dot(&u);
    u /= u.norm();
    let theta = sin.atan2(inner);
    let along = u.dot(&v.coords);
    let moved = &v.coords + (&u * (theta.cos() - 1.0) - &p.coords * theta.sin()) * along;
    Ok(TangentVector::from_parts(q.clone(), moved))
}

/// Deterministic orthonormal basis of the tangent space at `p`.
pub fn tangent_basis(p: &SpherePoint) -> TangentBasis {
    let n = p.dim();
    let sign = if p.coords[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = p.coords.clone();
    w[0] += sign;
    let tau = 2.0 / w.norm_squared();
    let mut columns = DMatrix::zeros(n, n - 1);
    for j in 1..n {
        let mut col = columns.column_mut(j - 1);
        let s = tau * w[j];
        for i in 0..n {
            col[i] = -s * w[i];
        }
        col[j] += 1.0;
    }
    TangentBasis {
        base: p.clone(),
        columns,
        reflector: w,
        tau,
    }
}
