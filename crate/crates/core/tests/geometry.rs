use nalgebra::DVector;
use proptest::prelude::*;

use nsnewton::geometry::{
    distance, exp, log, parallel_transport, project_to_tangent, tangent_basis, SpherePoint,
    TangentVector,
};

fn point(n: usize) -> impl Strategy<Value = SpherePoint> {
    prop::collection::vec(-1.0..1.0f64, n)
        .prop_filter("away from the origin", |v| {
            v.iter().map(|x| x * x).sum::<f64>() > 1e-4
        })
        .prop_map(|v| SpherePoint::normalize(DVector::from_vec(v)).unwrap())
}

/// A point with a tangent vector of length below `max_len`.
fn point_and_tangent(
    n: usize,
    max_len: f64,
) -> impl Strategy<Value = (SpherePoint, TangentVector)> {
    (
        point(n),
        prop::collection::vec(-1.0..1.0f64, n),
        0.0..max_len,
    )
        .prop_map(|(p, raw, len)| {
            let t = project_to_tangent(&p, &DVector::from_vec(raw)).unwrap();
            let norm = t.norm();
            let v = if norm > 1e-9 {
                t.scale(len / norm)
            } else {
                TangentVector::zero(&p)
            };
            (p, v)
        })
}

fn dim() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(3), 4usize..40]
}

proptest! {
    #[test]
    fn exp_stays_on_sphere((p, v) in dim().prop_flat_map(|n| point_and_tangent(n, 10.0))) {
        let q = exp(&p, &v).unwrap();
        prop_assert!((q.coords().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_inverts_exp_inside_injectivity_radius(
        (p, v) in dim().prop_flat_map(|n| point_and_tangent(n, 3.0))
    ) {
        let q = exp(&p, &v).unwrap();
        let w = log(&p, &q).unwrap();
        prop_assert!((w.coords() - v.coords()).norm() <= 1e-9);
        prop_assert!(w.coords().dot(p.coords()).abs() <= 1e-10);
        prop_assert!((distance(&p, &q).unwrap() - v.norm()).abs() <= 1e-9);
    }

    #[test]
    fn transport_is_an_isometry_into_the_target_tangent_space(
        (p, v, q) in dim().prop_flat_map(|n| (point_and_tangent(n, 5.0), point(n)))
            .prop_map(|((p, v), q)| (p, v, q))
            .prop_filter("not antipodal", |(p, _, q)| p.dot(q) > -0.99)
    ) {
        let u = parallel_transport(&p, &q, &v).unwrap();
        prop_assert!((u.norm() - v.norm()).abs() <= 1e-12 * (1.0 + v.norm()));
        prop_assert!(u.coords().dot(q.coords()).abs() <= 1e-10 * (1.0 + v.norm()));
        let back = parallel_transport(&q, &p, &u).unwrap();
        prop_assert!((back.coords() - v.coords()).norm() <= 1e-10 * (1.0 + v.norm()));
    }

    #[test]
    fn exp_is_nonexpansive_in_the_tangent_plane(
        (p, u, v) in dim().prop_flat_map(|n| (point_and_tangent(n, 1.5), prop::collection::vec(-1.0..1.0f64, n), 0.0..1.5f64))
            .prop_map(|((p, u), raw, len)| {
                let t = project_to_tangent(&p, &DVector::from_vec(raw)).unwrap();
                let norm = t.norm().max(1e-300);
                let v = t.scale(len / norm);
                (p, u, v)
            })
    ) {
        let d = distance(&exp(&p, &u).unwrap(), &exp(&p, &v).unwrap()).unwrap();
        prop_assert!(d <= (u.coords() - v.coords()).norm() + 1e-10);
    }

    #[test]
    fn distance_is_a_metric(
        (p, q, r) in dim().prop_flat_map(|n| (point(n), point(n), point(n)))
    ) {
        let dpq = distance(&p, &q).unwrap();
        prop_assert!((dpq - distance(&q, &p).unwrap()).abs() <= 1e-14);
        prop_assert!((0.0..=std::f64::consts::PI).contains(&dpq));
        prop_assert!(distance(&p, &p).unwrap() <= 1e-15);
        prop_assert!(dpq <= distance(&p, &r).unwrap() + distance(&r, &q).unwrap() + 1e-12);
    }

    #[test]
    fn tangent_basis_is_orthonormal_and_orthogonal_to_p(p in dim().prop_flat_map(point)) {
        let basis = tangent_basis(&p);
        let q = basis.columns();
        let n = p.dim();
        let gram = q.transpose() * q;
        prop_assert!((gram - nalgebra::DMatrix::<f64>::identity(n - 1, n - 1)).amax() <= 1e-13);
        prop_assert!((q.transpose() * p.coords()).amax() <= 1e-13);
    }

    #[test]
    fn basis_coordinates_round_trip((p, v) in dim().prop_flat_map(|n| point_and_tangent(n, 4.0))) {
        let basis = tangent_basis(&p);
        let y = basis.coords_of(v.coords());
        prop_assert!((y.norm() - v.norm()).abs() <= 1e-12 * (1.0 + v.norm()));
        prop_assert!((basis.embed(&y) - v.coords()).norm() <= 1e-12 * (1.0 + v.norm()));
    }

    #[test]
    fn compress_matches_explicit_product(
        (p, m) in (2usize..12).prop_flat_map(|n| (point(n), prop::collection::vec(-5.0..5.0f64, n * n)))
    ) {
        let n = p.dim();
        let m = nalgebra::DMatrix::from_vec(n, n, m);
        let basis = tangent_basis(&p);
        let q = basis.columns();
        let explicit = q.transpose() * &m * q;
        prop_assert!((basis.compress(&m) - explicit).amax() <= 1e-12 * (1.0 + m.amax()));
    }
}
