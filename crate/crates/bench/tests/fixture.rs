use nsnewton::field::VectorField;
use nsnewton_bench::fixture;

#[test]
fn fixtures_are_seeded_and_consistent() {
    let (a, p) = fixture(40, 5);
    let (b, q) = fixture(40, 5);
    assert_eq!(a, b);
    assert_eq!(p, q);
    assert_eq!(a.dim(), p.dim());
    assert_ne!(&p, a.planted_solution());
}
