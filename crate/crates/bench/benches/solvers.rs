use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use nsnewton::field::VectorField;
use nsnewton::geometry::{exp, project_to_tangent, tangent_basis};
use nsnewton::solver::{gnm_solve, newton_direction, nm_solve, SolverConfig};
use nsnewton_bench::fixture;

const DIMS: [usize; 3] = [50, 100, 200];

fn geometry(c: &mut Criterion) {
    let mut group = c.benchmark_group("geometry");
    for n in DIMS {
        let (inst, p) = fixture(n, 1);
        let v = project_to_tangent(&p, inst.planted_solution().coords()).unwrap();
        group.bench_with_input(BenchmarkId::new("exp", n), &n, |b, _| {
            b.iter(|| exp(black_box(&p), black_box(&v)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("tangent_basis", n), &n, |b, _| {
            b.iter(|| tangent_basis(black_box(&p)))
        });
    }
    group.finish();
}

fn field(c: &mut Criterion) {
    let mut group = c.benchmark_group("field");
    for n in DIMS {
        let (inst, p) = fixture(n, 2);
        group.bench_with_input(BenchmarkId::new("eval", n), &n, |b, _| {
            b.iter(|| inst.eval(black_box(&p)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("clarke_element", n), &n, |b, _| {
            b.iter(|| inst.clarke_element(black_box(&p)).unwrap())
        });
    }
    group.finish();
}

fn solvers(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solvers");
    group.sample_size(20);
    for n in DIMS {
        let (inst, p0) = fixture(n, 3);
        group.bench_with_input(BenchmarkId::new("newton_direction", n), &n, |b, _| {
            b.iter(|| newton_direction(&inst, black_box(&p0), &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gnm_solve", n), &n, |b, _| {
            b.iter(|| gnm_solve(&inst, black_box(&p0), &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("nm_solve", n), &n, |b, _| {
            b.iter(|| nm_solve(&inst, black_box(&p0), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, geometry, field, solvers);
criterion_main!(benches);
