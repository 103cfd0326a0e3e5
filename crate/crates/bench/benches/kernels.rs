use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use loopcell::graded::assemble_sector;
use loopcell::linalg::lowest_eigenpairs;
use loopcell::spectra::{block_hamiltonian, OrbitBasis};
use loopcell::{make_spec, measure_b, Model, ModelKind, Weighting};
use loopcell_bench::block_fixture;

fn enumerate(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    for (kind, l, lines) in [(ModelKind::Dense, 16usize, 0usize), (ModelKind::Dense, 16, 4), (ModelKind::Dilute, 12, 0)] {
        let model = Model::for_spec(&make_spec(kind, l).unwrap());
        g.bench_function(BenchmarkId::new(format!("{kind}-lines{lines}"), l), |b| {
            b.iter(|| model.enumerate(black_box(lines)).unwrap().len())
        });
    }
    g.finish();
}

fn assemble(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    for (kind, l) in [(ModelKind::Dense, 14usize), (ModelKind::Dilute, 10)] {
        let spec = make_spec(kind, l).unwrap();
        let model = Model::for_spec(&spec);
        let basis = model.enumerate(0).unwrap();
        g.bench_function(BenchmarkId::new(format!("{kind}-sector"), l), |b| {
            b.iter(|| assemble_sector(&model, &basis, None, Weighting::At(spec.n)).nnz())
        });
        let orbits = OrbitBasis::from_sector(&basis, 2);
        g.bench_function(BenchmarkId::new(format!("{kind}-spin2-block"), l), |b| {
            b.iter(|| block_hamiltonian(&model, &orbits, &orbits, Weighting::At(spec.n)).unwrap().nnz())
        });
    }
    g.finish();
}

fn matvec(c: &mut Criterion) {
    let mut g = c.benchmark_group("matvec");
    for (kind, l) in [(ModelKind::Dense, 16usize), (ModelKind::Dilute, 12)] {
        let f = block_fixture(kind, l);
        g.bench_function(BenchmarkId::new(format!("{kind}-spin2"), l), |b| b.iter(|| f.h.mul_vec(black_box(&f.x))));
    }
    g.finish();
}

fn eigensolve(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigensolve");
    g.sample_size(10);
    for (kind, l) in [(ModelKind::Dense, 14usize), (ModelKind::Dilute, 10)] {
        let f = block_fixture(kind, l);
        // dense limit 0 forces the Arnoldi path
        g.bench_function(BenchmarkId::new(format!("{kind}-arnoldi"), l), |b| b.iter(|| lowest_eigenpairs(&f.h, 4, 0).unwrap().len()));
    }
    g.finish();
}

fn full_measurement(c: &mut Criterion) {
    let mut g = c.benchmark_group("measure_b");
    g.sample_size(10);
    for l in [10usize, 12] {
        let spec = make_spec(ModelKind::Dense, l).unwrap();
        g.bench_function(BenchmarkId::new("dense", l), |b| b.iter(|| measure_b(&spec).unwrap().b_n));
    }
    g.finish();
}

criterion_group!(benches, enumerate, assemble, matvec, eigensolve, full_measurement);
criterion_main!(benches);
