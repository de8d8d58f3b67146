use anyladder_bench::anyon_fixture;
use anyladder_core::dynamics::{default_time_grid, run_quench, QuenchConfig};
use anyladder_core::hamiltonian::build_full;
use anyladder_core::spectral::eig;
use anyladder_core::BasisTable;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn basis(c: &mut Criterion) {
    let mut g = c.benchmark_group("basis");
    for (l, n) in [(10, 2), (10, 3)] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("L{l}N{n}")), &(l, n), |b, &(l, n)| {
            b.iter(|| BasisTable::build(black_box(l), n, n as u8).unwrap())
        });
    }
    g.finish();
}

fn hamiltonian(c: &mut Criterion) {
    let (p, b) = anyon_fixture(10, 2);
    c.bench_function("build_full/L10N2", |bench| bench.iter(|| build_full(black_box(&p), &b).unwrap()));
}

fn eigensolve(c: &mut Criterion) {
    let mut g = c.benchmark_group("eig");
    g.sample_size(10);
    for l in [6, 8, 10] {
        let (p, b) = anyon_fixture(l, 2);
        let h = build_full(&p, &b).unwrap().entries;
        g.bench_with_input(BenchmarkId::from_parameter(format!("dim{}", b.dim())), &h, |bench, h| {
            bench.iter(|| eig(black_box(h)).unwrap())
        });
    }
    g.finish();
}

fn quench(c: &mut Criterion) {
    let (p, b) = anyon_fixture(10, 2);
    let cfg = QuenchConfig::new(&p, 0.035, 0.045, default_time_grid()).unwrap();
    let mut g = c.benchmark_group("quench");
    g.sample_size(10);
    g.bench_function("L10N2", |bench| bench.iter(|| run_quench(black_box(&cfg), &b).unwrap()));
    g.finish();
}

criterion_group!(benches, basis, hamiltonian, eigensolve, quench);
criterion_main!(benches);
