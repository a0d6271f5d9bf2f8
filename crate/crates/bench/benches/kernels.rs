use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hn_spectra::{
    build, eigenvalues, lyapunov, lyapunov_field, uh_test, Boundary, EigenOptions, GridSpec, LyapunovConfig, Potential,
    UhConfig, C64,
};
use hn_spectra_bench::golden;

fn lyapunov_kernels(c: &mut Criterion) {
    let (b, x) = golden();
    let p = Potential::cosine(2.0);
    let cfg = LyapunovConfig::default();
    c.bench_function("lyapunov/single energy", |bench| {
        bench.iter(|| lyapunov(&b, &p, black_box(C64::new(0.5, 0.3)), 0.0, &x, &cfg).unwrap())
    });
    let grid = GridSpec::new((-3.0, 3.0), (-2.0, 2.0), 21, 15);
    let mut group = c.benchmark_group("lyapunov_field");
    group.sample_size(10);
    group.bench_function("21x15", |bench| bench.iter(|| lyapunov_field(&b, &p, 0.0, &grid, &x, &cfg).unwrap()));
    group.finish();
}

fn eigen_kernels(c: &mut Criterion) {
    let (b, x) = golden();
    let p = Potential::cosine(2.0);
    let mut group = c.benchmark_group("eigenvalues");
    group.sample_size(10);
    for n in [128usize, 512, 1024] {
        let op = build(&b, &p, &x, n, 0.5, Boundary::Periodic).unwrap();
        let opts = EigenOptions { backward_error: false, ..Default::default() };
        group.bench_with_input(BenchmarkId::from_parameter(n), &op, |bench, op| {
            bench.iter(|| eigenvalues(op, &opts).unwrap())
        });
    }
    group.finish();
}

fn uh_kernels(c: &mut Criterion) {
    let (b, x) = golden();
    let p = Potential::cosine(2.0);
    let cfg = UhConfig::default();
    let mut group = c.benchmark_group("uh_test");
    group.sample_size(10);
    for (name, e) in [("gap", C64::new(7.0, 0.0)), ("complex", C64::new(0.5, 1.0))] {
        group.bench_function(name, |bench| bench.iter(|| uh_test(&b, &p, black_box(e), &x, &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, lyapunov_kernels, eigen_kernels, uh_kernels);
criterion_main!(benches);
