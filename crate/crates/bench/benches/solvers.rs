use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bilanczos::{
    bicg, bicg_converted, bicr, ilu0_factorize, pbicg_improved2, pbicg_left, pbicg_right,
    pbicg_standard, IsrvSpec, PrecSide, SolveStatus, SolverConfig,
};
use bilanczos_bench::test_problem;

/// Full solves to 1e-8 on the 32x32 stencil (n = 1024) with ILU(0).
fn solvers(c: &mut Criterion) {
    let (a, b) = test_problem(32);
    let x0 = vec![0.0; a.dim()];
    let f = ilu0_factorize(&a).unwrap();
    let cfg = SolverConfig::with_tol(1e-8);

    let check = |r: bilanczos::SolveResult| {
        assert_eq!(r.status, SolveStatus::Converged);
        r
    };

    let mut group = c.benchmark_group("solve-1024");
    group.bench_function(BenchmarkId::from_parameter("bicg"), |bch| {
        bch.iter(|| check(bicg(&a, &b, &x0, &IsrvSpec::R0, &cfg).unwrap()))
    });
    group.bench_function(BenchmarkId::from_parameter("bicg-conv-two-sided"), |bch| {
        bch.iter(|| check(bicg_converted(&a, &b, &x0, &f, PrecSide::TwoSided, &cfg).unwrap()))
    });
    group.bench_function(BenchmarkId::from_parameter("pbicg-right"), |bch| {
        bch.iter(|| check(pbicg_right(&a, &b, &x0, &f, &cfg).unwrap()))
    });
    group.bench_function(BenchmarkId::from_parameter("pbicg-left"), |bch| {
        bch.iter(|| check(pbicg_left(&a, &b, &x0, &f, &cfg).unwrap()))
    });
    group.bench_function(BenchmarkId::from_parameter("pbicg-std-isrv1"), |bch| {
        bch.iter(|| check(pbicg_standard(&a, &b, &x0, &f, &IsrvSpec::Isrv1, &cfg).unwrap()))
    });
    group.bench_function(BenchmarkId::from_parameter("pbicg-impr2"), |bch| {
        bch.iter(|| check(pbicg_improved2(&a, &b, &x0, &f, &cfg).unwrap()))
    });
    group.bench_function(BenchmarkId::from_parameter("bicr"), |bch| {
        bch.iter(|| check(bicr(&a, &b, &x0, &cfg).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
