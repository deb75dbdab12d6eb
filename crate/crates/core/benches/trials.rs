//! Trial throughput on the rayon pool against a plain sequential loop.
//! Built without the `parallel` feature, both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qstoch_core::estimate::{mlmc_variance_reduce, DiscreteSource, MeanEstimationBackend};
use qstoch_core::fixtures::{make_fixture, FixtureKind, FixtureParams};
use qstoch_core::par::map_trials;
use qstoch_core::{run_trial, Algorithm, QueryLedger, Rng};

fn mlmc(c: &mut Criterion) {
    let src = DiscreteSource::signed_axes(8);
    let backend = MeanEstimationBackend::honest();
    let one = |t: u64| {
        let mut ledger = QueryLedger::new();
        mlmc_variance_reduce(&src, 0.1, &backend, &mut ledger, &mut Rng::new(1, t)).unwrap()
    };
    let mut g = c.benchmark_group("mlmc");
    for n in [1_000u64, 10_000] {
        g.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| b.iter(|| black_box(map_trials(n, one))));
        g.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| black_box((0..n).map(one).collect::<Vec<_>>()))
        });
    }
    g.finish();
}

fn solvers(c: &mut Criterion) {
    let backend = MeanEstimationBackend::honest();
    let cases = [
        (Algorithm::Acsa, FixtureKind::BallDistance, 0.1),
        (Algorithm::Qsgd, FixtureKind::QuadraticNoisy, 0.2),
        (Algorithm::Qscp, FixtureKind::BallDistance, 0.2),
    ];
    let mut g = c.benchmark_group("trials");
    g.sample_size(10);
    for (alg, kind, eps) in cases {
        let p = make_fixture(kind, 2, &FixtureParams::default(), &mut Rng::new(0, 0)).unwrap();
        let one = |t: u64| run_trial(alg, &p, eps, &backend, t, &mut Rng::new(2, t)).unwrap().metric;
        g.bench_function(BenchmarkId::new("parallel", alg), |b| b.iter(|| black_box(map_trials(64, one))));
        g.bench_function(BenchmarkId::new("sequential", alg), |b| {
            b.iter(|| black_box((0..64).map(one).collect::<Vec<_>>()))
        });
    }
    g.finish();
}

criterion_group!(benches, mlmc, solvers);
criterion_main!(benches);
