use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use extremal_sl::optimize::{minimize_g, OptimConfig};
use extremal_sl::period::{alpha_min, i0, shoot, DEFAULT_QUAD_TOL};
use extremal_sl::sturm::lambda_k;
use extremal_sl::{GammaParam, GridFunction};

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("lambda_1");
    for n in [1024, 4096, 16384] {
        let q = GridFunction::from_fn(n, |x| 1.0 + 0.5 * (PI * x).cos()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &q, |b, q| {
            b.iter(|| lambda_k(black_box(q), 1).unwrap().lambda)
        });
    }
    group.finish();
}

fn optimiser(c: &mut Criterion) {
    let mut group = c.benchmark_group("minimize_g");
    group.sample_size(10);
    for gamma in [0.5, 0.9] {
        let g = GammaParam::new(gamma).unwrap();
        let cfg = OptimConfig::default().with_grid(512);
        group.bench_with_input(BenchmarkId::from_parameter(gamma), &g, |b, g| {
            b.iter(|| minimize_g(black_box(g), &cfg).unwrap().m_hat)
        });
    }
    group.finish();
}

fn period(c: &mut Criterion) {
    let mut group = c.benchmark_group("i0");
    let g = GammaParam::threshold();
    let amin = alpha_min(&g);
    // near tangency, moderate and wide windows
    for factor in [1.0001, 2.0, 1e4] {
        group.bench_with_input(BenchmarkId::from_parameter(factor), &factor, |b, &f| {
            b.iter(|| i0(&g, black_box(f * amin), DEFAULT_QUAD_TOL).unwrap().i0)
        });
    }
    group.finish();

    let g = GammaParam::new(0.9).unwrap();
    c.bench_function("shoot", |b| b.iter(|| shoot(&g, black_box(0.5), 1.2).unwrap().half_period));
}

criterion_group!(benches, eigen, optimiser, period);
criterion_main!(benches);
