use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nlev_bench::{cutoff, gaussian, options, pure_jump, with_slope};
use nlev_core::transform::transform_half_width;
use nlev_core::{power_method, solve_sigma, transform_kernel, CutoffOperator, Grid, PowerOptions};

fn operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("operator_apply");
    for cells in [64usize, 1024, 8192] {
        let op = CutoffOperator::new(&gaussian(), cutoff(cells as f64 * 1e-3, 1e-3));
        let v = vec![-1.0; cells];
        group.bench_with_input(BenchmarkId::from_parameter(cells), &v, |b, v| b.iter(|| op.apply(black_box(v))));
    }
    group.finish();
}

fn power(c: &mut Criterion) {
    let mut group = c.benchmark_group("power_method");
    for xi in [0.5, 2.0, 8.0] {
        let cut = cutoff(xi, 2e-3);
        group.bench_with_input(BenchmarkId::from_parameter(xi), &cut, |b, &cut| {
            b.iter(|| power_method(&gaussian(), black_box(cut), PowerOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_sigma");
    group.sample_size(10);
    let opts = options(5e-3);
    group.bench_function("pure_jump_sigma_1", |b| {
        b.iter(|| solve_sigma(&gaussian(), &pure_jump(), black_box(1.0), &opts).unwrap())
    });
    group.bench_function("with_slope_sigma_2", |b| {
        b.iter(|| solve_sigma(&gaussian(), &with_slope(), black_box(2.0), &opts).unwrap())
    });
    group.finish();
}

fn transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform_kernel");
    group.sample_size(10);
    for mu in [0.1, 0.5, 0.9] {
        let grid = Grid::new(transform_half_width(&gaussian(), mu, 1e-8), 5e-3).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(mu), &grid, |b, grid| {
            b.iter(|| transform_kernel(&gaussian(), black_box(mu), grid, 1e-8).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, operator, power, solve, transform);
criterion_main!(benches);
