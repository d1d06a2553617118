use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use freebound_core::eigen::{lambda_p, EigenProblem};
use freebound_core::kernel::{nonlocal_apply, trapezoid_weights, LatticeConvolution};
use freebound_core::solver::Solver;
use freebound_core::{InitialData, InteractionKind, Kernel, ModelParams};

fn convolution(c: &mut Criterion) {
    let kernel = Kernel::tent(1.0).unwrap();
    let mut group = c.benchmark_group("convolution");
    for n in [201usize, 801] {
        let spacing = 4.0 / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 * spacing).collect();
        let field: Vec<f64> = nodes.iter().map(|x| (x * 0.7).sin().abs()).collect();
        let weights = trapezoid_weights(&nodes);
        let lattice = LatticeConvolution::new(&kernel, spacing, n).unwrap();
        let mut out = vec![0.0; n];
        group.bench_with_input(BenchmarkId::new("lattice", n), &n, |b, _| {
            b.iter(|| lattice.apply(black_box(&field), &mut out))
        });
        group.bench_with_input(BenchmarkId::new("direct", n), &n, |b, _| {
            b.iter(|| nonlocal_apply(&kernel, black_box(&nodes), &weights, &field).unwrap())
        });
    }
    group.finish();
}

fn principal_eigenvalue(c: &mut Criterion) {
    let kernel = Kernel::tent(1.0).unwrap();
    let mut group = c.benchmark_group("lambda_p");
    for n in [129usize, 513] {
        let problem = EigenProblem::new(1.0, 0.3, (0.0, 4.0), n, kernel.clone()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| lambda_p(black_box(&problem)).unwrap())
        });
    }
    group.finish();
}

fn solver_step(c: &mut Criterion) {
    let kernel = Kernel::tent(1.0).unwrap();
    let p = ModelParams::new(InteractionKind::Competition, 1.0, 1.0, 0.8, 0.5, 0.5, 0.1, 0.1).unwrap();
    let init = InitialData::cosine(1.0, 0.5, 0.5).unwrap();
    let mut group = c.benchmark_group("solver_step");
    for n in [200usize, 800] {
        let solver = Solver::new(p, kernel.clone(), &init, n).unwrap();
        let state = solver.initial_state(&init);
        let (gdot, hdot) = solver.velocities(&state).unwrap();
        let dt = 0.5 * solver.stability_limit(&state, gdot, hdot).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solver.step(black_box(&state), dt).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, convolution, principal_eigenvalue, solver_step);
criterion_main!(benches);
