use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use conngraph::linalg::SymmetricEigen;
use conngraph::projections::{proj_spectral_cap, proj_sym_stochastic};
use conngraph::{
    consensus_design, dykstra_project, mu_subgradient, spg_learn, ConsensusProblem, ConstraintSet,
    ConstraintSpec, SolverOptions, SpgProblem, SupportMask,
};
use conngraph_bench::{path, sinusoids, symmetric};

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigen");
    for n in [10, 50, 100] {
        let m = symmetric(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| SymmetricEigen::new(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn projections(c: &mut Criterion) {
    let n = 50;
    let m = symmetric(n) * 3.0;
    let mask = SupportMask::new(ndarray::Array2::from_shape_fn((n, n), |(i, j)| i != j)).unwrap();
    c.bench_function("proj_sym_stochastic/50", |b| {
        b.iter(|| proj_sym_stochastic(black_box(&m), &mask).unwrap())
    });
    c.bench_function("proj_spectral_cap/50", |b| {
        b.iter(|| proj_spectral_cap(black_box(&m), 0.99).unwrap())
    });
    let spec = ConstraintSpec::new()
        .with(ConstraintSet::BoxSym {
            zero_diagonal: true,
        })
        .and_then(|s| s.with(ConstraintSet::RowSumAffine))
        .unwrap();
    let small = symmetric(12);
    c.bench_function("dykstra/box+rowsum/12", |b| {
        b.iter(|| dykstra_project(black_box(&small), &spec, 1e-9, 10_000).unwrap())
    });
}

fn solvers(c: &mut Criterion) {
    let a = proj_sym_stochastic(&symmetric(50), &SupportMask::full(50)).unwrap();
    c.bench_function("mu_subgradient/50", |b| {
        b.iter(|| mu_subgradient(black_box(&a)).unwrap())
    });

    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    let x = sinusoids(20, 20);
    group.bench_function("spg_learn/unconstrained/20", |b| {
        b.iter(|| {
            spg_learn(
                &SpgProblem::new(x.clone(), false),
                &SolverOptions::default(),
            )
            .unwrap()
        })
    });
    group.bench_function("spg_learn/connected/20", |b| {
        b.iter(|| spg_learn(&SpgProblem::new(x.clone(), true), &SolverOptions::default()).unwrap())
    });
    let support = path(8);
    group.bench_function("consensus/connected/path8", |b| {
        b.iter(|| {
            consensus_design(
                &ConsensusProblem::new(&support, 0.0).connected(0.01),
                &SolverOptions::default(),
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, eigen, projections, solvers);
criterion_main!(benches);
