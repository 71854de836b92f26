use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rnls::nonlocal::{apply_form, assemble_full_form, assemble_regional_form};
use rnls::solver::solve_ground_state;
use rnls::{AssemblyOptions, ConstCoeffProblem, Field, Grid, Quadrature, SolverOptions};

fn bump(grid: Grid) -> Field {
    Field::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1])).exp())
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble_regional");
    for points in [401, 1601] {
        let grid = Grid::new(1, 10.0, points).unwrap();
        let scope = vec![1.0; grid.len()];
        g.bench_with_input(BenchmarkId::new("1d", points), &grid, |b, grid| {
            b.iter(|| assemble_regional_form(grid, &scope, 0.4, AssemblyOptions::default()).unwrap())
        });
    }
    let grid = Grid::new(2, 2.0, 41).unwrap();
    let scope = vec![0.5; grid.len()];
    g.bench_function("2d/41x41", |b| {
        b.iter(|| assemble_regional_form(&grid, &scope, 0.4, AssemblyOptions::default()).unwrap())
    });
    g.finish();
}

fn application(c: &mut Criterion) {
    let mut g = c.benchmark_group("apply_form");
    for points in [401, 2001] {
        let grid = Grid::new(1, 20.0, points).unwrap();
        let form = assemble_full_form(&grid, 0.4, true, Quadrature::PunchedHole).unwrap();
        let u = bump(grid);
        g.bench_with_input(BenchmarkId::new("full_1d", points), &u, |b, u| b.iter(|| apply_form(&form, u).unwrap()));
    }
    g.finish();
}

fn solver(c: &mut Criterion) {
    let grid = Grid::new(1, 15.0, 301).unwrap();
    let form = assemble_full_form(&grid, 0.4, true, Quadrature::PunchedHole).unwrap();
    let np = ConstCoeffProblem { q_val: 1.0, k_val: 1.0, alpha: 0.4, p: 2.0, grid }.nodal();
    let opts = SolverOptions::default();
    let mut g = c.benchmark_group("solver");
    g.sample_size(10);
    g.bench_function("ground_state_1d_301", |b| b.iter(|| solve_ground_state(&np, &form, &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, assembly, application, solver);
criterion_main!(benches);
