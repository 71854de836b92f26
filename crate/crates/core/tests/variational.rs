use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnls::functionals::{energy, gradient, level_from_field, nehari_t};
use rnls::solver::{solve_from, solve_ground_state, sweep_epsilon, SweepSetup};
use rnls::{
    AssemblyOptions, CoeffProfile, CoeffSpec, ConstCoeffProblem, Field, Frame, Grid, ProblemSpec, Quadrature,
    ScopeSpec, SolverOptions,
};

fn canonical(grid: Grid, epsilon: f64, frame: Frame) -> ProblemSpec {
    ProblemSpec {
        alpha: 0.4,
        p: 2.0,
        epsilon,
        frame,
        scope: ScopeSpec::constant(1.0),
        coeffs: CoeffSpec::new(
            CoeffProfile::Lorentzian { center: vec![0.0], center_value: 1.0, inf_value: 2.0, width: 1.0 },
            CoeffProfile::Constant(1.0),
        )
        .with_bounds(1.0, 2.0),
        grid,
    }
}

fn bumpy(grid: Grid, rng: &mut ChaCha8Rng) -> Field {
    let c: f64 = rng.random_range(-1.0..1.0);
    let a: f64 = rng.random_range(0.5..2.0);
    let noise: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-0.2..0.2)).collect();
    let mut i = 0;
    Field::from_fn(grid, |x| {
        let v = a * (-(x[0] - c).powi(2)).exp() + noise[i] * (-(x[0] * x[0]) / 8.0).exp();
        i += 1;
        v
    })
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let spec = canonical(Grid::new(1, 6.0, 241).unwrap(), 0.5, Frame::Original);
    let form = spec.assemble(AssemblyOptions::default(), true).unwrap();
    let np = spec.nodal();
    let delta = 1e-5;
    for _ in 0..10 {
        let u = bumpy(spec.grid, &mut rng);
        let w = bumpy(spec.grid, &mut rng);
        let g = gradient(&np, &form, &u).unwrap();
        let analytic = g.dot(&w);
        let plus = Field::new(spec.grid, u.values().iter().zip(w.values()).map(|(a, b)| a + delta * b).collect()).unwrap();
        let minus = Field::new(spec.grid, u.values().iter().zip(w.values()).map(|(a, b)| a - delta * b).collect()).unwrap();
        let fd = (energy(&np, &form, &plus).unwrap().total - energy(&np, &form, &minus).unwrap().total) / (2.0 * delta);
        assert!((fd - analytic).abs() <= 1e-6 * analytic.abs(), "{fd} vs {analytic}");
    }
}

#[test]
fn nehari_projection_is_stationary_and_maximal_on_the_ray() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let spec = canonical(Grid::new(1, 6.0, 241).unwrap(), 1.0, Frame::Rescaled);
    let form = spec.assemble(AssemblyOptions::default(), true).unwrap();
    let np = spec.nodal();
    for _ in 0..5 {
        let u = bumpy(spec.grid, &mut rng);
        let t = nehari_t(&np, &form, &u).unwrap();
        let tu = u.scaled(t);
        let rep = energy(&np, &form, &tu).unwrap();
        let s = rep.quadratic + rep.potential;
        // d/dt I(tu) at t = 1 along the ray through tu
        assert!((s - rep.nonlinear).abs() <= 1e-10 * s);
        let best = rep.total;
        for k in 0..100 {
            let s = t * 10f64.powf(-1.0 + 2.0 * k as f64 / 99.0);
            assert!(energy(&np, &form, &u.scaled(s)).unwrap().total <= best * (1.0 + 1e-12));
        }
        let level = level_from_field(&np, &form, &u).unwrap();
        assert!((level - best).abs() <= 1e-12 * best);
        for c in [1e-3, 0.7, 42.0] {
            let lc = level_from_field(&np, &form, &u.scaled(c)).unwrap();
            assert!((lc - level).abs() <= 1e-12 * level);
        }
    }
}

#[test]
fn gradient_vanishes_at_zero() {
    let spec = canonical(Grid::new(1, 3.0, 61).unwrap(), 0.5, Frame::Original);
    let form = spec.assemble(AssemblyOptions::default(), true).unwrap();
    let g = gradient(&spec.nodal(), &form, &Field::zeros(spec.grid)).unwrap();
    assert!(g.is_zero());
}

#[test]
fn solver_fixed_point_and_reflection_symmetry() {
    let grid = Grid::new(1, 15.0, 301).unwrap();
    let form = rnls::nonlocal::assemble_full_form(&grid, 0.4, true, Quadrature::PunchedHole).unwrap();
    let np = ConstCoeffProblem { q_val: 1.0, k_val: 1.0, alpha: 0.4, p: 2.0, grid }.nodal();
    let opts = SolverOptions { centers: vec![vec![-5.0], vec![5.0]], record_history: true, ..Default::default() };
    let gs = solve_ground_state(&np, &form, &opts).unwrap();
    assert!(gs.converged);
    assert!(gs.u.values().iter().all(|v| *v >= 0.0));
    let g = gradient(&np, &form, &gs.u).unwrap();
    assert!(g.dot(&g).sqrt() <= opts.tol_g);
    let again = solve_from(&np, &form, &gs.u, &opts).unwrap();
    assert!(again.iterations <= 2 && (again.level - gs.level).abs() <= 1e-10 * gs.level);
    let left = solve_ground_state(&np, &form, &SolverOptions { centers: vec![vec![-5.0]], ..Default::default() }).unwrap();
    let right = solve_ground_state(&np, &form, &SolverOptions { centers: vec![vec![5.0]], ..Default::default() }).unwrap();
    assert!((left.level - right.level).abs() <= 1e-8 * left.level);
}

#[test]
fn lower_level_bound_holds_for_the_canonical_problem() {
    let grid = Grid::new(1, 10.0, 401).unwrap();
    let spec = canonical(grid, 1.0, Frame::Rescaled);
    let opts = SolverOptions::default();
    let form = spec.assemble(AssemblyOptions::default(), true).unwrap();
    let level = solve_ground_state(&spec.nodal(), &form, &opts).unwrap().level;
    let lower = rnls::experiments::comparison_level(&spec, grid, AssemblyOptions::default(), &opts).unwrap();
    assert!(lower > 0.0 && lower <= level, "{lower} {level}");
}

#[test]
fn sweep_of_constant_problem_is_flat_in_the_rescaled_frame() {
    // the rescaled scope ρ/ε only grows; once it covers the box and ghosts are off, nothing depends on ε
    let grid = Grid::new(1, 4.0, 161).unwrap();
    let spec = ProblemSpec {
        coeffs: CoeffSpec::constant(1.0, 1.0),
        scope: ScopeSpec::constant(20.0),
        ..canonical(grid, 1.0, Frame::Rescaled)
    };
    let setup = SweepSetup {
        xi_star: vec![0.0],
        radii: vec![1.0],
        localization_radius: 1.0,
        assembly: AssemblyOptions { ghosts: false, quadrature: Quadrature::PunchedHole },
        tail_correction: false,
    };
    let rows = sweep_epsilon(&spec, &[1.0, 0.5, 0.25], &SolverOptions::default(), &setup).unwrap();
    for r in &rows {
        assert!(r.converged && r.error.is_none());
        assert!((r.level - rows[0].level).abs() <= 1e-8 * rows[0].level, "{} {}", r.level, rows[0].level);
    }
}

#[test]
fn canonical_sweep_concentrates_at_the_origin() {
    let grid = Grid::new(1, 8.0, 321).unwrap();
    let spec = canonical(grid, 1.0, Frame::Original);
    let setup = SweepSetup {
        xi_star: vec![0.0],
        radii: vec![1.0, 0.5],
        localization_radius: 1.0,
        assembly: AssemblyOptions::default(),
        tail_correction: true,
    };
    let rows = sweep_epsilon(&spec, &[1.0, 0.5, 0.25], &SolverOptions::default(), &setup).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].fractions[0] > w[0].fractions[0]);
        assert!(w[1].eps_times_center[0].abs() <= grid.spacing());
    }
    let bad = sweep_epsilon(&spec, &[0.25, 0.5], &SolverOptions::default(), &setup).unwrap_err();
    assert_eq!(bad.to_string(), "epsilon list must be descending");
}
