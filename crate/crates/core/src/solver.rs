//! Ground states by minimizing the scale-invariant Nehari quotient
//!
//! ```text
//! M(u) = (‖u‖²)^{(p+1)/(p-1)} / (∫ K |u|^{p+1})^{2/(p-1)}
//! ```
//!
//! whose infimum times `½ - 1/(p+1)` is the ground-state level. Iterates are
//! kept on the Nehari manifold by rescaling, which leaves `M` unchanged; on
//! the manifold the energy gradient is parallel to the gradient of `M`, so the
//! descent direction is the discrete `L^2` energy gradient.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{sample_profile, Field, Grid, Profile};
use crate::functionals::{gradient, nehari_t, ConstCoeffProblem, NodalProblem, ProblemSpec};
use crate::nonlocal::{assemble_full_form, AssemblyOptions, Frame, QuadForm, Quadrature};

/// Quotient increases below this relative size are treated as round-off.
const QUOTIENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Bound on the discrete `L^2` norm of the energy gradient.
    pub tol_g: f64,
    /// Nehari residual bound relative to the level; also the stall threshold.
    pub tol_c: f64,
    /// First trial step in the `h^n`-scaled metric.
    pub initial_step: f64,
    pub max_backtracks: usize,
    /// Clip negative parts after each step.
    pub clip_negative: bool,
    /// Gaussian initial guesses, one restart per center.
    pub centers: Vec<Vec<f64>>,
    pub init_width: f64,
    pub init_amplitude: f64,
    pub seed: u64,
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            tol_g: 1e-8,
            tol_c: 1e-9,
            initial_step: 1.0,
            max_backtracks: 60,
            clip_negative: true,
            centers: Vec::new(),
            init_width: 1.0,
            init_amplitude: 1.0,
            seed: 0,
            record_history: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Invalid("max_iters must be at least 1".into()));
        }
        if !(self.tol_g > 0.0 && self.tol_c > 0.0 && self.initial_step > 0.0) {
            return Err(Error::Invalid("solver tolerances and step must be positive".into()));
        }
        if !(self.init_width > 0.0 && self.init_amplitude > 0.0) {
            return Err(Error::Invalid("initial guess width and amplitude must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub quotient: f64,
    pub level: f64,
    pub grad_norm: f64,
    /// Step accepted after this record (0 on the final record).
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    /// Nonnegative, Nehari-normalized minimizer.
    pub u: Field,
    pub level: f64,
    pub quotient: f64,
    pub gradient_norm: f64,
    /// `|I'(u)u|`
    pub nehari_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart_index: usize,
    pub history: Vec<IterRecord>,
}

struct State {
    v: Field,
    g: Field,
    quotient: f64,
    norm_sq: f64,
    nonlinear: f64,
}

fn clip(v: &mut Field) {
    for x in v.values_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Projects onto the Nehari manifold and evaluates everything the iteration needs.
fn evaluate(problem: &NodalProblem, form: &QuadForm, mut v: Field) -> Result<State> {
    let t = nehari_t(problem, form, &v)?;
    v = v.scaled(t);
    let norm_sq = problem.norm_sq(form, &v)?;
    let nonlinear = problem.nonlinear(&v);
    if !(nonlinear > 0.0) || !norm_sq.is_finite() {
        return Err(Error::VanishingNonlinearity);
    }
    let quotient = crate::functionals::quotient_from_parts(norm_sq, nonlinear, problem.p);
    let g = gradient(problem, form, &v)?;
    Ok(State { v, g, quotient, norm_sq, nonlinear })
}

fn finish(problem: &NodalProblem, s: State, iterations: usize, converged: bool, history: Vec<IterRecord>) -> GroundState {
    GroundState {
        level: problem.level_factor() * s.quotient,
        quotient: s.quotient,
        gradient_norm: s.g.dot(&s.g).sqrt(),
        nehari_residual: (s.norm_sq - s.nonlinear).abs(),
        u: s.v,
        iterations,
        converged,
        restart_index: 0,
        history,
    }
}

/// Minimizes from a given initial field.
pub fn solve_from(problem: &NodalProblem, form: &QuadForm, init: &Field, opts: &SolverOptions) -> Result<GroundState> {
    opts.validate()?;
    if !problem.grid.same_as(init.grid()) || !problem.grid.same_as(form.grid()) {
        return Err(Error::GridMismatch);
    }
    let mut v = init.clone();
    if opts.clip_negative {
        clip(&mut v);
    }
    if v.is_zero() {
        return Err(Error::ZeroField);
    }
    let mut state = evaluate(problem, form, v)?;
    let mut prev: Option<(Field, Field)> = None;
    let mut step = opts.initial_step;
    let mut history = Vec::new();
    let factor = problem.level_factor();
    for iter in 0..opts.max_iters {
        let level = factor * state.quotient;
        let grad_norm = state.g.dot(&state.g).sqrt();
        let residual = (state.norm_sq - state.nonlinear).abs();
        if opts.record_history {
            history.push(IterRecord { iter, quotient: state.quotient, level, grad_norm, step: 0.0 });
        }
        if grad_norm <= opts.tol_g && residual <= opts.tol_c * level {
            return Ok(finish(problem, state, iter, true, history));
        }
        if let Some((v_old, g_old)) = &prev {
            let dv: Vec<f64> = state.v.values().iter().zip(v_old.values()).map(|(a, b)| a - b).collect();
            let dg: Vec<f64> = state.g.values().iter().zip(g_old.values()).map(|(a, b)| a - b).collect();
            let ss: f64 = dv.iter().map(|x| x * x).sum();
            let sy: f64 = dv.iter().zip(&dg).map(|(a, b)| a * b).sum();
            if sy > 0.0 && ss > 0.0 {
                step = ss / sy;
            }
        }
        let mut accepted = None;
        let mut trial_step = step;
        for _ in 0..=opts.max_backtracks {
            let mut trial = Field::new(
                problem.grid,
                state.v.values().iter().zip(state.g.values()).map(|(v, g)| v - trial_step * g).collect(),
            )?;
            if opts.clip_negative {
                clip(&mut trial);
            }
            if !trial.is_zero() {
                if let Ok(next) = evaluate(problem, form, trial) {
                    if next.quotient <= state.quotient * (1.0 + QUOTIENT_SLACK) {
                        accepted = Some(next);
                        break;
                    }
                }
            }
            trial_step *= 0.5;
        }
        let Some(next) = accepted else {
            // no admissible decrease left: stalled at round-off level
            return Ok(finish(problem, state, iter, false, history));
        };
        if let Some(last) = history.last_mut() {
            last.step = trial_step;
        }
        step = trial_step;
        let old = std::mem::replace(&mut state, next);
        prev = Some((old.v, old.g));
    }
    let iters = opts.max_iters;
    Ok(finish(problem, state, iters, false, history))
}

fn initial_guess(grid: &Grid, center: &[f64], opts: &SolverOptions) -> Field {
    sample_profile(
        grid,
        &Profile::Gaussian { center: center.to_vec(), width: opts.init_width, amplitude: opts.init_amplitude },
    )
}

fn solve_restart(problem: &NodalProblem, form: &QuadForm, center: &[f64], index: usize, opts: &SolverOptions) -> Result<GroundState> {
    let grid = problem.grid;
    let mut init = initial_guess(&grid, center, opts);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(index as u64));
    let mut last_err = None;
    for _attempt in 0..4 {
        match solve_from(problem, form, &init, opts) {
            Ok(mut gs) => {
                gs.restart_index = index;
                return Ok(gs);
            }
            Err(e @ (Error::ZeroField | Error::VanishingNonlinearity)) => {
                last_err = Some(e);
                let shifted: Vec<f64> = center
                    .iter()
                    .map(|c| c + { let z: f64 = StandardNormal.sample(&mut rng); opts.init_width * z })
                    .collect();
                init = initial_guess(&grid, &shifted, opts);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Solver(format!(
        "restart {index}: degenerate initial data ({})",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// Runs one restart per configured center (the origin if none) and returns the
/// lowest level, preferring converged runs; ties go to the lowest restart index.
pub fn solve_ground_state(problem: &NodalProblem, form: &QuadForm, opts: &SolverOptions) -> Result<GroundState> {
    opts.validate()?;
    let n = problem.grid.dim();
    let centers = if opts.centers.is_empty() { vec![vec![0.0; n]] } else { opts.centers.clone() };
    let runs: Vec<Result<GroundState>> = centers
        .par_iter()
        .enumerate()
        .map(|(i, c)| solve_restart(problem, form, c, i, opts))
        .collect();
    let mut best: Option<GroundState> = None;
    let mut errors = Vec::new();
    for run in runs {
        match run {
            Ok(gs) => {
                let better = match &best {
                    None => true,
                    Some(b) => (gs.converged && !b.converged) || (gs.converged == b.converged && gs.level < b.level),
                };
                if better {
                    best = Some(gs);
                }
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    best.ok_or_else(|| Error::Solver(format!("all restarts failed: {}", errors.join("; "))))
}

/// Richardson extrapolation of `D` from a refinement ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleD {
    pub d: f64,
    pub error_estimate: f64,
    /// Order used for the extrapolation.
    pub order: f64,
    /// Order observed from the last three rungs, when available.
    pub observed_order: Option<f64>,
    pub rungs: Vec<OracleRung>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRung {
    pub half_width: f64,
    pub points: usize,
    pub spacing: f64,
    pub level: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `f_fine + (f_fine - f_coarse) / (r^q - 1)` with `r = h_coarse / h_fine`.
pub fn richardson(f_coarse: f64, f_fine: f64, ratio: f64, order: f64) -> f64 {
    f_fine + (f_fine - f_coarse) / (ratio.powf(order) - 1.0)
}

/// Ground level `D` of the `Q = K = 1` full-form problem, extrapolated in `h`.
///
/// `order` defaults to the quadrature's leading error order.
pub fn oracle_d(
    alpha: f64,
    p: f64,
    n: usize,
    ladder: &[(f64, usize)],
    quadrature: Quadrature,
    order: Option<f64>,
    opts: &SolverOptions,
) -> Result<OracleD> {
    if ladder.len() < 2 || ladder.windows(2).any(|w| w[1].1 <= w[0].1) {
        return Err(Error::LadderNotIncreasing);
    }
    if ladder.iter().any(|r| r.0.to_bits() != ladder[0].0.to_bits()) {
        return Err(Error::LadderHalfWidth);
    }
    let mut rungs = Vec::with_capacity(ladder.len());
    let mut warm: Option<Field> = None;
    for &(half_width, points) in ladder {
        let grid = Grid::new(n, half_width, points)?;
        let problem = ConstCoeffProblem { q_val: 1.0, k_val: 1.0, alpha, p, grid };
        problem.validate()?;
        let nodal = problem.nodal();
        let form = assemble_full_form(&grid, alpha, true, quadrature)?;
        let gs = match &warm {
            Some(prev) => solve_from(&nodal, &form, &prev.interpolate_to(&grid), opts)?,
            None => solve_ground_state(&nodal, &form, opts)?,
        };
        if !gs.converged {
            return Err(Error::Solver(format!(
                "oracle rung N={points} did not converge (gradient norm {:e} after {} iterations)",
                gs.gradient_norm, gs.iterations
            )));
        }
        rungs.push(OracleRung {
            half_width,
            points,
            spacing: grid.spacing(),
            level: gs.level,
            iterations: gs.iterations,
            converged: gs.converged,
        });
        warm = Some(gs.u);
    }
    let q = order.unwrap_or_else(|| quadrature.error_order(alpha));
    let m = rungs.len();
    let (c, f) = (&rungs[m - 2], &rungs[m - 1]);
    let d = richardson(c.level, f.level, c.spacing / f.spacing, q);
    let observed_order = (m >= 3).then(|| {
        let a = &rungs[m - 3];
        let r = c.spacing / f.spacing;
        ((a.level - c.level) / (c.level - f.level)).abs().ln() / r.ln()
    });
    Ok(OracleD { d, error_estimate: (f.level - d).abs(), order: q, observed_order, rungs })
}

/// One row of an ε sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub epsilon: f64,
    /// `C_{ρ_ε}`, the level of the rescaled problem.
    pub level: f64,
    /// Level of the functional in the frame that was solved.
    pub frame_level: f64,
    /// `y_ε` in rescaled coordinates.
    pub mass_center: Vec<f64>,
    /// `ε y_ε`, in original coordinates.
    pub eps_times_center: Vec<f64>,
    /// Mass fraction in `B(ξ*, r)` (original coordinates), one per radius.
    pub fractions: Vec<f64>,
    /// `max_y ∫_{B(y,R)} |v_ε|^2` in rescaled coordinates.
    pub localization: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub error: Option<String>,
    #[serde(skip)]
    pub solution: Option<Field>,
}

/// Diagnostics shared by the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSetup {
    pub xi_star: Vec<f64>,
    pub radii: Vec<f64>,
    pub localization_radius: f64,
    pub assembly: AssemblyOptions,
    pub tail_correction: bool,
}

pub fn check_epsilons(eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::EpsilonInvalid);
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::EpsilonNotDescending);
    }
    Ok(())
}

fn sweep_record(spec: &ProblemSpec, epsilon: f64, gs: &GroundState, setup: &SweepSetup) -> Result<SweepRecord> {
    let n = spec.dim();
    let u = &gs.u;
    let centroid = u.mass_center()?;
    let (to_orig, level_scale) = match spec.frame {
        Frame::Original => (1.0, epsilon.powi(-(n as i32))),
        Frame::Rescaled => (epsilon, 1.0),
    };
    let eps_center: Vec<f64> = centroid[..n].iter().map(|c| c * to_orig).collect();
    let mass_center: Vec<f64> = eps_center.iter().map(|c| c / epsilon).collect();
    let fractions = setup
        .radii
        .iter()
        .map(|r| {
            let center: Vec<f64> = setup.xi_star.iter().map(|x| x / to_orig).collect();
            crate::field::mass_in_ball(u, &center, r / to_orig)
        })
        .collect::<Result<Vec<_>>>()?;
    let localization = match spec.frame {
        Frame::Original => {
            level_scale * crate::field::localization_profile(u, epsilon * setup.localization_radius)
        }
        Frame::Rescaled => crate::field::localization_profile(u, setup.localization_radius),
    };
    Ok(SweepRecord {
        epsilon,
        level: gs.level * level_scale,
        frame_level: gs.level,
        mass_center,
        eps_times_center: eps_center,
        fractions,
        localization,
        converged: gs.converged,
        iterations: gs.iterations,
        gradient_norm: gs.gradient_norm,
        error: None,
        solution: Some(u.clone()),
    })
}

/// Solves along a descending list of ε, warm-starting each solve from the previous one.
///
/// In the original frame the scoped form does not depend on ε and is assembled once.
pub fn sweep_epsilon(spec: &ProblemSpec, epsilons: &[f64], opts: &SolverOptions, setup: &SweepSetup) -> Result<Vec<SweepRecord>> {
    check_epsilons(epsilons)?;
    spec.validate()?;
    let shared = match spec.frame {
        Frame::Original => Some(spec.assemble(setup.assembly, setup.tail_correction)?),
        Frame::Rescaled => None,
    };
    let mut out = Vec::with_capacity(epsilons.len());
    let mut warm: Option<Field> = None;
    for &eps in epsilons {
        let problem = spec.with_epsilon(eps);
        let form = match &shared {
            Some(f) => f.clone(),
            None => problem.assemble(setup.assembly, setup.tail_correction)?,
        };
        let nodal = problem.nodal();
        let solved = match &warm {
            Some(u) => solve_from(&nodal, &form, u, opts),
            None => solve_ground_state(&nodal, &form, opts),
        };
        let record = solved.and_then(|gs| sweep_record(&problem, eps, &gs, setup));
        match record {
            Ok(r) => {
                warm = r.solution.clone();
                out.push(r);
            }
            Err(e) => out.push(SweepRecord {
                epsilon: eps,
                level: f64::NAN,
                frame_level: f64::NAN,
                mass_center: vec![f64::NAN; spec.dim()],
                eps_times_center: vec![f64::NAN; spec.dim()],
                fractions: vec![f64::NAN; setup.radii.len()],
                localization: f64::NAN,
                converged: false,
                iterations: 0,
                gradient_norm: f64::NAN,
                error: Some(e.to_string()),
                solution: None,
            }),
        }
    }
    Ok(out)
}
