//! Numerical studies built from the solver: the scaling law of the frozen
//! problems, concentration along an ε sweep, the level bounds, the `C(ξ)`
//! scan and the norm-equivalence audit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::{sample_points, CoeffSpec};
use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::functionals::{c_of_xi, condition_c_check, level_ratio, ConditionCReport, ConstCoeffProblem, ProblemSpec};
use crate::nonlocal::{
    assemble_full_form, assemble_regional_form, check_norm_equivalence, norm_equivalence_constant, AssemblyOptions,
    Frame, Quadrature, ScopeSpec,
};
use crate::solver::{solve_ground_state, sweep_epsilon, SolverOptions, SweepRecord, SweepSetup};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub q: f64,
    pub k: f64,
    pub computed_level: f64,
    pub predicted_level: f64,
    pub rel_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub d: f64,
    pub half_width: f64,
    pub points: usize,
    pub max_rel_error: f64,
}

/// Solves each frozen problem `(Q, K)` on the full form and compares with `Q^θ K^{-σ} D`.
pub fn verify_scaling_law(
    alpha: f64,
    p: f64,
    grid: Grid,
    pairs: &[(f64, f64)],
    quadrature: Quadrature,
    d: f64,
    opts: &SolverOptions,
) -> Result<ScalingReport> {
    if !(d > 0.0) {
        return Err(Error::Invalid(format!("reference level D must be positive, got {d}")));
    }
    let n = grid.dim();
    let form = assemble_full_form(&grid, alpha, true, quadrature)?;
    let rows = pairs
        .par_iter()
        .map(|&(q, k)| {
            let cp = ConstCoeffProblem { q_val: q, k_val: k, alpha, p, grid };
            cp.validate()?;
            let gs = solve_ground_state(&cp.nodal(), &form, opts)?;
            if !gs.converged {
                return Err(Error::Solver(format!("(Q,K)=({q},{k}) did not converge")));
            }
            let predicted = level_ratio(q, k, alpha, p, n) * d;
            Ok(ScalingRow {
                q,
                k,
                computed_level: gs.level,
                predicted_level: predicted,
                rel_error: (gs.level - predicted).abs() / predicted,
                converged: gs.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(ScalingReport { rows, d, half_width: grid.half_width(), points: grid.points(), max_rel_error })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub xi_star: Vec<f64>,
    pub condition: ConditionCReport,
    pub radii: Vec<f64>,
    pub rows: Vec<SweepRecord>,
    /// Per radius: fraction non-decreasing as ε decreases.
    pub nondecreasing: Vec<bool>,
    /// Per radius: fraction strictly increasing as ε decreases.
    pub increasing: Vec<bool>,
}

/// ξ-scan used for condition (C): `points` nodes per axis on `[-span, span]^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiScan {
    pub span: f64,
    pub points: usize,
}

impl Default for XiScan {
    fn default() -> Self {
        Self { span: 50.0, points: 2001 }
    }
}

/// ε sweep in the original frame around the minimizer `ξ*` of `Q^θ/K^σ`.
///
/// Fails with [`Error::NoConcentrationGap`] when condition (C) has no strict margin.
pub fn concentration_sweep(
    spec: &ProblemSpec,
    epsilons: &[f64],
    radii: &[f64],
    localization_radius: f64,
    scan: XiScan,
    assembly: AssemblyOptions,
    opts: &SolverOptions,
) -> Result<ConcentrationReport> {
    let n = spec.dim();
    let condition = condition_c_check(&spec.coeffs, spec.alpha, spec.p, n, scan.span, scan.points);
    if !condition.holds {
        return Err(Error::NoConcentrationGap(condition.margin));
    }
    let spec = ProblemSpec { frame: Frame::Original, ..spec.clone() };
    let mut opts = opts.clone();
    if opts.centers.is_empty() {
        opts.centers = vec![condition.argmin.clone()];
    }
    let setup = SweepSetup {
        xi_star: condition.argmin.clone(),
        radii: radii.to_vec(),
        localization_radius,
        assembly,
        tail_correction: true,
    };
    let rows = sweep_epsilon(&spec, epsilons, &opts, &setup)?;
    let trend = |strict: bool| {
        (0..radii.len())
            .map(|r| {
                rows.windows(2).all(|w| {
                    let (a, b) = (w[0].fractions[r], w[1].fractions[r]);
                    if strict { b > a } else { b >= a }
                })
            })
            .collect::<Vec<_>>()
    };
    Ok(ConcentrationReport {
        xi_star: condition.argmin.clone(),
        nondecreasing: trend(false),
        increasing: trend(true),
        condition,
        radii: radii.to_vec(),
        rows,
    })
}

/// `C(ρ0, a1, a2)`: ground level of the rescaled problem with scope `ρ0`, `Q ≡ a1`, `K ≡ a2`,
/// on `grid` (already in rescaled coordinates).
pub fn comparison_level(spec: &ProblemSpec, grid: Grid, assembly: AssemblyOptions, opts: &SolverOptions) -> Result<f64> {
    let rho0 = spec.scope.lower_bound();
    let problem = ProblemSpec {
        epsilon: 1.0,
        frame: Frame::Rescaled,
        scope: ScopeSpec::constant(rho0),
        coeffs: CoeffSpec::constant(spec.coeffs.a1, spec.coeffs.a2),
        grid,
        ..spec.clone()
    };
    let form = problem.assemble(assembly, true)?;
    let mut opts = opts.clone();
    opts.centers.clear();
    let gs = solve_ground_state(&problem.nodal(), &form, &opts)?;
    if !gs.converged {
        return Err(Error::Solver("comparison problem did not converge".into()));
    }
    Ok(gs.level)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelBounds {
    pub epsilon: f64,
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// `C(ρ0,a1,a2)(1 - lower_tol) ≤ C_{ρ_ε} ≤ min_ξ C(ξ) (1 + upper_tol)` for one sweep record.
///
/// The comparison problem lives on the sweep grid mapped to rescaled coordinates.
#[allow(clippy::too_many_arguments)]
pub fn level_bounds(
    spec: &ProblemSpec,
    record: &SweepRecord,
    min_c_xi: f64,
    lower_tol: f64,
    upper_tol: f64,
    assembly: AssemblyOptions,
    opts: &SolverOptions,
) -> Result<LevelBounds> {
    let g = spec.grid;
    let rescaled = match spec.frame {
        Frame::Original => Grid::new(g.dim(), g.half_width() / record.epsilon, g.points())?,
        Frame::Rescaled => g,
    };
    let lower = comparison_level(spec, rescaled, assembly, opts)?;
    Ok(LevelBounds {
        epsilon: record.epsilon,
        level: record.level,
        lower,
        upper: min_c_xi,
        lower_ok: lower * (1.0 - lower_tol) <= record.level,
        upper_ok: record.level <= min_c_xi * (1.0 + upper_tol),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CxiRow {
    pub xi: Vec<f64>,
    pub c_analytic: f64,
    pub c_spotcheck: Option<f64>,
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CxiTable {
    pub rows: Vec<CxiRow>,
    pub argmin: Vec<f64>,
    pub min: f64,
    pub max_spot_error: Option<f64>,
}

/// Tabulates `C(ξ)` on the scan grid; at each spot-check the frozen problem is
/// solved on `spot_grid` and its level appended to the nearest scan row (a new
/// row when the spot is off the scan grid). Ties in the argmin go to the
/// smallest index.
#[allow(clippy::too_many_arguments)]
pub fn scan_c_xi(
    coeffs: &CoeffSpec,
    alpha: f64,
    p: f64,
    n: usize,
    scan: XiScan,
    d: f64,
    spots: &[Vec<f64>],
    spot_grid: Grid,
    quadrature: Quadrature,
    opts: &SolverOptions,
) -> Result<CxiTable> {
    let mut rows: Vec<CxiRow> = sample_points(n, scan.span, scan.points)
        .into_iter()
        .map(|xi| CxiRow { c_analytic: c_of_xi(&xi, coeffs, alpha, p, n, d), xi, c_spotcheck: None, rel_error: None })
        .collect();
    let (mut min, mut argmin) = (f64::INFINITY, vec![0.0; n]);
    for r in &rows {
        if r.c_analytic < min {
            min = r.c_analytic;
            argmin = r.xi.clone();
        }
    }
    if !spots.is_empty() {
        let form = assemble_full_form(&spot_grid, alpha, true, quadrature)?;
        let levels = spots
            .par_iter()
            .map(|xi| {
                let cp = ConstCoeffProblem { q_val: coeffs.q.eval(xi), k_val: coeffs.k.eval(xi), alpha, p, grid: spot_grid };
                cp.validate()?;
                let gs = solve_ground_state(&cp.nodal(), &form, opts)?;
                if !gs.converged {
                    return Err(Error::Solver(format!("spot check at {xi:?} did not converge")));
                }
                Ok(gs.level)
            })
            .collect::<Result<Vec<_>>>()?;
        for (xi, level) in spots.iter().zip(levels) {
            let analytic = c_of_xi(xi, coeffs, alpha, p, n, d);
            let hit = rows.iter().position(|r| r.xi.iter().zip(xi).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs())));
            let row = match hit {
                Some(i) => &mut rows[i],
                None => {
                    rows.push(CxiRow { xi: xi.clone(), c_analytic: analytic, c_spotcheck: None, rel_error: None });
                    rows.last_mut().expect("just pushed")
                }
            };
            row.c_spotcheck = Some(level);
            row.rel_error = Some((level - row.c_analytic).abs() / row.c_analytic);
        }
        rows.sort_by(|a, b| a.xi.partial_cmp(&b.xi).expect("finite scan points"));
    }
    let max_spot_error = rows.iter().filter_map(|r| r.rel_error).reduce(f64::max);
    Ok(CxiTable { rows, argmin, min, max_spot_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditRow {
    pub sample: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormAuditReport {
    pub constant: f64,
    pub rows: Vec<AuditRow>,
    pub worst_ratio: f64,
    pub violations: usize,
}

/// Node-wise standard normal values smoothed by one three-point (nine-point in 2D) average.
pub fn smoothed_random_field(grid: Grid, rng: &mut ChaCha8Rng) -> Field {
    let raw: Vec<f64> = (0..grid.len()).map(|_| StandardNormal.sample(rng)).collect();
    let np = grid.points() as isize;
    let n = grid.dim();
    let values = (0..grid.len())
        .map(|i| {
            let m = grid.multi_index(i);
            let (mut s, mut c) = (0.0, 0.0);
            let second = if n == 1 { 0..=0 } else { -1..=1 };
            for a in -1..=1isize {
                for b in second.clone() {
                    let p = m[0] as isize + a;
                    let q = m[1] as isize + b;
                    if p < 0 || p >= np || (n == 2 && (q < 0 || q >= np)) {
                        continue;
                    }
                    s += raw[grid.flat_index([p as usize, q as usize])];
                    c += 1.0;
                }
            }
            s / c
        })
        .collect();
    Field::new(grid, values).expect("finite by construction")
}

/// Draws `samples` smoothed random fields and checks `‖u‖ ≤ 𝔖 ‖u‖_ρ` for each,
/// with the regional form of `spec` in its own frame and the ghost-consistent full form.
pub fn norm_equivalence_audit(spec: &ProblemSpec, samples: usize, seed: u64, assembly: AssemblyOptions) -> Result<NormAuditReport> {
    if samples == 0 {
        return Err(Error::Invalid("sample count must be at least 1".into()));
    }
    spec.validate()?;
    let grid = spec.grid;
    let regional = assemble_regional_form(&grid, &spec.scope_radii(), spec.alpha, assembly)?;
    let full = assemble_full_form(&grid, spec.alpha, true, assembly.quadrature)?;
    let q = spec.nodal().q;
    let (a1, rho0) = (spec.coeffs.a1, spec.scope.lower_bound());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(samples);
    for sample in 0..samples {
        let mut u = smoothed_random_field(grid, &mut rng);
        while u.is_zero() {
            u = smoothed_random_field(grid, &mut rng);
        }
        let r = check_norm_equivalence(&u, &regional, &full, &q, a1, rho0)?;
        rows.push(AuditRow { sample, lhs: r.lhs, rhs: r.rhs, ratio: r.lhs / r.rhs, holds: r.holds });
    }
    let worst_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let violations = rows.iter().filter(|r| !r.holds).count();
    Ok(NormAuditReport {
        constant: norm_equivalence_constant(a1, spec.alpha, rho0, grid.dim()),
        rows,
        worst_ratio,
        violations,
    })
}
