//! Energy functionals, their gradients, the Nehari projection and the analytic
//! ground-state energy function `C(ξ)`.

use serde::{Deserialize, Serialize};

use crate::coeffs::{sample_points, CoeffSpec};
use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::nonlocal::{
    apply_form, assemble_full_form, assemble_regional_form, eval_scope, quad_energy, AssemblyOptions, Frame,
    QuadForm, ScopeKind, ScopeSpec,
};

/// Checks `n > 2α` and `1 < p < (n+2α)/(n-2α)`.
pub fn check_exponents(alpha: f64, p: f64, n: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let nf = n as f64;
    if !(nf > 2.0 * alpha) {
        return Err(Error::Hypothesis(format!("n > 2α violated (n={n}, α={alpha})")));
    }
    let critical = (nf + 2.0 * alpha) / (nf - 2.0 * alpha);
    if !(p > 1.0 && p < critical) {
        // twelve significant digits hide the round-off in the quotient
        let shown: f64 = format!("{critical:.11e}").parse().unwrap_or(critical);
        return Err(Error::Hypothesis(format!("p={p} violates 1<p<(n+2α)/(n−2α)={shown}")));
    }
    Ok(())
}

/// A full instance of the scoped problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub p: f64,
    pub epsilon: f64,
    pub frame: Frame,
    pub scope: ScopeSpec,
    pub coeffs: CoeffSpec,
    pub grid: Grid,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn validate(&self) -> Result<()> {
        check_exponents(self.alpha, self.p, self.dim())?;
        if !(self.epsilon > 0.0) {
            return Err(Error::Invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        self.scope.validate()?;
        let span = 4.0 * self.grid.half_width().max(50.0);
        self.coeffs.validate(&sample_points(self.dim(), span, if self.dim() == 1 { 4001 } else { 201 }))
    }

    /// Node position mapped to the argument of `Q`, `K` and `ρ`.
    fn coefficient_point(&self, x: [f64; 2]) -> Vec<f64> {
        let s = match self.frame {
            Frame::Original => 1.0,
            Frame::Rescaled => self.epsilon,
        };
        x[..self.dim()].iter().map(|v| s * v).collect()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..self.clone() }
    }

    /// Per-node scope radius in the problem's frame.
    pub fn scope_radii(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| {
                let x = self.grid.node(i);
                eval_scope(&self.scope, &x[..self.dim()], self.epsilon, self.frame)
            })
            .collect()
    }

    pub fn nodal(&self) -> NodalProblem {
        let (q, k) = (0..self.grid.len())
            .map(|i| {
                let y = self.coefficient_point(self.grid.node(i));
                (self.coeffs.q.eval(&y), self.coeffs.k.eval(&y))
            })
            .unzip();
        let prefactor = match self.frame {
            Frame::Original => self.epsilon.powf(2.0 * self.alpha),
            Frame::Rescaled => 1.0,
        };
        NodalProblem { grid: self.grid, alpha: self.alpha, p: self.p, prefactor, q, k }
    }

    /// Regional form for the scope in this frame, or the full form for an infinite scope.
    pub fn assemble(&self, opts: AssemblyOptions, tail_correction: bool) -> Result<QuadForm> {
        match self.scope.kind {
            ScopeKind::Infinite => assemble_full_form(&self.grid, self.alpha, tail_correction, opts.quadrature),
            _ => assemble_regional_form(&self.grid, &self.scope_radii(), self.alpha, opts),
        }
    }
}

/// Frozen-coefficient problem `(-Δ)^α u + Q u = K |u|^{p-1} u` on the full form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstCoeffProblem {
    pub q_val: f64,
    pub k_val: f64,
    pub alpha: f64,
    pub p: f64,
    pub grid: Grid,
}

impl ConstCoeffProblem {
    pub fn validate(&self) -> Result<()> {
        check_exponents(self.alpha, self.p, self.grid.dim())?;
        if !(self.q_val > 0.0 && self.k_val > 0.0) {
            return Err(Error::Invalid("constant coefficients must be positive".into()));
        }
        Ok(())
    }

    pub fn nodal(&self) -> NodalProblem {
        let len = self.grid.len();
        NodalProblem {
            grid: self.grid,
            alpha: self.alpha,
            p: self.p,
            prefactor: 1.0,
            q: vec![self.q_val; len],
            k: vec![self.k_val; len],
        }
    }
}

/// Discretized problem: nodal `Q`, `K` and the prefactor of the quadratic form
/// (`ε^{2α}` in the original frame, 1 otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct NodalProblem {
    pub grid: Grid,
    pub alpha: f64,
    pub p: f64,
    pub prefactor: f64,
    pub q: Vec<f64>,
    pub k: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub total: f64,
    /// Prefactor times `uᵀAu`.
    pub quadratic: f64,
    /// `Σ h^n Q u^2`
    pub potential: f64,
    /// `Σ h^n K |u|^{p+1}`
    pub nonlinear: f64,
}

impl NodalProblem {
    fn check(&self, form: &QuadForm, u: &Field) -> Result<()> {
        if self.grid.same_as(form.grid()) && self.grid.same_as(u.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn potential(&self, u: &Field) -> f64 {
        let s: f64 = u.values().iter().zip(&self.q).map(|(v, q)| q * v * v).sum();
        self.grid.cell_volume() * s
    }

    pub fn nonlinear(&self, u: &Field) -> f64 {
        let s: f64 = u.values().iter().zip(&self.k).map(|(v, k)| k * v.abs().powf(self.p + 1.0)).sum();
        self.grid.cell_volume() * s
    }

    /// `‖u‖^2 = prefactor · uᵀAu + Σ h^n Q u^2`.
    pub fn norm_sq(&self, form: &QuadForm, u: &Field) -> Result<f64> {
        self.check(form, u)?;
        Ok(self.prefactor * quad_energy(form, u)? + self.potential(u))
    }

    /// Scale-invariant Nehari quotient `(‖u‖^2)^{(p+1)/(p-1)} / (∫K|u|^{p+1})^{2/(p-1)}`.
    pub fn quotient(&self, form: &QuadForm, u: &Field) -> Result<f64> {
        let s = self.norm_sq(form, u)?;
        let nl = self.nonlinear(u);
        if !(nl > 0.0) {
            return Err(Error::VanishingNonlinearity);
        }
        Ok(quotient_from_parts(s, nl, self.p))
    }

    /// `½ - 1/(p+1)`
    pub fn level_factor(&self) -> f64 {
        0.5 - 1.0 / (self.p + 1.0)
    }
}

pub(crate) fn quotient_from_parts(norm_sq: f64, nonlinear: f64, p: f64) -> f64 {
    // logs keep large exponents (p near 1) in range
    ((p + 1.0) / (p - 1.0) * norm_sq.ln() - 2.0 / (p - 1.0) * nonlinear.ln()).exp()
}

pub fn energy(problem: &NodalProblem, form: &QuadForm, u: &Field) -> Result<EnergyReport> {
    problem.check(form, u)?;
    let quadratic = problem.prefactor * quad_energy(form, u)?;
    let potential = problem.potential(u);
    let nonlinear = problem.nonlinear(u);
    Ok(EnergyReport {
        total: 0.5 * (quadratic + potential) - nonlinear / (problem.p + 1.0),
        quadratic,
        potential,
        nonlinear,
    })
}

/// Discrete `L^2` gradient: `E(u + tw) = E(u) + t · h^n Σ g_i w_i + O(t^2)`.
pub fn gradient(problem: &NodalProblem, form: &QuadForm, u: &Field) -> Result<Field> {
    problem.check(form, u)?;
    let au = apply_form(form, u)?;
    let scale = problem.prefactor / problem.grid.cell_volume();
    let p = problem.p;
    let g = au
        .values()
        .iter()
        .zip(u.values())
        .zip(problem.q.iter().zip(&problem.k))
        .map(|((a, v), (q, k))| scale * a + q * v - k * v.abs().powf(p - 1.0) * v)
        .collect();
    Field::new(problem.grid, g)
}

/// Unique `t > 0` with `t u` on the Nehari manifold.
pub fn nehari_t(problem: &NodalProblem, form: &QuadForm, u: &Field) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let s = problem.norm_sq(form, u)?;
    let nl = problem.nonlinear(u);
    if !(nl > 0.0) {
        return Err(Error::VanishingNonlinearity);
    }
    Ok((s / nl).powf(1.0 / (problem.p - 1.0)))
}

/// Energy of the Nehari projection of `u`; an upper bound on the ground level.
pub fn level_from_field(problem: &NodalProblem, form: &QuadForm, u: &Field) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    Ok(problem.level_factor() * problem.quotient(form, u)?)
}

/// Exponents `θ = (p+1)/(p-1) - n/(2α)` and `σ = 2/(p-1)`.
pub fn level_exponents(alpha: f64, p: f64, n: usize) -> (f64, f64) {
    ((p + 1.0) / (p - 1.0) - n as f64 / (2.0 * alpha), 2.0 / (p - 1.0))
}

/// `Q^θ / K^σ`, the factor multiplying `D` in `C(ξ)`.
pub fn level_ratio(q: f64, k: f64, alpha: f64, p: f64, n: usize) -> f64 {
    let (theta, sigma) = level_exponents(alpha, p, n);
    q.powf(theta) / k.powf(sigma)
}

/// `C(ξ) = Q(ξ)^θ / K(ξ)^σ · D`.
pub fn c_of_xi(xi: &[f64], coeffs: &CoeffSpec, alpha: f64, p: f64, n: usize, d: f64) -> f64 {
    level_ratio(coeffs.q.eval(xi), coeffs.k.eval(xi), alpha, p, n) * d
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCReport {
    pub holds: bool,
    pub argmin: Vec<f64>,
    pub min_ratio: f64,
    pub limit_ratio: f64,
    /// `Q∞^θ/K∞^σ - min_grid Q^θ/K^σ`
    pub margin: f64,
}

/// Scans `Q^θ/K^σ` on `points^n` uniform nodes of `[-span, span]^n`; ties go to the smallest index.
pub fn condition_c_check(
    coeffs: &CoeffSpec,
    alpha: f64,
    p: f64,
    n: usize,
    span: f64,
    points: usize,
) -> ConditionCReport {
    let mut best = f64::INFINITY;
    let mut argmin = vec![0.0; n];
    for xi in sample_points(n, span, points) {
        let r = level_ratio(coeffs.q.eval(&xi), coeffs.k.eval(&xi), alpha, p, n);
        if r < best {
            best = r;
            argmin = xi;
        }
    }
    let limit = level_ratio(coeffs.q_inf(), coeffs.k_inf(), alpha, p, n);
    ConditionCReport { holds: best < limit, argmin, min_ratio: best, limit_ratio: limit, margin: limit - best }
}
