use serde::Serialize;

use super::{quad_energy, FormKind, QuadForm};
use crate::error::{Error, Result};
use crate::field::{lp_norm_weighted, Field, Weight};

/// `|S^{n-1}|`: 2 for `n = 1`, `2π` for `n = 2`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => unreachable!("grids are one- or two-dimensional"),
    }
}

/// `A / a1` with `A = max{a1, 1 + 2|S^{n-1}| / (α ρ0^{2α})}`.
pub fn norm_equivalence_constant(a1: f64, alpha: f64, rho0: f64, n: usize) -> f64 {
    let a = a1.max(1.0 + 2.0 * sphere_area(n) / (alpha * rho0.powf(2.0 * alpha)));
    a / a1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEquivalenceReport {
    /// Full `H^α` norm.
    pub lhs: f64,
    /// Constant times the scoped norm.
    pub rhs: f64,
    pub constant: f64,
    pub holds: bool,
}

/// Evaluates `‖u‖ ≤ S ‖u‖_ρ` for one field.
///
/// `q` holds the nodal potential, `a1` its lower bound and `rho0` the scope
/// lower bound used in the constant.
pub fn check_norm_equivalence(
    u: &Field,
    regional: &QuadForm,
    full: &QuadForm,
    q: &[f64],
    a1: f64,
    rho0: f64,
) -> Result<NormEquivalenceReport> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    if full.meta().kind != FormKind::Full {
        return Err(Error::Invalid("left-hand side needs the full form".into()));
    }
    let mass = u.mass();
    let lhs = (quad_energy(full, u)? + mass).sqrt();
    let potential = lp_norm_weighted(u, 2.0, Weight::Nodal(q))?.powi(2);
    let constant = norm_equivalence_constant(a1, regional.alpha(), rho0, u.grid().dim());
    let rhs = constant * (quad_energy(regional, u)? + potential).sqrt();
    Ok(NormEquivalenceReport { lhs, rhs, constant, holds: lhs <= rhs })
}
