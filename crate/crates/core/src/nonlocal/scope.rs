use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which form of the problem is being discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// `ε^{2α}(-Δ)_ρ^α u + Q(x)u = K(x)|u|^{p-1}u`
    Original,
    /// `(-Δ)_{ρ_ε}^α v + Q(εx)v = K(εx)|v|^{p-1}v` with `ρ_ε(x) = ρ(εx)/ε`
    Rescaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScopeKind {
    Constant,
    /// `ρ(x) = ρ∞ - (ρ∞ - ρ0) / (1 + |x|^2 / scale^2)`
    Saturating,
    /// No restriction; the full fractional form.
    Infinite,
}

/// Scope function `ρ(x)` of the regional operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScopeSpec {
    pub kind: ScopeKind,
    pub rho0: f64,
    pub rho_inf: f64,
    pub scale: f64,
}

impl ScopeSpec {
    pub fn constant(rho: f64) -> Self {
        Self { kind: ScopeKind::Constant, rho0: rho, rho_inf: rho, scale: 1.0 }
    }

    pub fn saturating(rho0: f64, rho_inf: f64, scale: f64) -> Self {
        Self { kind: ScopeKind::Saturating, rho0, rho_inf, scale }
    }

    pub fn infinite() -> Self {
        Self { kind: ScopeKind::Infinite, rho0: f64::INFINITY, rho_inf: f64::INFINITY, scale: 1.0 }
    }

    /// Checks the lower bound and limit hypotheses on the scope.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ScopeKind::Infinite => Ok(()),
            ScopeKind::Constant => {
                if !(self.rho0 > 0.0) || !self.rho0.is_finite() {
                    return Err(Error::Hypothesis(format!(
                        "(H1) requires rho0 > 0, got rho0={}",
                        self.rho0
                    )));
                }
                Ok(())
            }
            ScopeKind::Saturating => {
                if !(self.rho0 > 0.0) {
                    return Err(Error::Hypothesis(format!(
                        "(H1) requires rho0 > 0, got rho0={}",
                        self.rho0
                    )));
                }
                if !(self.rho_inf > self.rho0) || !self.rho_inf.is_finite() {
                    return Err(Error::Hypothesis(format!(
                        "(H1) requires rho0 < rho_inf < infinity for a saturating scope, got rho0={} rho_inf={}",
                        self.rho0, self.rho_inf
                    )));
                }
                if !(self.scale > 0.0) {
                    return Err(Error::Invalid(format!("scope scale must be positive, got {}", self.scale)));
                }
                Ok(())
            }
        }
    }

    /// `ρ(x)` in the original variables.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.kind {
            ScopeKind::Constant => self.rho0,
            ScopeKind::Infinite => f64::INFINITY,
            ScopeKind::Saturating => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                self.rho_inf - (self.rho_inf - self.rho0) / (1.0 + r2 / (self.scale * self.scale))
            }
        }
    }

    /// Lower bound `ρ0` of the scope.
    pub fn lower_bound(&self) -> f64 {
        self.rho0
    }
}

/// Scope radius at `x` in the requested frame: `ρ(x)` or `ρ(εx)/ε`.
pub fn eval_scope(spec: &ScopeSpec, x: &[f64], epsilon: f64, frame: Frame) -> f64 {
    match frame {
        Frame::Original => spec.eval(x),
        Frame::Rescaled => {
            let y: Vec<f64> = x.iter().map(|v| epsilon * v).collect();
            spec.eval(&y) / epsilon
        }
    }
}
