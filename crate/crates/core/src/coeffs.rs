//! Analytic potentials `Q(x)` and `K(x)` with the bounds and limits they must satisfy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smooth profile that tends to `inf_value` as `|x| → ∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoeffProfile {
    Constant(f64),
    /// `inf - (inf - center_value) / (1 + |x - center|^2 / width^2)`
    Lorentzian { center: Vec<f64>, center_value: f64, inf_value: f64, width: f64 },
    /// `inf - (inf - center_value) exp(-|x - center|^2 / width^2)`
    Gaussian { center: Vec<f64>, center_value: f64, inf_value: f64, width: f64 },
}

impl CoeffProfile {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2 = |c: &[f64]| -> f64 {
            x.iter()
                .enumerate()
                .map(|(d, v)| {
                    let t = v - c.get(d).copied().unwrap_or(0.0);
                    t * t
                })
                .sum()
        };
        match self {
            CoeffProfile::Constant(c) => *c,
            CoeffProfile::Lorentzian { center, center_value, inf_value, width } => {
                inf_value - (inf_value - center_value) / (1.0 + r2(center) / (width * width))
            }
            CoeffProfile::Gaussian { center, center_value, inf_value, width } => {
                inf_value - (inf_value - center_value) * (-r2(center) / (width * width)).exp()
            }
        }
    }

    /// Limit at infinity.
    pub fn limit(&self) -> f64 {
        match self {
            CoeffProfile::Constant(c) => *c,
            CoeffProfile::Lorentzian { inf_value, .. } | CoeffProfile::Gaussian { inf_value, .. } => {
                *inf_value
            }
        }
    }

    /// Exact infimum and supremum over `ℝ^n` (both profiles are monotone in the radius).
    pub fn range(&self) -> (f64, f64) {
        match self {
            CoeffProfile::Constant(c) => (*c, *c),
            CoeffProfile::Lorentzian { center_value, inf_value, .. }
            | CoeffProfile::Gaussian { center_value, inf_value, .. } => {
                (center_value.min(*inf_value), center_value.max(*inf_value))
            }
        }
    }

    fn validate_shape(&self, name: &str) -> Result<()> {
        match self {
            CoeffProfile::Constant(_) => Ok(()),
            CoeffProfile::Lorentzian { width, .. } | CoeffProfile::Gaussian { width, .. } => {
                if *width > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Invalid(format!("{name} profile width must be positive")))
                }
            }
        }
    }
}

/// `Q`, `K` and their common bounds `0 < a1 ≤ Q, K ≤ a2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSpec {
    pub q: CoeffProfile,
    pub k: CoeffProfile,
    pub a1: f64,
    pub a2: f64,
}

impl CoeffSpec {
    /// Bounds default to the tightest admissible pair.
    pub fn new(q: CoeffProfile, k: CoeffProfile) -> Self {
        let (qlo, qhi) = q.range();
        let (klo, khi) = k.range();
        Self { a1: qlo.min(klo), a2: qhi.max(khi), q, k }
    }

    pub fn with_bounds(mut self, a1: f64, a2: f64) -> Self {
        self.a1 = a1;
        self.a2 = a2;
        self
    }

    pub fn constant(q: f64, k: f64) -> Self {
        Self::new(CoeffProfile::Constant(q), CoeffProfile::Constant(k))
    }

    pub fn q_inf(&self) -> f64 {
        self.q.limit()
    }

    pub fn k_inf(&self) -> f64 {
        self.k.limit()
    }

    /// Checks positivity of the limits and the two-sided bounds, both from the
    /// exact ranges and on the supplied sample points.
    pub fn validate(&self, samples: &[Vec<f64>]) -> Result<()> {
        self.q.validate_shape("Q")?;
        self.k.validate_shape("K")?;
        if !(self.q_inf() > 0.0 && self.k_inf() > 0.0) {
            return Err(Error::Hypothesis(format!(
                "(H0) requires Q_inf > 0 and K_inf > 0, got Q_inf={} K_inf={}",
                self.q_inf(),
                self.k_inf()
            )));
        }
        if !(self.a1 > 0.0) {
            return Err(Error::Hypothesis(format!("(H2) requires a1 > 0, got a1={}", self.a1)));
        }
        if !(self.a2 >= self.a1) {
            return Err(Error::Hypothesis(format!(
                "(H2) requires a1 <= a2, got a1={} a2={}",
                self.a1, self.a2
            )));
        }
        let (qlo, qhi) = self.q.range();
        let (klo, khi) = self.k.range();
        let mut lo = qlo.min(klo);
        let mut hi = qhi.max(khi);
        for x in samples {
            for v in [self.q.eval(x), self.k.eval(x)] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if lo < self.a1 || hi > self.a2 {
            return Err(Error::Hypothesis(format!(
                "(H2) requires a1 <= Q(x),K(x) <= a2; observed range [{lo}, {hi}] with a1={} a2={}",
                self.a1, self.a2
            )));
        }
        Ok(())
    }
}

/// Sample points on `[-span, span]^n` used for hypothesis checks.
pub fn sample_points(n: usize, span: f64, per_dim: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..per_dim)
        .map(|k| -span + 2.0 * span * k as f64 / (per_dim - 1) as f64)
        .collect();
    match n {
        1 => axis.iter().map(|&x| vec![x]).collect(),
        _ => axis.iter().flat_map(|&x| axis.iter().map(move |&y| vec![x, y])).collect(),
    }
}
