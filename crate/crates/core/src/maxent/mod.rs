//! Constrained maximum-entropy distributions on a salary grid, and the
//! closed-form lognormal equilibrium.
//!
//! The solver maximises `−Σ pᵢ ln pᵢ` over a discrete grid subject to
//! moment constraints, giving `pᵢ ∝ exp(−Σⱼ λⱼ φⱼ(Sᵢ))`. A mean-salary
//! constraint yields the exponential (Boltzmann) shape; constraints on the
//! first two moments of `ln S` yield the lognormal shape. That log-moment
//! set is chosen because it reproduces the lognormal form, not because the
//! market dynamics derive it.

mod lognormal;
mod solver;

use serde::Serialize;
use thiserror::Error;

pub use lognormal::{
    fit_lognormal, fit_lognormal_values, ks_statistic, ks_statistic_values, lognormal_cdf, lognormal_entropy,
    lognormal_moments, lognormal_pdf,
};
pub use solver::{discrete_entropy, solve_maxent, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaxentError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid constraint set: {0}")]
    InvalidConstraints(String),
    #[error("constraints are infeasible on this grid: {0}")]
    InfeasibleConstraints(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("invalid lognormal parameters mu={mu}, sigma={sigma}")]
    InvalidParams { mu: f64, sigma: f64 },
    #[error("lognormal support is s > 0, got {0}")]
    NonPositiveSupport(f64),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
}

/// Strictly increasing, positive salary levels, uniformly spaced in S.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SalaryGrid {
    levels: Vec<f64>,
    spacing: f64,
}

impl SalaryGrid {
    pub const DEFAULT_LEVELS: usize = 512;

    pub fn uniform(min: f64, max: f64, k: usize) -> Result<Self, MaxentError> {
        if k < 2 {
            return Err(MaxentError::InvalidGrid(format!("need at least 2 levels, got {k}")));
        }
        if !(min.is_finite() && max.is_finite() && min > 0.0 && max > min) {
            return Err(MaxentError::InvalidGrid(format!("need 0 < min < max, got [{min}, {max}]")));
        }
        let spacing = (max - min) / (k - 1) as f64;
        let levels = (0..k).map(|i| if i == k - 1 { max } else { min + spacing * i as f64 }).collect();
        Ok(SalaryGrid { levels, spacing })
    }

    /// `k` levels spanning `[mean/50, 50·mean]`.
    pub fn around_mean(mean: f64, k: usize) -> Result<Self, MaxentError> {
        SalaryGrid::uniform(mean / 50.0, mean * 50.0, k)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConstraintKind {
    /// E[S]
    MeanS,
    /// E[ln S]
    MeanLnS,
    /// E[(ln S)²]
    MeanLnSSq,
}

impl ConstraintKind {
    pub fn feature(self, s: f64) -> f64 {
        match self {
            ConstraintKind::MeanS => s,
            ConstraintKind::MeanLnS => s.ln(),
            ConstraintKind::MeanLnSSq => s.ln().powi(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub target: f64,
}

/// Moment constraints; normalisation is always implied.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ConstraintSet {
    constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<(ConstraintKind, f64)>) -> Result<Self, MaxentError> {
        let mut out: Vec<Constraint> = Vec::with_capacity(constraints.len());
        for (kind, target) in constraints {
            if !target.is_finite() {
                return Err(MaxentError::InvalidConstraints(format!("{kind:?} target {target} is not finite")));
            }
            if kind == ConstraintKind::MeanS && target <= 0.0 {
                return Err(MaxentError::InvalidConstraints(format!("MEAN_S target must be positive, got {target}")));
            }
            if kind == ConstraintKind::MeanLnSSq && target < 0.0 {
                return Err(MaxentError::InvalidConstraints(format!(
                    "MEAN_LN_S_SQ target must be non-negative, got {target}"
                )));
            }
            if out.iter().any(|c| c.kind == kind) {
                return Err(MaxentError::InvalidConstraints(format!("duplicate {kind:?}")));
            }
            out.push(Constraint { kind, target });
        }
        Ok(ConstraintSet { constraints: out })
    }

    pub fn empty() -> Self {
        ConstraintSet::default()
    }

    pub fn mean_salary(mean: f64) -> Result<Self, MaxentError> {
        ConstraintSet::new(vec![(ConstraintKind::MeanS, mean)])
    }

    /// `E[ln S] = μ`, `E[(ln S)²] = μ² + σ²`.
    pub fn log_moments(p: LognormalParams) -> Self {
        ConstraintSet::new(vec![
            (ConstraintKind::MeanLnS, p.mu()),
            (ConstraintKind::MeanLnSSq, p.mu() * p.mu() + p.sigma() * p.sigma()),
        ])
        .expect("finite lognormal parameters")
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }
}

/// Parameters of a lognormal law: `ln S ~ Normal(mu, sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LognormalParams {
    mu: f64,
    sigma: f64,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self, MaxentError> {
        if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
            return Err(MaxentError::InvalidParams { mu, sigma });
        }
        Ok(LognormalParams { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxentSolution {
    pub probabilities: Vec<f64>,
    /// One per constraint, in constraint order: `pᵢ ∝ exp(−Σ λⱼ φⱼ(Sᵢ))`.
    pub multipliers: Vec<f64>,
    /// Largest constraint residual, relative to `max(1, |target|)`.
    pub residual_norm: f64,
    pub iterations: usize,
    /// Dual objective after each accepted step, starting at `λ = 0`.
    #[serde(skip)]
    pub dual_trace: Vec<f64>,
}

impl MaxentSolution {
    pub fn entropy(&self) -> f64 {
        discrete_entropy(&self.probabilities)
    }
}
