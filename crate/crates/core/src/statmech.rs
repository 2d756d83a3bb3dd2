//! Multiplicity and macrostate accounting.
//!
//! `W = N! / (n₁! n₂! … n_k!)` is only ever handled as `ln W`.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::model::{CategoryDistribution, ModelError, SalarySample};
use crate::money::Money;
use crate::numeric::compensated_sum;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatmechError {
    #[error("distribution has no employees")]
    EmptyDistribution,
    #[error("salary {salary} at index {index} is not on any level")]
    UnmappableSalary { index: usize, salary: Money },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MultiplicityMethod {
    ExactLogGamma,
    Stirling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplicityResult {
    pub log_w_nats: f64,
    pub method: MultiplicityMethod,
}

impl MultiplicityResult {
    pub fn log10_w(&self) -> f64 {
        self.log_w_nats / std::f64::consts::LN_10
    }
}

/// `ln n!`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Stirling's `n ln n − n`, with `0` for `n = 0`.
pub fn stirling_ln_factorial(n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        let n = n as f64;
        n * n.ln() - n
    }
}

/// `ln W` for raw category counts.
pub fn log_multiplicity_counts(
    counts: &[u64],
    method: MultiplicityMethod,
) -> Result<MultiplicityResult, StatmechError> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(StatmechError::EmptyDistribution);
    }
    let lnf = match method {
        MultiplicityMethod::ExactLogGamma => ln_factorial,
        MultiplicityMethod::Stirling => stirling_ln_factorial,
    };
    // A single occupied category is exactly one microstate.
    let occupied = counts.iter().filter(|&&c| c > 0).count();
    let log_w = if occupied == 1 { 0.0 } else { lnf(n) - compensated_sum(counts.iter().map(|&c| lnf(c))) };
    Ok(MultiplicityResult { log_w_nats: log_w.max(0.0), method })
}

pub fn log_multiplicity(
    dist: &CategoryDistribution,
    method: MultiplicityMethod,
) -> Result<MultiplicityResult, StatmechError> {
    log_multiplicity_counts(dist.counts(), method)
}

/// Error of Stirling's approximation, `ln n! − (n ln n − n)`.
///
/// Positive and increasing; behaves like `½ ln(2πn)`.
pub fn stirling_gap(n: u64) -> f64 {
    assert!(n >= 1, "stirling_gap needs n >= 1");
    ln_factorial(n) - stirling_ln_factorial(n)
}

/// Per-employee Stirling multiplicity `(1/N) ln W`, equal to the
/// macrostate's Shannon entropy.
pub fn entropy_from_multiplicity(dist: &CategoryDistribution) -> Result<f64, StatmechError> {
    let n = dist.total();
    let log_w = log_multiplicity(dist, MultiplicityMethod::Stirling)?;
    Ok(log_w.log_w_nats / n as f64)
}

/// How salaries are assigned to levels in [`macrostate_of`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binning {
    /// A salary must equal one of the levels.
    Exact,
    /// Level `i` covers `[levelᵢ, levelᵢ₊₁)`; the first bin also takes
    /// everything below the first level and the last is unbounded above.
    Interval,
}

/// Counts employees per level.
pub fn macrostate_of(
    sample: &SalarySample,
    levels: &[Money],
    binning: Binning,
) -> Result<CategoryDistribution, StatmechError> {
    // Validates that levels are positive and strictly increasing.
    CategoryDistribution::new(levels.to_vec(), vec![0; levels.len()])?;
    let mut counts = vec![0u64; levels.len()];
    for (index, &salary) in sample.salaries().iter().enumerate() {
        let bin = match binning {
            Binning::Exact => levels.binary_search(&salary).ok(),
            Binning::Interval if levels.is_empty() => None,
            Binning::Interval => Some(levels.partition_point(|&l| l <= salary).saturating_sub(1)),
        };
        match bin {
            Some(b) => counts[b] += 1,
            None => return Err(StatmechError::UnmappableSalary { index, salary }),
        }
    }
    Ok(CategoryDistribution::new(levels.to_vec(), counts)?)
}
