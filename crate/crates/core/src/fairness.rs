//! Inequality and fairness measures over salary data.
//!
//! All logarithms are natural. Entropy sums use `0 ln 0 = 0`. Sample-based
//! log measures reject non-positive salaries instead of dropping them.

use serde::Serialize;
use thiserror::Error;

use crate::model::{CategoryDistribution, SalarySample};
use crate::money::Money;
use crate::numeric::{compensated_sum, xlogx};
use crate::statmech::{self, MultiplicityMethod};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("distribution has no employees")]
    EmptyDistribution,
    #[error("sample is empty")]
    EmptySample,
    #[error("salary at index {index} must be positive, got {salary}")]
    NonPositiveSalary { index: usize, salary: Money },
    #[error("total income is zero")]
    ZeroTotalIncome,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

fn require_positive(sample: &SalarySample) -> Result<(), MetricError> {
    match sample.salaries().iter().position(|s| !s.is_positive()) {
        Some(index) => Err(MetricError::NonPositiveSalary { index, salary: sample.salaries()[index] }),
        None => Ok(()),
    }
}

/// Shannon entropy `−Σ pᵢ ln pᵢ` of raw category counts.
pub fn shannon_entropy_counts(counts: &[u64]) -> Result<f64, MetricError> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(MetricError::EmptyDistribution);
    }
    let n = n as f64;
    Ok(0.0 - compensated_sum(counts.iter().map(|&c| xlogx(c as f64 / n))))
}

/// Shannon entropy of a macrostate, in nats. Lies in `[0, ln k]`.
pub fn shannon_entropy(dist: &CategoryDistribution) -> Result<f64, MetricError> {
    shannon_entropy_counts(dist.counts())
}

/// Income shares `Sᵢ / ΣS`. Exactly scale-free: `c·S` gives identical bits
/// as long as totals stay below 2⁵³ minor units.
pub fn income_shares(sample: &SalarySample) -> Result<Vec<f64>, MetricError> {
    let total = sample.total();
    if total <= 0 {
        return Err(MetricError::ZeroTotalIncome);
    }
    let total = total as f64;
    Ok(sample.salaries().iter().map(|s| s.minor() as f64 / total).collect())
}

/// Entropy of individual income shares, in nats. Lies in `(0, ln N]`.
pub fn share_entropy(sample: &SalarySample) -> Result<f64, MetricError> {
    require_positive(sample)?;
    let shares = income_shares(sample)?;
    Ok(0.0 - compensated_sum(shares.into_iter().map(xlogx)))
}

/// Share entropy of a sample given as `(count, salary)` groups, without
/// expanding it.
pub fn grouped_share_entropy(groups: &[(u64, Money)]) -> Result<f64, MetricError> {
    let mut index = 0usize;
    let mut total = 0i128;
    for &(count, salary) in groups {
        if count > 0 && !salary.is_positive() {
            return Err(MetricError::NonPositiveSalary { index, salary });
        }
        index += count as usize;
        total += count as i128 * salary.minor() as i128;
    }
    if total <= 0 {
        return Err(MetricError::ZeroTotalIncome);
    }
    let total = total as f64;
    Ok(0.0 - compensated_sum(groups.iter().map(|&(count, salary)| count as f64 * xlogx(salary.minor() as f64 / total))))
}

/// Share entropy divided by `ln N`; `1` for equal pay at any `N ≥ 2`.
pub fn normalized_share_entropy(sample: &SalarySample) -> Result<f64, MetricError> {
    let h = share_entropy(sample)?;
    let n = sample.len();
    if n < 2 {
        return Ok(1.0);
    }
    Ok(h / (n as f64).ln())
}

/// Theil index `T = (1/N) Σ (Sᵢ/S̄) ln(Sᵢ/S̄)`.
pub fn theil_index(sample: &SalarySample) -> Result<f64, MetricError> {
    require_positive(sample)?;
    let n = sample.len() as i128;
    let total = sample.total() as f64;
    let terms = sample.salaries().iter().map(|s| xlogx((n * s.minor() as i128) as f64 / total));
    Ok(compensated_sum(terms) / n as f64)
}

/// Theil index split into between-group and within-group parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheilDecomposition {
    pub total: f64,
    pub between: f64,
    /// Theil index of each group, in partition order.
    pub within: Vec<f64>,
    /// Income share of each group; weights the within terms.
    pub income_weights: Vec<f64>,
}

impl TheilDecomposition {
    /// `between + Σ weight_g · within_g`.
    pub fn reconstructed_total(&self) -> f64 {
        self.between + compensated_sum(self.within.iter().zip(&self.income_weights).map(|(t, w)| t * w))
    }
}

/// Exact Theil decomposition over a partition of sample indices.
pub fn theil_decomposition(sample: &SalarySample, groups: &[Vec<usize>]) -> Result<TheilDecomposition, MetricError> {
    require_positive(sample)?;
    let n = sample.len();
    let mut seen = vec![false; n];
    for (g, members) in groups.iter().enumerate() {
        if members.is_empty() {
            return Err(MetricError::InvalidPartition(format!("group {g} is empty")));
        }
        for &i in members {
            if i >= n {
                return Err(MetricError::InvalidPartition(format!("index {i} out of range")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(MetricError::InvalidPartition(format!("index {i} appears twice")));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(MetricError::InvalidPartition(format!("index {missing} is not covered")));
    }

    let total_income = sample.total() as f64;
    let mut between_terms = Vec::with_capacity(groups.len());
    let mut within = Vec::with_capacity(groups.len());
    let mut income_weights = Vec::with_capacity(groups.len());
    for members in groups {
        let sub = SalarySample::new(members.iter().map(|&i| sample.salaries()[i]).collect())
            .expect("non-empty subgroup of a valid sample");
        let weight = sub.total() as f64 / total_income;
        let pop_share = members.len() as f64 / n as f64;
        between_terms.push(weight * (weight / pop_share).ln());
        within.push(theil_index(&sub)?);
        income_weights.push(weight);
    }
    Ok(TheilDecomposition {
        total: theil_index(sample)?,
        between: compensated_sum(between_terms),
        within,
        income_weights,
    })
}

/// Gini coefficient from the exact mean absolute difference.
///
/// Uses `Σᵢⱼ|Sᵢ−Sⱼ| = 2 Σᵢ (2i−N−1) S₍ᵢ₎` over the sorted sample, evaluated
/// in integers and reduced before the final division.
pub fn gini(sample: &SalarySample) -> Result<f64, MetricError> {
    let total = sample.total();
    if total <= 0 {
        return Err(MetricError::ZeroTotalIncome);
    }
    let mut sorted: Vec<i128> = sample.salaries().iter().map(|s| s.minor() as i128).collect();
    sorted.sort_unstable();
    let n = sorted.len() as i128;
    let numer: i128 = sorted.iter().enumerate().map(|(i, &s)| (2 * (i as i128 + 1) - n - 1) * s).sum();
    let denom = n * total;
    let g = gcd_i128(numer, denom);
    Ok((numer / g) as f64 / (denom / g) as f64)
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Salary of the least well-off employee.
pub fn maximin(sample: &SalarySample) -> Result<Money, MetricError> {
    sample.salaries().iter().copied().min().ok_or(MetricError::EmptySample)
}

/// Summary of every fairness measure for one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessReport {
    /// Share entropy.
    pub entropy_nats: f64,
    pub theil: f64,
    pub gini: f64,
    pub maximin: Money,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_multiplicity_nats: Option<f64>,
    pub n: u64,
    pub mean_salary: Money,
}

/// Computes the report; the multiplicity is included when category data is given.
pub fn fairness_report(
    sample: &SalarySample,
    categories: Option<&CategoryDistribution>,
) -> Result<FairnessReport, MetricError> {
    let log_multiplicity_nats = match categories {
        Some(dist) => Some(
            statmech::log_multiplicity(dist, MultiplicityMethod::ExactLogGamma)
                .map_err(|_| MetricError::EmptyDistribution)?
                .log_w_nats,
        ),
        None => None,
    };
    Ok(FairnessReport {
        entropy_nats: share_entropy(sample)?,
        theil: theil_index(sample)?,
        gini: gini(sample)?,
        maximin: maximin(sample)?,
        log_multiplicity_nats,
        n: sample.len() as u64,
        mean_salary: sample.mean(),
    })
}
