use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erfc;

use super::{LognormalParams, MaxentError};
use crate::model::SalarySample;
use crate::numeric::compensated_sum;

/// Density `1/(s σ √(2π)) · exp(−(ln s − μ)² / (2σ²))`.
pub fn lognormal_pdf(s: f64, p: LognormalParams) -> Result<f64, MaxentError> {
    if s.is_nan() || s <= 0.0 {
        return Err(MaxentError::NonPositiveSupport(s));
    }
    let z = (s.ln() - p.mu()) / p.sigma();
    Ok((-0.5 * z * z).exp() / (s * p.sigma() * (2.0 * PI).sqrt()))
}

/// `Φ((ln s − μ)/σ)`; zero for `s ≤ 0`.
pub fn lognormal_cdf(s: f64, p: LognormalParams) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let z = (s.ln() - p.mu()) / p.sigma();
    0.5 * erfc(-z / SQRT_2)
}

/// `(E[S], Var[S]) = (e^{μ+σ²/2}, (e^{σ²} − 1) e^{2μ+σ²})`.
pub fn lognormal_moments(p: LognormalParams) -> (f64, f64) {
    let s2 = p.sigma() * p.sigma();
    let mean = (p.mu() + 0.5 * s2).exp();
    let variance = s2.exp_m1() * (2.0 * p.mu() + s2).exp();
    (mean, variance)
}

/// Differential entropy `μ + ½ ln(2πeσ²)`, in nats.
pub fn lognormal_entropy(p: LognormalParams) -> f64 {
    p.mu() + 0.5 * (2.0 * PI * std::f64::consts::E * p.sigma() * p.sigma()).ln()
}

/// Maximum-likelihood fit on logs: mean and population standard deviation
/// of `ln sᵢ`.
pub fn fit_lognormal_values(values: &[f64]) -> Result<LognormalParams, MaxentError> {
    if values.len() < 2 {
        return Err(MaxentError::DegenerateSample(format!("need at least 2 values, got {}", values.len())));
    }
    if let Some(bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(MaxentError::NonPositiveSupport(*bad));
    }
    let n = values.len() as f64;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mu = compensated_sum(logs.iter().copied()) / n;
    let var = compensated_sum(logs.iter().map(|l| (l - mu).powi(2))) / n;
    if var <= 0.0 || values.iter().all(|&v| v == values[0]) {
        return Err(MaxentError::DegenerateSample("all values are equal".into()));
    }
    LognormalParams::new(mu, var.sqrt())
}

/// Fit on salaries expressed in major units.
pub fn fit_lognormal(sample: &SalarySample) -> Result<LognormalParams, MaxentError> {
    fit_lognormal_values(&sample.to_major_units())
}

/// Kolmogorov–Smirnov distance between the empirical CDF and the lognormal CDF.
pub fn ks_statistic_values(values: &[f64], p: LognormalParams) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = lognormal_cdf(x, p);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

pub fn ks_statistic(sample: &SalarySample, p: LognormalParams) -> f64 {
    ks_statistic_values(&sample.to_major_units(), p)
}
