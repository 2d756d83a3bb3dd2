use nalgebra::{DMatrix, DVector};

use super::{ConstraintKind, ConstraintSet, MaxentError, MaxentSolution, SalaryGrid};
use crate::numeric::{compensated_sum, xlogx};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Entropy `−Σ pᵢ ln pᵢ` of a probability vector, in nats.
pub fn discrete_entropy(p: &[f64]) -> f64 {
    0.0 - compensated_sum(p.iter().map(|&x| xlogx(x)))
}

/// Features standardised over the grid so that Newton steps are well scaled.
struct Features {
    /// Row-major, `k × m`.
    values: Vec<f64>,
    targets: Vec<f64>,
    scale: Vec<f64>,
    m: usize,
}

impl Features {
    fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }
}

/// Log-partition, probabilities and feature moments at multipliers `theta`.
struct DualPoint {
    objective: f64,
    /// Size of the terms summed into `objective`; bounds its rounding error.
    magnitude: f64,
    probabilities: Vec<f64>,
    mean: Vec<f64>,
}

fn evaluate(features: &Features, theta: &[f64]) -> DualPoint {
    let k = features.values.len() / features.m.max(1);
    let exponents: Vec<f64> =
        (0..k).map(|i| -features.row(i).iter().zip(theta).map(|(f, t)| f * t).sum::<f64>()).collect();
    let peak = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exponents.iter().map(|e| (e - peak).exp()).collect();
    let z = compensated_sum(weights.iter().copied());
    let probabilities: Vec<f64> = weights.iter().map(|w| w / z).collect();
    let mean: Vec<f64> = (0..features.m)
        .map(|j| compensated_sum(probabilities.iter().enumerate().map(|(i, p)| p * features.row(i)[j])))
        .collect();
    let log_z = peak + z.ln();
    let linear: f64 = theta.iter().zip(&features.targets).map(|(t, c)| t * c).sum();
    let magnitude =
        peak.abs() + z.ln().abs() + theta.iter().zip(&features.targets).map(|(t, c)| (t * c).abs()).sum::<f64>();
    DualPoint { objective: log_z + linear, magnitude, probabilities, mean }
}

fn check_feasible(grid: &SalaryGrid, constraints: &ConstraintSet) -> Result<(), MaxentError> {
    let levels = grid.levels();
    for c in constraints.constraints() {
        let values: Vec<f64> = levels.iter().map(|&s| c.kind.feature(s)).collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(c.target > lo && c.target < hi) {
            return Err(MaxentError::InfeasibleConstraints(format!(
                "{:?} target {} must lie strictly inside ({lo}, {hi})",
                c.kind, c.target
            )));
        }
    }
    let target = |kind| constraints.constraints().iter().find(|c| c.kind == kind).map(|c| c.target);
    if let (Some(m1), Some(m2)) = (target(ConstraintKind::MeanLnS), target(ConstraintKind::MeanLnSSq)) {
        if m2 - m1 * m1 <= 0.0 {
            return Err(MaxentError::InfeasibleConstraints(format!(
                "E[(ln S)^2] = {m2} leaves no variance around E[ln S] = {m1}"
            )));
        }
    }
    Ok(())
}

/// Maximum-entropy distribution on `grid` matching `constraints`.
///
/// Newton's method on the convex dual `ln Z(λ) + λ·c` with Armijo
/// backtracking, starting from `λ = 0`. Converged once every constraint
/// residual, relative to `max(1, |target|)`, is at most `tol`.
pub fn solve_maxent(
    grid: &SalaryGrid,
    constraints: &ConstraintSet,
    tol: f64,
    max_iter: usize,
) -> Result<MaxentSolution, MaxentError> {
    check_feasible(grid, constraints)?;
    let k = grid.len();
    let m = constraints.len();
    if m == 0 {
        return Ok(MaxentSolution {
            probabilities: vec![1.0 / k as f64; k],
            multipliers: Vec::new(),
            residual_norm: 0.0,
            iterations: 0,
            dual_trace: Vec::new(),
        });
    }

    let mut offset = Vec::with_capacity(m);
    let mut scale = Vec::with_capacity(m);
    let mut raw = vec![0.0; k * m];
    for (j, c) in constraints.constraints().iter().enumerate() {
        let col: Vec<f64> = grid.levels().iter().map(|&s| c.kind.feature(s)).collect();
        let mean = compensated_sum(col.iter().copied()) / k as f64;
        let var = compensated_sum(col.iter().map(|v| (v - mean).powi(2))) / k as f64;
        let sd = var.sqrt().max(f64::MIN_POSITIVE);
        for (i, v) in col.iter().enumerate() {
            raw[i * m + j] = (v - mean) / sd;
        }
        offset.push(mean);
        scale.push(sd);
    }
    let targets: Vec<f64> =
        constraints.constraints().iter().zip(offset.iter().zip(&scale)).map(|(c, (o, s))| (c.target - o) / s).collect();
    let features = Features { values: raw, targets, scale, m };

    let residual_of = |point: &DualPoint| -> f64 {
        constraints
            .constraints()
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let achieved = point.mean[j] * features.scale[j] + offset[j];
                (achieved - c.target).abs() / c.target.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    };

    let mut theta = vec![0.0; m];
    let mut point = evaluate(&features, &theta);
    let mut residual = residual_of(&point);
    let mut iterations = 0;
    let mut dual_trace = vec![point.objective];

    while residual > tol {
        if iterations >= max_iter {
            return Err(MaxentError::NoConvergence { residual, iterations });
        }
        iterations += 1;

        let gradient = DVector::from_iterator(m, (0..m).map(|j| features.targets[j] - point.mean[j]));
        let mut hessian = DMatrix::<f64>::zeros(m, m);
        for (i, p) in point.probabilities.iter().enumerate() {
            let row = features.row(i);
            for a in 0..m {
                let da = row[a] - point.mean[a];
                for b in a..m {
                    hessian[(a, b)] += p * da * (row[b] - point.mean[b]);
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                hessian[(a, b)] = hessian[(b, a)];
            }
        }

        let step = newton_direction(&hessian, &gradient);
        let slope = gradient.dot(&step);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(th, d)| th + t * d).collect();
            let candidate = evaluate(&features, &trial);
            let sufficient = candidate.objective <= point.objective + ARMIJO * t * slope;
            // Near the optimum the objective change drops below rounding; accept a
            // step that stays within rounding and still shrinks the residual.
            let rounding = 16.0 * f64::EPSILON * point.magnitude.max(candidate.magnitude).max(1.0);
            let flat = candidate.objective <= point.objective + rounding && residual_of(&candidate) < residual;
            if sufficient || flat {
                accepted = Some((trial, candidate));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, candidate)) = accepted else {
            return Err(MaxentError::NoConvergence { residual, iterations });
        };
        theta = trial;
        point = candidate;
        residual = residual_of(&point);
        dual_trace.push(point.objective);
    }

    let multipliers = theta.iter().zip(&features.scale).map(|(t, s)| t / s).collect();
    Ok(MaxentSolution {
        probabilities: point.probabilities,
        multipliers,
        residual_norm: residual,
        iterations,
        dual_trace,
    })
}

/// Solves `H d = −g`, regularising `H` if it is numerically singular.
fn newton_direction(hessian: &DMatrix<f64>, gradient: &DVector<f64>) -> DVector<f64> {
    let rhs = -gradient;
    if let Some(chol) = hessian.clone().cholesky() {
        return chol.solve(&rhs);
    }
    let mut ridge = 1e-12 * hessian.diagonal().amax().max(1e-300);
    loop {
        let damped = hessian + DMatrix::identity(hessian.nrows(), hessian.ncols()) * ridge;
        if let Some(chol) = damped.cholesky() {
            return chol.solve(&rhs);
        }
        ridge *= 10.0;
    }
}
