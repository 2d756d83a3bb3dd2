//! `solve`: maximum-entropy distribution on a salary grid.

use std::fmt::Write as _;

use fairpay_core::maxent::{solve_maxent, ConstraintKind};
use fairpay_core::{ConstraintSet, MaxentSolution, SalaryGrid};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSummary {
    pub min: f64,
    pub max: f64,
    pub levels: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplierEntry {
    pub kind: &'static str,
    pub target: f64,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveDocument {
    pub grid: GridSummary,
    pub constraints: Vec<MultiplierEntry>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub entropy_nats: f64,
}

pub fn kind_label(kind: ConstraintKind) -> &'static str {
    match kind {
        ConstraintKind::MeanS => "MEAN_S",
        ConstraintKind::MeanLnS => "MEAN_LN_S",
        ConstraintKind::MeanLnSSq => "MEAN_LN_S_SQ",
    }
}

pub fn solve(
    grid: &SalaryGrid,
    constraints: &ConstraintSet,
    tol: f64,
    max_iter: usize,
) -> Result<(MaxentSolution, SolveDocument), CliError> {
    let sol = solve_maxent(grid, constraints, tol, max_iter)?;
    let levels = grid.levels();
    let doc = SolveDocument {
        grid: GridSummary {
            min: levels[0],
            max: levels[levels.len() - 1],
            levels: levels.len(),
            spacing: grid.spacing(),
        },
        constraints: constraints
            .constraints()
            .iter()
            .zip(&sol.multipliers)
            .map(|(c, &multiplier)| MultiplierEntry { kind: kind_label(c.kind), target: c.target, multiplier })
            .collect(),
        residual_norm: sol.residual_norm,
        iterations: sol.iterations,
        entropy_nats: sol.entropy(),
    };
    Ok((sol, doc))
}

pub fn solution_csv(grid: &SalaryGrid, sol: &MaxentSolution) -> String {
    let mut out = String::from("level,probability\n");
    for (s, p) in grid.levels().iter().zip(&sol.probabilities) {
        writeln!(out, "{s},{p}").expect("writing to a String");
    }
    out
}
