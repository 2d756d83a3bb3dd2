//! Projection of a company's class salaries back onto its exact budget.
//!
//! Salaries are first scaled by `budget / payroll` in exact rational
//! arithmetic. Rounding to whole minor units is then chosen so that
//! `Σ count · salary = budget` holds exactly: among integer corrections to
//! the floored targets, the one with the least count-weighted squared
//! deviation from the exact targets wins. With unit counts and 0/1
//! corrections this is the largest-remainder rule. Larger or negative
//! corrections are only used when the class counts make the 0/1 choice
//! infeasible (e.g. counts 500/300/200 and a 100-cent shortfall).
//! Salary order across classes is kept non-decreasing.

use std::collections::BTreeMap;

use crate::model::{payroll_of, CompanyState, SkillClass};
use crate::money::Money;

use super::MarketError;

/// A company whose payroll may be off budget (e.g. right after a trade).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayrollDraft {
    pub company_id: u32,
    pub classes: Vec<SkillClass>,
    pub budget: Money,
}

impl From<CompanyState> for PayrollDraft {
    fn from(c: CompanyState) -> Self {
        PayrollDraft { company_id: c.company_id(), classes: c.classes().to_vec(), budget: c.budget() }
    }
}

/// Upper bound on DP states explored before giving up.
const STATE_LIMIT: usize = 4_000_000;

/// Rescales and rounds a draft so its payroll equals its budget exactly.
pub fn budget_repair(draft: PayrollDraft) -> Result<CompanyState, MarketError> {
    let company = draft.company_id;
    let payroll = payroll_of(&draft.classes).ok_or(MarketError::RepairOverflow { company })?;
    if payroll <= 0 || draft.classes.iter().any(|c| !c.salary.is_positive()) {
        return Err(MarketError::DegenerateState { company });
    }
    let budget = draft.budget.minor() as i128;
    if payroll == budget {
        return Ok(CompanyState::new(company, draft.classes, draft.budget)?);
    }

    // Classes in ascending salary order; outputs must stay non-decreasing along it.
    let mut order: Vec<usize> = (0..draft.classes.len()).collect();
    order.sort_by_key(|&i| (draft.classes[i].salary, draft.classes[i].class_id));

    let mut floors = Vec::with_capacity(order.len());
    let mut rems = Vec::with_capacity(order.len());
    let mut counts = Vec::with_capacity(order.len());
    for &i in &order {
        let c = &draft.classes[i];
        let num = (c.salary.minor() as i128).checked_mul(budget).ok_or(MarketError::RepairOverflow { company })?;
        floors.push(num.div_euclid(payroll));
        rems.push(num.rem_euclid(payroll));
        counts.push(c.count as i128);
    }
    let floored: i128 = floors.iter().zip(&counts).map(|(f, n)| f * n).sum();
    let deficit = budget - floored;
    let lattice = counts.iter().fold(0u64, |g, &n| crate::model::gcd(g, n as u64)) as i128;
    if deficit % lattice != 0 {
        return Err(MarketError::BudgetUnreachable { company });
    }

    let mut radius = 1i64;
    let corrections = loop {
        match search_corrections(company, &floors, &rems, &counts, payroll, deficit, radius)? {
            Search::Found(k) => break k,
            Search::Infeasible => {}
            Search::TooLarge => return Err(MarketError::BudgetUnreachable { company }),
        }
        radius = radius.checked_mul(2).ok_or(MarketError::BudgetUnreachable { company })?;
    };

    let mut classes = draft.classes;
    for (slot, &i) in order.iter().enumerate() {
        let salary = floors[slot] + corrections[slot] as i128;
        classes[i].salary =
            Money::from_minor(i64::try_from(salary).map_err(|_| MarketError::RepairOverflow { company })?);
    }
    Ok(CompanyState::new(company, classes, draft.budget)?)
}

enum Search {
    Found(Vec<i64>),
    Infeasible,
    TooLarge,
}

#[derive(Clone, Copy)]
struct Node {
    cost: i128,
    parent: (i128, i64),
}

/// Minimises `Σ nᵢ (kᵢ·P − remᵢ)²` subject to `Σ nᵢ kᵢ = deficit`,
/// `|kᵢ| ≤ radius`, `floorᵢ + kᵢ ≥ 1` and non-decreasing outputs.
fn search_corrections(
    company: u32,
    floors: &[i128],
    rems: &[i128],
    counts: &[i128],
    payroll: i128,
    deficit: i128,
    radius: i64,
) -> Result<Search, MarketError> {
    let overflow = || MarketError::RepairOverflow { company };
    let k = floors.len();
    // Headcount still to be assigned after slot i.
    let mut rest = vec![0i128; k + 1];
    for i in (0..k).rev() {
        rest[i] = rest[i + 1] + counts[i];
    }
    let r = radius as i128;

    // Key: (partial Σ nᵢkᵢ, previous output salary offset kᵢ₋₁).
    let mut layers: Vec<BTreeMap<(i128, i64), Node>> = Vec::with_capacity(k);
    let mut frontier: BTreeMap<(i128, i64), Node> = BTreeMap::new();
    frontier.insert((0, 0), Node { cost: 0, parent: (0, 0) });
    let mut explored = 0usize;

    for i in 0..k {
        let mut next: BTreeMap<(i128, i64), Node> = BTreeMap::new();
        for (&(sum, prev_k), node) in &frontier {
            for step in -radius..=radius {
                let out = floors[i] + step as i128;
                if out < 1 {
                    continue;
                }
                if i > 0 && out < floors[i - 1] + prev_k as i128 {
                    continue;
                }
                let new_sum = sum + counts[i] * step as i128;
                if (deficit - new_sum).abs() > r * rest[i + 1] {
                    continue;
                }
                let dev = (step as i128).checked_mul(payroll).ok_or_else(overflow)? - rems[i];
                let term = dev.checked_mul(dev).and_then(|d| d.checked_mul(counts[i])).ok_or_else(overflow)?;
                let cost = node.cost.checked_add(term).ok_or_else(overflow)?;
                let key = (new_sum, step);
                let candidate = Node { cost, parent: (sum, prev_k) };
                match next.get(&key) {
                    Some(existing) if existing.cost <= cost => {}
                    _ => {
                        next.insert(key, candidate);
                    }
                }
            }
        }
        explored += next.len();
        if explored > STATE_LIMIT {
            return Ok(Search::TooLarge);
        }
        if next.is_empty() {
            return Ok(Search::Infeasible);
        }
        layers.push(std::mem::replace(&mut frontier, next));
    }

    let best = frontier.iter().filter(|((sum, _), _)| *sum == deficit).min_by_key(|(key, node)| (node.cost, **key));
    let Some((&(mut sum, mut step), _)) = best else {
        return Ok(Search::Infeasible);
    };
    layers.push(frontier);

    let mut corrections = vec![0i64; k];
    for i in (0..k).rev() {
        corrections[i] = step;
        let node = layers[i + 1][&(sum, step)];
        (sum, step) = node.parent;
    }
    Ok(Search::Found(corrections))
}
