use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::fairness::{grouped_share_entropy, shannon_entropy};
use crate::model::{CategoryDistribution, CompanyState, MarketEnsemble, NegotiationPolicy};
use crate::money::Money;
use crate::statmech::{log_multiplicity, MultiplicityMethod};

use super::{budget_repair, negotiate_salary, MarketError, PayrollDraft};

/// One settled negotiation for one class between two companies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TradeEvent {
    pub round: u64,
    pub company_a: u32,
    pub company_b: u32,
    pub class_id: u32,
    pub salary_a_before: Money,
    pub salary_b_before: Money,
    pub settled: Money,
}

/// Lets two replica companies negotiate every class once.
///
/// Both companies adopt the settled salary for each class whose gap exceeds
/// epsilon, then each is repaired back onto its budget. Identical inputs
/// come back unchanged with no events.
pub fn interact_pair(
    a: &CompanyState,
    b: &CompanyState,
    policy: &NegotiationPolicy,
    round: u64,
) -> Result<(CompanyState, CompanyState, Vec<TradeEvent>), MarketError> {
    if !a.is_replica_of(b) {
        return Err(MarketError::NotReplicas { a: a.company_id(), b: b.company_id() });
    }
    let mut draft_a = PayrollDraft::from(a.clone());
    let mut draft_b = PayrollDraft::from(b.clone());
    let mut events = Vec::new();
    for (ca, cb) in draft_a.classes.iter_mut().zip(draft_b.classes.iter_mut()) {
        if let Some(settled) = negotiate_salary(ca.salary, cb.salary, policy) {
            events.push(TradeEvent {
                round,
                company_a: a.company_id(),
                company_b: b.company_id(),
                class_id: ca.class_id,
                salary_a_before: ca.salary,
                salary_b_before: cb.salary,
                settled,
            });
            ca.salary = settled;
            cb.salary = settled;
        }
    }
    if events.is_empty() {
        return Ok((a.clone(), b.clone(), events));
    }
    Ok((budget_repair(draft_a)?, budget_repair(draft_b)?, events))
}

fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

/// One simultaneous round: random disjoint pairs, each pair interacts.
///
/// The pairing depends only on `(seed, round)`; with an odd number of
/// companies the one left over sits out.
pub fn run_round(
    ensemble: MarketEnsemble,
    policy: &NegotiationPolicy,
) -> Result<(MarketEnsemble, Vec<TradeEvent>), MarketError> {
    let n = ensemble.companies().len();
    if n < 2 {
        return Err(MarketError::TooFewCompanies(n));
    }
    let round = ensemble.round() + 1;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut round_rng(ensemble.seed(), round));

    let companies = ensemble.companies();
    let outcomes = order
        .par_chunks_exact(2)
        .map(|pair| {
            let (i, j) = (pair[0], pair[1]);
            interact_pair(&companies[i], &companies[j], policy, round).map(|out| (i, j, out))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut next = companies.to_vec();
    let mut events = Vec::new();
    for (i, j, (a, b, ev)) in outcomes {
        next[i] = a;
        next[j] = b;
        events.extend(ev);
    }
    Ok((ensemble.advance(next), events))
}

/// Largest salary gap within any class across the whole ensemble.
pub fn max_class_gap(ensemble: &MarketEnsemble) -> Money {
    let companies = ensemble.companies();
    let Some(first) = companies.first() else {
        return Money::ZERO;
    };
    (0..first.classes().len())
        .map(|k| {
            let salaries = companies.iter().map(|c| c.classes()[k].salary);
            let lo = salaries.clone().min().unwrap_or(Money::ZERO);
            let hi = salaries.max().unwrap_or(Money::ZERO);
            hi - lo
        })
        .max()
        .unwrap_or(Money::ZERO)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub max_rounds: u64,
    pub quiet_rounds: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { max_rounds: 10_000, quiet_rounds: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConvergenceStatus {
    Converged,
    RoundLimit,
}

/// Ensemble statistics after one round (round 0 is the initial state).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    pub trades: usize,
    /// Mean macrostate entropy `−Σ pᵢ ln pᵢ` over salary categories.
    pub mean_entropy_nats: f64,
    /// Mean exact `ln W` of the per-company macrostates.
    pub mean_log_w_nats: f64,
    /// Mean entropy of individual income shares.
    pub mean_share_entropy_nats: f64,
    pub snapshots: Vec<CategoryDistribution>,
}

impl RoundRecord {
    fn observe(ensemble: &MarketEnsemble, trades: usize) -> RoundRecord {
        let companies = ensemble.companies();
        let k = companies.len() as f64;
        let snapshots: Vec<CategoryDistribution> = companies.iter().map(CompanyState::macrostate).collect();
        let mut entropy = 0.0;
        let mut log_w = 0.0;
        let mut share = 0.0;
        for (company, dist) in companies.iter().zip(&snapshots) {
            entropy += shannon_entropy(dist).expect("companies are non-empty");
            log_w +=
                log_multiplicity(dist, MultiplicityMethod::ExactLogGamma).expect("companies are non-empty").log_w_nats;
            let groups: Vec<(u64, Money)> = company.classes().iter().map(|c| (c.count, c.salary)).collect();
            share += grouped_share_entropy(&groups).expect("class salaries are positive");
        }
        RoundRecord {
            round: ensemble.round(),
            trades,
            mean_entropy_nats: entropy / k,
            mean_log_w_nats: log_w / k,
            mean_share_entropy_nats: share / k,
            snapshots,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub records: Vec<RoundRecord>,
    pub status: ConvergenceStatus,
    /// Last round in which any trade happened (0 if none ever did).
    pub last_trade_round: u64,
    pub final_state: MarketEnsemble,
}

impl Trajectory {
    pub fn rounds_run(&self) -> u64 {
        self.final_state.round()
    }

    pub fn total_trades(&self) -> usize {
        self.records.iter().map(|r| r.trades).sum()
    }
}

/// Runs rounds until the market is quiet or the round limit is hit.
///
/// Converged means `quiet_rounds` consecutive rounds without trades and no
/// class gap above epsilon anywhere in the ensemble, so no pairing could
/// trigger another trade.
pub fn run_to_equilibrium(
    ensemble: MarketEnsemble,
    policy: &NegotiationPolicy,
    stop: StopRule,
) -> Result<Trajectory, MarketError> {
    let n = ensemble.companies().len();
    if n < 2 {
        return Err(MarketError::TooFewCompanies(n));
    }
    let mut records = vec![RoundRecord::observe(&ensemble, 0)];
    let mut state = ensemble;
    let mut quiet = 0u64;
    let mut last_trade_round = 0u64;
    let mut status = ConvergenceStatus::RoundLimit;

    for _ in 0..stop.max_rounds.max(1) {
        let (next, events) = run_round(state, policy)?;
        state = next;
        if events.is_empty() {
            quiet += 1;
        } else {
            quiet = 0;
            last_trade_round = state.round();
        }
        records.push(RoundRecord::observe(&state, events.len()));
        if quiet >= stop.quiet_rounds && max_class_gap(&state) <= policy.epsilon() {
            status = ConvergenceStatus::Converged;
            break;
        }
    }
    Ok(Trajectory { records, status, last_trade_round, final_state: state })
}
