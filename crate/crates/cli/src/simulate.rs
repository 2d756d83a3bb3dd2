//! `simulate`: run a configured market and render its outputs.

use std::fmt::Write as _;

use fairpay_core::market::{max_class_gap, run_to_equilibrium, ConvergenceStatus, Trajectory};
use fairpay_core::{CompanyState, MarketEnsemble, Money};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, SimConfig};
use crate::CliError;

/// Final-state file; its `companies` can seed a later run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalStateDocument {
    pub status: String,
    pub rounds: u64,
    pub last_trade_round: u64,
    pub total_trades: usize,
    pub seed: u64,
    pub alpha: String,
    pub epsilon: Money,
    pub max_class_gap: Money,
    pub mean_entropy_nats: f64,
    pub mean_log_w_nats: f64,
    pub mean_share_entropy_nats: f64,
    pub companies: Vec<CompanyState>,
}

pub fn status_label(status: ConvergenceStatus) -> &'static str {
    match status {
        ConvergenceStatus::Converged => "CONVERGED",
        ConvergenceStatus::RoundLimit => "ROUND_LIMIT",
    }
}

/// Starting ensemble: `initial` companies if given, else built from the config.
pub fn initial_ensemble(
    config: &SimConfig,
    seed: u64,
    initial: Option<Vec<CompanyState>>,
) -> Result<MarketEnsemble, CliError> {
    let companies = match initial {
        Some(companies) => {
            for c in &companies {
                let matches = c.headcount() == config.n_per_company
                    && c.budget() == config.template.budget
                    && c.classes().len() == config.template.classes.len()
                    && c.classes().iter().zip(&config.template.classes).all(|(a, b)| a.count == b.count);
                if !matches {
                    return Err(ConfigError {
                        path: "initial".to_string(),
                        message: format!("company {} does not match the configured classes and budget", c.company_id()),
                    }
                    .into());
                }
            }
            companies
        }
        None => (0..config.companies)
            .map(|id| match config.explicit_company(id) {
                Some(c) => Ok(c),
                None => config.template.build(id, seed),
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(MarketEnsemble::new(companies, seed)?)
}

pub fn run(config: &SimConfig, seed: u64, initial: Option<Vec<CompanyState>>) -> Result<Trajectory, CliError> {
    let ensemble = initial_ensemble(config, seed, initial)?;
    Ok(run_to_equilibrium(ensemble, &config.policy, config.stop)?)
}

pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut out = String::from("round,trades,mean_entropy_nats,mean_log_w_nats,mean_share_entropy_nats\n");
    for r in &t.records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.round, r.trades, r.mean_entropy_nats, r.mean_log_w_nats, r.mean_share_entropy_nats
        )
        .expect("writing to a String");
    }
    out
}

pub fn final_state(config: &SimConfig, t: &Trajectory) -> FinalStateDocument {
    let last = t.records.last().expect("trajectory has the initial record");
    FinalStateDocument {
        status: status_label(t.status).to_string(),
        rounds: t.rounds_run(),
        last_trade_round: t.last_trade_round,
        total_trades: t.total_trades(),
        seed: t.final_state.seed(),
        alpha: config.policy.alpha().to_string(),
        epsilon: config.policy.epsilon(),
        max_class_gap: max_class_gap(&t.final_state),
        mean_entropy_nats: last.mean_entropy_nats,
        mean_log_w_nats: last.mean_log_w_nats,
        mean_share_entropy_nats: last.mean_share_entropy_nats,
        companies: t.final_state.companies().to_vec(),
    }
}
