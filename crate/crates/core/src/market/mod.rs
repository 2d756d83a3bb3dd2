//! Replica-company exchange dynamics under exact headcount and budget
//! conservation.

mod init;
mod negotiate;
mod repair;
mod sim;

use thiserror::Error;

use crate::model::ModelError;

pub use init::{ClassSpec, CompanyTemplate, InitialSalary};
pub use negotiate::negotiate_salary;
pub use repair::{budget_repair, PayrollDraft};
pub use sim::{
    interact_pair, max_class_gap, run_round, run_to_equilibrium, ConvergenceStatus, RoundRecord, StopRule, TradeEvent,
    Trajectory,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("a round needs at least two companies, got {0}")]
    TooFewCompanies(usize),
    #[error("companies {a} and {b} are not replicas")]
    NotReplicas { a: u32, b: u32 },
    #[error("company {company} has a non-positive salary or zero payroll")]
    DegenerateState { company: u32 },
    #[error("company {company}: no integer salary assignment meets the budget within search limits")]
    BudgetUnreachable { company: u32 },
    #[error("arithmetic overflow while repairing company {company}")]
    RepairOverflow { company: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
}
