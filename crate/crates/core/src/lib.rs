//! Replica-company labor market simulator and fairness analytics.
//!
//! - [`model`]: money, salary samples, macrostates, companies and ensembles
//! - [`fairness`]: share entropy, Theil (with group decomposition), Gini, maximin
//! - [`statmech`]: multiplicities `ln W`, Stirling accounting, binning into macrostates
//! - [`market`]: pairwise salary negotiation with exact budget conservation
//! - [`maxent`]: discrete maximum-entropy solver and lognormal analytics
//!
//! Money is always integer minor units; conservation checks are exact.

pub mod fairness;
pub mod market;
pub mod maxent;
pub mod model;
pub mod money;
pub mod numeric;
pub mod statmech;

pub use fairness::{FairnessReport, MetricError};
pub use maxent::{ConstraintKind, ConstraintSet, LognormalParams, MaxentSolution, SalaryGrid};
pub use model::{
    delta_initial_state, CategoryDistribution, CompanyState, MarketEnsemble, ModelError, NegotiationPolicy,
    SalarySample, Share, SkillClass,
};
pub use money::Money;
