//! Domain types shared by the metrics, multiplicity and market modules.
//!
//! Every constructor re-checks its invariants; a value that exists is valid.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::Money;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("sample is empty")]
    EmptySample,
    #[error("salary at index {index} is negative ({salary})")]
    NegativeSalary { index: usize, salary: Money },
    #[error("levels and counts differ in length ({levels} vs {counts})")]
    LengthMismatch { levels: usize, counts: usize },
    #[error("category levels must be positive and strictly increasing (at index {index})")]
    UnorderedLevels { index: usize },
    #[error("budget {budget} is not divisible into {n} equal salaries")]
    NonDivisibleBudget { budget: Money, n: u64 },
    #[error("headcount must be at least 1")]
    ZeroHeadcount,
    #[error("company {company} has no skill classes")]
    NoClasses { company: u32 },
    #[error("company {company}: class {class_id} has zero employees")]
    EmptyClass { company: u32, class_id: u32 },
    #[error("company {company}: class {class_id} salary must be positive, got {salary}")]
    NonPositiveClassSalary { company: u32, class_id: u32, salary: Money },
    #[error("company {company}: duplicate class id {class_id}")]
    DuplicateClass { company: u32, class_id: u32 },
    #[error("company {company}: value ranks must be distinct")]
    DuplicateValueRank { company: u32 },
    #[error("company {company}: payroll {payroll} does not equal budget {budget}")]
    BudgetMismatch { company: u32, payroll: Money, budget: Money },
    #[error("arithmetic overflow computing payroll for company {company}")]
    PayrollOverflow { company: u32 },
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("company {company} is not a replica of company {reference}")]
    NotReplica { company: u32, reference: u32 },
    #[error("duplicate company id {0}")]
    DuplicateCompany(u32),
    #[error("invalid share `{0}`: expected a rational in [0, 1] such as 1/2 or 0.5")]
    InvalidShare(String),
    #[error("epsilon must be at least one minor unit, got {0}")]
    InvalidEpsilon(Money),
}

/// A flat list of individual salaries (one microstate restricted to pay).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SalarySample {
    salaries: Vec<Money>,
}

impl SalarySample {
    pub fn new(salaries: Vec<Money>) -> Result<Self, ModelError> {
        if salaries.is_empty() {
            return Err(ModelError::EmptySample);
        }
        if let Some((index, &salary)) = salaries.iter().enumerate().find(|(_, s)| s.minor() < 0) {
            return Err(ModelError::NegativeSalary { index, salary });
        }
        Ok(SalarySample { salaries })
    }

    /// `count` copies of each `(count, salary)` pair, in order.
    pub fn from_groups(groups: &[(u64, Money)]) -> Result<Self, ModelError> {
        let salaries = groups.iter().flat_map(|&(count, salary)| std::iter::repeat_n(salary, count as usize)).collect();
        SalarySample::new(salaries)
    }

    pub fn salaries(&self) -> &[Money] {
        &self.salaries
    }

    pub fn len(&self) -> usize {
        self.salaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.salaries.is_empty()
    }

    pub fn total(&self) -> i128 {
        self.salaries.iter().map(|s| s.minor() as i128).sum()
    }

    /// Mean salary, rounded half-to-even to the nearest minor unit.
    pub fn mean(&self) -> Money {
        let n = self.salaries.len() as i128;
        Money::from_minor(div_round_half_even(self.total(), n) as i64)
    }

    /// Salaries in major units, for fitting and goodness-of-fit.
    pub fn to_major_units(&self) -> Vec<f64> {
        self.salaries.iter().map(|s| s.to_major_f64()).collect()
    }

    /// Multiplies every salary by a positive integer factor.
    pub fn scaled(&self, factor: i64) -> Option<SalarySample> {
        let salaries = self.salaries.iter().map(|s| s.checked_mul(factor)).collect::<Option<Vec<_>>>()?;
        SalarySample::new(salaries).ok()
    }
}

/// Rounds `num / den` (den > 0) to the nearest integer, ties to even.
pub(crate) fn div_round_half_even(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    let q = num.div_euclid(den);
    let r = num.rem_euclid(den);
    match (2 * r).cmp(&den) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q % 2 == 0 {
                q
            } else {
                q + 1
            }
        }
    }
}

/// `k` salary levels with employee counts: a macrostate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryDistribution {
    levels: Vec<Money>,
    counts: Vec<u64>,
}

impl CategoryDistribution {
    pub fn new(levels: Vec<Money>, counts: Vec<u64>) -> Result<Self, ModelError> {
        if levels.len() != counts.len() {
            return Err(ModelError::LengthMismatch { levels: levels.len(), counts: counts.len() });
        }
        for (index, level) in levels.iter().enumerate() {
            if !level.is_positive() || (index > 0 && levels[index - 1] >= *level) {
                return Err(ModelError::UnorderedLevels { index });
            }
        }
        Ok(CategoryDistribution { levels, counts })
    }

    /// Groups a sample by exact salary value.
    pub fn from_sample_levels(sample: &SalarySample) -> Result<Self, ModelError> {
        let mut tally: BTreeMap<Money, u64> = BTreeMap::new();
        for &s in sample.salaries() {
            *tally.entry(s).or_default() += 1;
        }
        let (levels, counts) = tally.into_iter().unzip();
        CategoryDistribution::new(levels, counts)
    }

    pub fn levels(&self) -> &[Money] {
        &self.levels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    /// Shares `nᵢ / N`; empty when the distribution has no employees.
    pub fn shares(&self) -> Vec<f64> {
        let n = self.total();
        if n == 0 {
            return Vec::new();
        }
        self.counts.iter().map(|&c| c as f64 / n as f64).collect()
    }

    /// Σ nᵢ Sᵢ in minor units.
    pub fn payroll(&self) -> i128 {
        self.levels.iter().zip(&self.counts).map(|(l, &c)| l.minor() as i128 * c as i128).sum()
    }
}

/// A group of employees in one company sharing a skill and a salary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillClass {
    pub class_id: u32,
    pub count: u64,
    pub salary: Money,
    /// Ordinal proxy for the value the class contributes; higher is more.
    pub value_rank: u32,
}

impl SkillClass {
    pub fn new(class_id: u32, count: u64, salary: Money) -> Self {
        SkillClass { class_id, count, salary, value_rank: class_id }
    }

    pub fn with_value_rank(mut self, value_rank: u32) -> Self {
        self.value_rank = value_rank;
        self
    }
}

/// One company: its skill classes and its fixed salary budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCompany")]
pub struct CompanyState {
    company_id: u32,
    classes: Vec<SkillClass>,
    budget: Money,
}

#[derive(Deserialize)]
struct RawCompany {
    company_id: u32,
    classes: Vec<SkillClass>,
    budget: Money,
}

impl TryFrom<RawCompany> for CompanyState {
    type Error = ModelError;
    fn try_from(raw: RawCompany) -> Result<Self, ModelError> {
        CompanyState::new(raw.company_id, raw.classes, raw.budget)
    }
}

impl CompanyState {
    /// Classes are kept sorted by `class_id`.
    pub fn new(company_id: u32, mut classes: Vec<SkillClass>, budget: Money) -> Result<Self, ModelError> {
        let company = company_id;
        if classes.is_empty() {
            return Err(ModelError::NoClasses { company });
        }
        classes.sort_by_key(|c| c.class_id);
        for pair in classes.windows(2) {
            if pair[0].class_id == pair[1].class_id {
                return Err(ModelError::DuplicateClass { company, class_id: pair[0].class_id });
            }
        }
        let mut ranks: Vec<u32> = classes.iter().map(|c| c.value_rank).collect();
        ranks.sort_unstable();
        ranks.dedup();
        if ranks.len() != classes.len() {
            return Err(ModelError::DuplicateValueRank { company });
        }
        for c in &classes {
            if c.count == 0 {
                return Err(ModelError::EmptyClass { company, class_id: c.class_id });
            }
            if !c.salary.is_positive() {
                return Err(ModelError::NonPositiveClassSalary { company, class_id: c.class_id, salary: c.salary });
            }
        }
        let payroll = payroll_of(&classes).ok_or(ModelError::PayrollOverflow { company })?;
        if payroll != budget.minor() as i128 {
            let payroll = i64::try_from(payroll).map(Money::from_minor).unwrap_or(Money::from_minor(i64::MAX));
            return Err(ModelError::BudgetMismatch { company, payroll, budget });
        }
        Ok(CompanyState { company_id, classes, budget })
    }

    pub fn company_id(&self) -> u32 {
        self.company_id
    }

    pub fn classes(&self) -> &[SkillClass] {
        &self.classes
    }

    pub fn budget(&self) -> Money {
        self.budget
    }

    pub fn headcount(&self) -> u64 {
        self.classes.iter().map(|c| c.count).sum()
    }

    pub fn salary_of(&self, class_id: u32) -> Option<Money> {
        self.classes.iter().find(|c| c.class_id == class_id).map(|c| c.salary)
    }

    pub fn with_id(mut self, company_id: u32) -> Self {
        self.company_id = company_id;
        self
    }

    /// Same headcount, budget and per-class counts.
    pub fn is_replica_of(&self, other: &CompanyState) -> bool {
        self.budget == other.budget
            && self.classes.len() == other.classes.len()
            && self.classes.iter().zip(&other.classes).all(|(a, b)| a.class_id == b.class_id && a.count == b.count)
    }

    /// Individual salaries, class by class.
    pub fn to_sample(&self) -> SalarySample {
        let groups: Vec<(u64, Money)> = self.classes.iter().map(|c| (c.count, c.salary)).collect();
        SalarySample::from_groups(&groups).expect("a company has at least one employee")
    }

    /// The company's macrostate: employees per distinct salary level.
    pub fn macrostate(&self) -> CategoryDistribution {
        let mut tally: BTreeMap<Money, u64> = BTreeMap::new();
        for c in &self.classes {
            *tally.entry(c.salary).or_default() += c.count;
        }
        let (levels, counts) = tally.into_iter().unzip();
        CategoryDistribution::new(levels, counts).expect("class salaries are positive")
    }
}

pub(crate) fn payroll_of(classes: &[SkillClass]) -> Option<i128> {
    classes.iter().try_fold(0i128, |acc, c| {
        (c.salary.minor() as i128).checked_mul(c.count as i128).and_then(|p| acc.checked_add(p))
    })
}

/// The initial state in which all `n` employees earn the same salary.
pub fn delta_initial_state(n: u64, budget: Money) -> Result<CompanyState, ModelError> {
    if n == 0 {
        return Err(ModelError::ZeroHeadcount);
    }
    let parts = i64::try_from(n).map_err(|_| ModelError::NonDivisibleBudget { budget, n })?;
    let (salary, rem) = budget.div_rem(parts);
    if rem != 0 || !salary.is_positive() {
        return Err(ModelError::NonDivisibleBudget { budget, n });
    }
    CompanyState::new(0, vec![SkillClass::new(0, n, salary)], budget)
}

/// A set of replica companies plus the round counter and seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarketEnsemble {
    companies: Vec<CompanyState>,
    round: u64,
    seed: u64,
}

impl MarketEnsemble {
    pub fn new(companies: Vec<CompanyState>, seed: u64) -> Result<Self, ModelError> {
        let reference = companies.first().ok_or(ModelError::EmptyEnsemble)?;
        let mut ids: Vec<u32> = Vec::with_capacity(companies.len());
        for c in &companies {
            if !c.is_replica_of(reference) {
                return Err(ModelError::NotReplica { company: c.company_id(), reference: reference.company_id() });
            }
            if ids.contains(&c.company_id()) {
                return Err(ModelError::DuplicateCompany(c.company_id()));
            }
            ids.push(c.company_id());
        }
        Ok(MarketEnsemble { companies, round: 0, seed })
    }

    pub fn companies(&self) -> &[CompanyState] {
        &self.companies
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn advance(self, companies: Vec<CompanyState>) -> MarketEnsemble {
        MarketEnsemble { companies, round: self.round + 1, seed: self.seed }
    }
}

/// An exact rational in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Share {
    numer: u64,
    denom: u64,
}

impl Share {
    pub const HALF: Share = Share { numer: 1, denom: 2 };

    pub fn new(numer: u64, denom: u64) -> Result<Self, ModelError> {
        if denom == 0 || numer > denom {
            return Err(ModelError::InvalidShare(format!("{numer}/{denom}")));
        }
        let g = gcd(numer, denom);
        Ok(Share { numer: numer / g, denom: denom / g })
    }

    pub fn numer(self) -> u64 {
        self.numer
    }

    pub fn denom(self) -> u64 {
        self.denom
    }

    pub fn to_f64(self) -> f64 {
        self.numer as f64 / self.denom as f64
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

impl FromStr for Share {
    type Err = ModelError;

    /// Accepts `p/q` or a dot-decimal such as `0.3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ModelError::InvalidShare(s.to_string());
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            return Share::new(p, q).map_err(|_| bad());
        }
        let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
        if whole.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if frac.len() > 18 || !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let denom = 10u64.pow(frac.len() as u32);
        let whole: u64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let numer = whole.checked_mul(denom).and_then(|w| w.checked_add(frac)).ok_or_else(bad)?;
        Share::new(numer, denom).map_err(|_| bad())
    }
}

impl Serialize for Share {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// How two companies settle a salary gap for one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NegotiationPolicy {
    /// Fraction of the gap conceded from the lower salary toward the higher.
    alpha: Share,
    /// Gaps of at most this much motivate no action.
    epsilon: Money,
}

impl NegotiationPolicy {
    pub fn new(alpha: Share, epsilon: Money) -> Result<Self, ModelError> {
        if epsilon.minor() < 1 {
            return Err(ModelError::InvalidEpsilon(epsilon));
        }
        Ok(NegotiationPolicy { alpha, epsilon })
    }

    pub fn alpha(&self) -> Share {
        self.alpha
    }

    pub fn epsilon(&self) -> Money {
        self.epsilon
    }
}

impl Default for NegotiationPolicy {
    /// 50:50 split, one dollar threshold.
    fn default() -> Self {
        NegotiationPolicy { alpha: Share::HALF, epsilon: Money::from_major(1) }
    }
}
