use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{CompanyState, MarketEnsemble, SkillClass};
use crate::money::Money;

use super::{budget_repair, MarketError, PayrollDraft};

/// Starting salary of one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialSalary {
    Fixed(Money),
    /// Drawn uniformly from the template's random range, then budget-repaired.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassSpec {
    pub count: u64,
    pub salary: InitialSalary,
}

/// Class layout shared by every company of a replica ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompanyTemplate {
    pub classes: Vec<ClassSpec>,
    pub budget: Money,
    /// Inclusive range for `Random` draws.
    pub random_range: (Money, Money),
}

impl CompanyTemplate {
    pub fn headcount(&self) -> u64 {
        self.classes.iter().map(|c| c.count).sum()
    }

    /// Builds company `id`. Random draws use the stream `id` of `seed`, so a
    /// company's start does not depend on how many others are built.
    pub fn build(&self, id: u32, seed: u64) -> Result<CompanyState, MarketError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(id));
        let (lo, hi) = self.random_range;
        let classes = self
            .classes
            .iter()
            .enumerate()
            .map(|(k, spec)| {
                let salary = match spec.salary {
                    InitialSalary::Fixed(s) => s,
                    InitialSalary::Random => Money::from_minor(rng.random_range(lo.minor()..=hi.minor())),
                };
                SkillClass::new(k as u32, spec.count, salary)
            })
            .collect();
        budget_repair(PayrollDraft { company_id: id, classes, budget: self.budget })
    }

    /// `companies` replicas with ids `0..companies`.
    pub fn ensemble(&self, companies: u32, seed: u64) -> Result<MarketEnsemble, MarketError> {
        let states = (0..companies).map(|id| self.build(id, seed)).collect::<Result<Vec<_>, _>>()?;
        Ok(MarketEnsemble::new(states, seed)?)
    }
}
