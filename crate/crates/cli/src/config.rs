//! Simulation config files (TOML).

use std::path::Path;

use fairpay_core::market::{ClassSpec, CompanyTemplate, InitialSalary, StopRule};
use fairpay_core::{CompanyState, Money, NegotiationPolicy, Share, SkillClass};
use serde::Deserialize;
use thiserror::Error;

/// A config problem, located by the dotted path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

fn err(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { path: path.into(), message: message.into() }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    companies: u32,
    n_per_company: u64,
    budget: String,
    classes: Vec<RawClass>,
    alpha: String,
    epsilon: String,
    seed: Option<u64>,
    max_rounds: u64,
    quiet_rounds: u64,
    random_low: Option<String>,
    random_high: Option<String>,
    #[serde(default)]
    company: Vec<RawCompany>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClass {
    count: u64,
    salary: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompany {
    salaries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub companies: u32,
    pub n_per_company: u64,
    pub template: CompanyTemplate,
    /// Explicit starting salaries per company, one per class; overrides the template.
    pub explicit: Vec<Vec<Money>>,
    pub policy: NegotiationPolicy,
    pub seed: Option<u64>,
    pub stop: StopRule,
}

fn money(path: &str, text: &str) -> Result<Money, ConfigError> {
    text.parse::<Money>().map_err(|e| err(path, format!("{e}: {text:?}")))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<SimConfig, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let path = e
                .span()
                .map(|span| {
                    let line = text[..span.start].lines().count().max(1);
                    format!("line {line}")
                })
                .unwrap_or_else(|| "<document>".to_string());
            err(path, message)
        })?;
        SimConfig::validate(raw)
    }

    pub fn load(path: &Path) -> Result<SimConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err(path.display().to_string(), e.to_string()))?;
        SimConfig::from_toml(&text)
    }

    fn validate(raw: RawConfig) -> Result<SimConfig, ConfigError> {
        if raw.companies < 2 {
            return Err(err("companies", format!("need at least 2 companies, got {}", raw.companies)));
        }
        if raw.classes.is_empty() {
            return Err(err("classes", "at least one class is required"));
        }
        let budget = money("budget", &raw.budget)?;
        if !budget.is_positive() {
            return Err(err("budget", "must be positive"));
        }
        let mut classes = Vec::with_capacity(raw.classes.len());
        for (i, c) in raw.classes.iter().enumerate() {
            if c.count == 0 {
                return Err(err(format!("classes[{i}].count"), "must be at least 1"));
            }
            let salary = if c.salary.trim().eq_ignore_ascii_case("RANDOM") {
                InitialSalary::Random
            } else {
                let s = money(&format!("classes[{i}].salary"), &c.salary)?;
                if !s.is_positive() {
                    return Err(err(format!("classes[{i}].salary"), "must be positive"));
                }
                InitialSalary::Fixed(s)
            };
            classes.push(ClassSpec { count: c.count, salary });
        }
        let total: u64 = classes.iter().map(|c| c.count).sum();
        if total != raw.n_per_company {
            return Err(err("classes", format!("counts sum to {total}, but n_per_company is {}", raw.n_per_company)));
        }
        let g = classes.iter().fold(0, |g, c| gcd(g, c.count));
        if !(budget.minor() as u64).is_multiple_of(g) {
            return Err(err("budget", format!("must be a multiple of {g} minor units to be payable exactly")));
        }
        if (budget.minor() as u64) < total {
            return Err(err("budget", "too small to pay every employee at least one minor unit"));
        }

        let mean = budget.minor() / total as i64;
        let low = match &raw.random_low {
            Some(t) => money("random_low", t)?,
            None => Money::from_minor((mean / 2).max(1)),
        };
        let high = match &raw.random_high {
            Some(t) => money("random_high", t)?,
            None => Money::from_minor(mean.saturating_mul(2)),
        };
        if !low.is_positive() || low > high {
            return Err(err("random_low", format!("need 0 < random_low <= random_high, got {low} and {high}")));
        }

        let all_fixed: Option<Vec<Money>> = classes
            .iter()
            .map(|c| match c.salary {
                InitialSalary::Fixed(s) => Some(s),
                InitialSalary::Random => None,
            })
            .collect();
        if let Some(fixed) = &all_fixed {
            check_payroll("classes", &classes, fixed, budget)?;
        }

        let mut explicit = Vec::with_capacity(raw.company.len());
        if !raw.company.is_empty() && raw.company.len() != raw.companies as usize {
            return Err(err(
                "company",
                format!("{} entries given, expected one per company ({})", raw.company.len(), raw.companies),
            ));
        }
        for (i, c) in raw.company.iter().enumerate() {
            let path = format!("company[{i}].salaries");
            if c.salaries.len() != classes.len() {
                return Err(err(&path, format!("expected {} salaries, one per class", classes.len())));
            }
            let salaries = c
                .salaries
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let m = money(&format!("{path}[{k}]"), s)?;
                    if m.is_positive() {
                        Ok(m)
                    } else {
                        Err(err(format!("{path}[{k}]"), "must be positive"))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            check_payroll(&path, &classes, &salaries, budget)?;
            explicit.push(salaries);
        }

        let alpha: Share =
            raw.alpha.parse().map_err(|_| err("alpha", format!("not a fraction in [0, 1]: {:?}", raw.alpha)))?;
        let epsilon = money("epsilon", &raw.epsilon)?;
        let policy = NegotiationPolicy::new(alpha, epsilon).map_err(|e| err("epsilon", e.to_string()))?;
        if raw.max_rounds == 0 {
            return Err(err("max_rounds", "must be at least 1"));
        }
        if raw.quiet_rounds == 0 {
            return Err(err("quiet_rounds", "must be at least 1"));
        }

        Ok(SimConfig {
            companies: raw.companies,
            n_per_company: raw.n_per_company,
            template: CompanyTemplate { classes, budget, random_range: (low, high) },
            explicit,
            policy,
            seed: raw.seed,
            stop: StopRule { max_rounds: raw.max_rounds, quiet_rounds: raw.quiet_rounds },
        })
    }

    /// Company `id` built from explicit salaries when given, else from the template.
    pub fn explicit_company(&self, id: u32) -> Option<CompanyState> {
        let salaries = self.explicit.get(id as usize)?;
        let classes = self
            .template
            .classes
            .iter()
            .zip(salaries)
            .enumerate()
            .map(|(k, (c, &s))| SkillClass::new(k as u32, c.count, s))
            .collect();
        Some(CompanyState::new(id, classes, self.template.budget).expect("payroll checked during validation"))
    }
}

fn check_payroll(path: &str, classes: &[ClassSpec], salaries: &[Money], budget: Money) -> Result<(), ConfigError> {
    let payroll: i128 = classes.iter().zip(salaries).map(|(c, s)| c.count as i128 * s.minor() as i128).sum();
    if payroll != budget.minor() as i128 {
        let shown =
            i64::try_from(payroll).map(|p| Money::from_minor(p).to_string()).unwrap_or_else(|_| payroll.to_string());
        return Err(err(path, format!("payroll {shown} does not match budget {budget}")));
    }
    Ok(())
}
