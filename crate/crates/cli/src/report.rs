//! JSON documents for `analyze` and `fit`.

use std::collections::BTreeMap;

use fairpay_core::fairness::{fairness_report, shannon_entropy_counts, theil_decomposition, FairnessReport};
use fairpay_core::maxent::{fit_lognormal, ks_statistic};
use fairpay_core::statmech::{log_multiplicity_counts, MultiplicityMethod};
use fairpay_core::SalarySample;
use serde::Serialize;

use crate::ingest::SalaryTable;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub file: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub category: String,
    pub count: usize,
    pub income_share: f64,
    pub theil_within: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategorySummary {
    /// Entropy of the headcount split across categories.
    pub entropy_nats: f64,
    pub log_multiplicity_nats: f64,
    pub log10_multiplicity: f64,
    pub theil_between: f64,
    pub groups: Vec<GroupSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitDocument {
    pub mu: f64,
    pub sigma: f64,
    pub ks: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub input: Provenance,
    #[serde(flatten)]
    pub metrics: FairnessReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub categories: Option<CategorySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lognormal: Option<FitDocument>,
}

pub fn fit_document(sample: &SalarySample) -> Result<FitDocument, CliError> {
    let params = fit_lognormal(sample)?;
    Ok(FitDocument { mu: params.mu(), sigma: params.sigma(), ks: ks_statistic(sample, params), n: sample.len() })
}

fn category_summary(sample: &SalarySample, labels: &[String]) -> Result<CategorySummary, CliError> {
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        members.entry(label).or_default().push(i);
    }
    let counts: Vec<u64> = members.values().map(|m| m.len() as u64).collect();
    let groups: Vec<Vec<usize>> = members.values().cloned().collect();
    let decomposition = theil_decomposition(sample, &groups)?;
    let log_w = log_multiplicity_counts(&counts, MultiplicityMethod::ExactLogGamma)?;
    Ok(CategorySummary {
        entropy_nats: shannon_entropy_counts(&counts)?,
        log_multiplicity_nats: log_w.log_w_nats,
        log10_multiplicity: log_w.log10_w(),
        theil_between: decomposition.between,
        groups: members
            .iter()
            .zip(decomposition.within.iter().zip(&decomposition.income_weights))
            .map(|((label, m), (&theil_within, &income_share))| GroupSummary {
                category: label.to_string(),
                count: m.len(),
                income_share,
                theil_within,
            })
            .collect(),
    })
}

pub fn analyze_table(table: &SalaryTable, file: &str, with_fit: bool) -> Result<ReportDocument, CliError> {
    let sample = SalarySample::new(table.salaries.clone())?;
    let categories = match &table.categories {
        Some(labels) => Some(category_summary(&sample, labels)?),
        None => None,
    };
    let lognormal = if with_fit { Some(fit_document(&sample)?) } else { None };
    Ok(ReportDocument {
        input: Provenance { file: file.to_string(), rows: table.len() },
        metrics: fairness_report(&sample, None)?,
        categories,
        lognormal,
    })
}
