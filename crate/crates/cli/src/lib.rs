//! Library side of the `fairpay` command: config parsing, CSV ingestion and
//! the JSON/CSV documents each subcommand writes.

pub mod config;
pub mod ingest;
pub mod report;
pub mod simulate;
pub mod solve;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Model(#[from] fairpay_core::ModelError),
    #[error(transparent)]
    Metric(#[from] fairpay_core::MetricError),
    #[error(transparent)]
    Statmech(#[from] fairpay_core::statmech::StatmechError),
    #[error(transparent)]
    Market(#[from] fairpay_core::market::MarketError),
    #[error(transparent)]
    Maxent(#[from] fairpay_core::maxent::MaxentError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}
