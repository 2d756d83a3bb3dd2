//! Salary CSV input.

use std::io::Read;
use std::path::Path;

use fairpay_core::Money;
use thiserror::Error;

/// Errors carry the 1-based data row (the header is row 0).
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("row {row}: {message}")]
    Csv { row: u64, message: String },
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}, column `{column}`: cannot parse {value:?}: {message}")]
    Parse { row: u64, column: &'static str, value: String, message: String },
    #[error("row {row}: salary must be positive, got {salary}")]
    NonPositiveSalary { row: u64, salary: Money },
    #[error("no data rows")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SalaryTable {
    pub salaries: Vec<Money>,
    /// Present when the file has a `category` column.
    pub categories: Option<Vec<String>>,
}

impl SalaryTable {
    pub fn len(&self) -> usize {
        self.salaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.salaries.is_empty()
    }
}

pub fn read_salary_csv<R: Read>(input: R) -> Result<SalaryTable, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers().map_err(|e| IngestError::Csv { row: 0, message: e.to_string() })?.clone();
    let salary_col = headers.iter().position(|h| h == "salary").ok_or(IngestError::MissingColumn("salary"))?;
    let category_col = headers.iter().position(|h| h == "category");

    let mut salaries = Vec::new();
    let mut categories = category_col.map(|_| Vec::new());
    for (i, record) in reader.records().enumerate() {
        let row = i as u64 + 1;
        let record = record.map_err(|e| IngestError::Csv { row, message: e.to_string() })?;
        let text = record.get(salary_col).unwrap_or("");
        let salary: Money = text.parse().map_err(|e: fairpay_core::money::ParseMoneyError| IngestError::Parse {
            row,
            column: "salary",
            value: text.to_string(),
            message: e.to_string(),
        })?;
        if !salary.is_positive() {
            return Err(IngestError::NonPositiveSalary { row, salary });
        }
        salaries.push(salary);
        if let (Some(col), Some(cats)) = (category_col, categories.as_mut()) {
            let label = record.get(col).unwrap_or("");
            if label.is_empty() {
                return Err(IngestError::Parse {
                    row,
                    column: "category",
                    value: String::new(),
                    message: "empty category".to_string(),
                });
            }
            cats.push(label.to_string());
        }
    }
    if salaries.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(SalaryTable { salaries, categories })
}

pub fn load_salary_csv(path: &Path) -> Result<SalaryTable, IngestError> {
    let file =
        std::fs::File::open(path).map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    read_salary_csv(std::io::BufReader::new(file))
}
