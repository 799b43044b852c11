//! Cohort data model, validation, and CSV ingestion.
//!
//! CSV is the single ingestion format: UTF-8, comma-separated, header row,
//! `.` decimal separator. The event column accepts `0`, `1`, `true`, `false`.
//! Column mapping is always explicit (no header guessing), times are
//! dimensionless analysis time, and row order is preserved.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Named, ordered covariate values for one subject or one profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateVector {
    names: Vec<String>,
    values: Vec<f64>,
}

impl CovariateVector {
    /// `names` and `values` must be equally long and every value finite.
    /// Empty vectors are allowed: intercept-only survival models take no
    /// covariates at all.
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::Schema(format!(
                "covariate names ({}) and values ({}) differ in length",
                names.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "covariate '{}' is not finite: {}",
                names[i], values[i]
            )));
        }
        Ok(CovariateVector { names, values })
    }

    pub fn empty() -> Self {
        CovariateVector { names: Vec::new(), values: Vec::new() }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    /// Values reordered to `names`; errors name the first mismatch.
    pub fn aligned_to(&self, names: &[String]) -> Result<Vec<f64>> {
        if let Some(extra) = self.names.iter().find(|n| !names.contains(n)) {
            return Err(Error::Schema(format!("unknown covariate '{extra}'")));
        }
        names
            .iter()
            .map(|n| {
                self.get(n)
                    .ok_or_else(|| Error::Schema(format!("missing covariate '{n}'")))
            })
            .collect()
    }
}

/// One subject: follow-up time, event/censoring flag, covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalRecord {
    pub subject_id: String,
    /// Follow-up duration in analysis time; nonnegative and finite.
    pub time: f64,
    /// `true` = event observed at `time`, `false` = right-censored at `time`.
    pub event: bool,
    pub covariates: CovariateVector,
}

impl SurvivalRecord {
    pub fn new(
        subject_id: impl Into<String>,
        time: f64,
        event: bool,
        covariates: CovariateVector,
    ) -> Result<Self> {
        if !time.is_finite() || time < 0.0 {
            return Err(Error::validation(format!(
                "time must be finite and >= 0, got {time}"
            )));
        }
        Ok(SurvivalRecord { subject_id: subject_id.into(), time, event, covariates })
    }
}

/// One subject with a fixed-interval binary outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryRecord {
    pub subject_id: String,
    /// 0 or 1.
    pub outcome: u8,
    pub covariates: CovariateVector,
}

impl BinaryRecord {
    pub fn new(subject_id: impl Into<String>, outcome: u8, covariates: CovariateVector) -> Result<Self> {
        if outcome > 1 {
            return Err(Error::validation(format!("outcome must be 0 or 1, got {outcome}")));
        }
        Ok(BinaryRecord { subject_id: subject_id.into(), outcome, covariates })
    }
}

/// Nonempty sequence of survival records sharing one covariate layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    records: Vec<SurvivalRecord>,
    covariate_names: Vec<String>,
}

impl Cohort {
    pub fn new(records: Vec<SurvivalRecord>) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::validation("cohort must contain at least one record"))?;
        let covariate_names = first.covariates.names().to_vec();
        for (i, r) in records.iter().enumerate() {
            if r.covariates.names() != covariate_names.as_slice() {
                return Err(Error::Schema(format!(
                    "record {} ('{}') has covariate names {:?}, expected {:?}",
                    i + 1,
                    r.subject_id,
                    r.covariates.names(),
                    covariate_names
                )));
            }
        }
        Ok(Cohort { records, covariate_names })
    }

    pub fn records(&self) -> &[SurvivalRecord] {
        &self.records
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_events(&self) -> usize {
        self.records.iter().filter(|r| r.event).count()
    }
}

/// Nonempty sequence of binary-outcome records sharing one covariate layout.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryCohort {
    records: Vec<BinaryRecord>,
    covariate_names: Vec<String>,
}

impl BinaryCohort {
    pub fn new(records: Vec<BinaryRecord>) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::validation("cohort must contain at least one record"))?;
        let covariate_names = first.covariates.names().to_vec();
        for (i, r) in records.iter().enumerate() {
            if r.covariates.names() != covariate_names.as_slice() {
                return Err(Error::Schema(format!(
                    "record {} ('{}') has covariate names {:?}, expected {:?}",
                    i + 1,
                    r.subject_id,
                    r.covariates.names(),
                    covariate_names
                )));
            }
        }
        Ok(BinaryCohort { records, covariate_names })
    }

    pub fn records(&self) -> &[BinaryRecord] {
        &self.records
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Column mapping for survival CSVs. `id` is optional; absent ids become
/// `row1`, `row2`, ... in file order.
#[derive(Debug, Clone)]
pub struct SurvivalSchema {
    pub id: Option<String>,
    pub time: String,
    pub event: String,
    pub covariates: Vec<String>,
}

/// Column mapping for binary-outcome CSVs.
#[derive(Debug, Clone)]
pub struct BinarySchema {
    pub id: Option<String>,
    pub outcome: String,
    pub covariates: Vec<String>,
}

fn header_index(headers: &csv::StringRecord, column: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Schema(format!("missing column '{column}'")))
}

fn parse_cell(raw: &str, column: &str, row: usize) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        row,
        message: format!("column '{column}': cannot parse '{raw}' as a number"),
    })
}

fn parse_event(raw: &str, column: &str, row: usize) -> Result<bool> {
    match raw.trim() {
        "0" | "false" => Ok(false),
        "1" | "true" => Ok(true),
        other => Err(Error::Parse {
            row,
            message: format!("column '{column}': expected 0/1/true/false, got '{other}'"),
        }),
    }
}

/// Load a survival cohort from CSV under an explicit column mapping.
///
/// Rows keep file order. Negative or non-finite times are validation errors
/// citing the 1-based data row.
pub fn load_survival_csv(path: impl AsRef<Path>, schema: &SurvivalSchema) -> Result<Cohort> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let id_idx = schema.id.as_deref().map(|c| header_index(&headers, c)).transpose()?;
    let time_idx = header_index(&headers, &schema.time)?;
    let event_idx = header_index(&headers, &schema.event)?;
    let cov_idx: Vec<usize> = schema
        .covariates
        .iter()
        .map(|c| header_index(&headers, c))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row?;
        let subject_id = match id_idx {
            Some(idx) => row.get(idx).unwrap_or_default().to_string(),
            None => format!("row{row_no}"),
        };
        let time = parse_cell(row.get(time_idx).unwrap_or_default(), &schema.time, row_no)?;
        if !time.is_finite() || time < 0.0 {
            return Err(Error::validation_at(
                row_no,
                format!("time must be finite and >= 0, got {time}"),
            ));
        }
        let event = parse_event(row.get(event_idx).unwrap_or_default(), &schema.event, row_no)?;
        let mut values = Vec::with_capacity(cov_idx.len());
        for (&idx, name) in cov_idx.iter().zip(&schema.covariates) {
            let v = parse_cell(row.get(idx).unwrap_or_default(), name, row_no)?;
            if !v.is_finite() {
                return Err(Error::validation_at(
                    row_no,
                    format!("covariate '{name}' is not finite: {v}"),
                ));
            }
            values.push(v);
        }
        let covariates = CovariateVector::new(schema.covariates.clone(), values)?;
        records.push(SurvivalRecord { subject_id, time, event, covariates });
    }
    Cohort::new(records)
}

/// Load a binary-outcome cohort from CSV under an explicit column mapping.
pub fn load_binary_csv(path: impl AsRef<Path>, schema: &BinarySchema) -> Result<BinaryCohort> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let id_idx = schema.id.as_deref().map(|c| header_index(&headers, c)).transpose()?;
    let outcome_idx = header_index(&headers, &schema.outcome)?;
    let cov_idx: Vec<usize> = schema
        .covariates
        .iter()
        .map(|c| header_index(&headers, c))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row?;
        let subject_id = match id_idx {
            Some(idx) => row.get(idx).unwrap_or_default().to_string(),
            None => format!("row{row_no}"),
        };
        let outcome = parse_event(row.get(outcome_idx).unwrap_or_default(), &schema.outcome, row_no)?;
        let mut values = Vec::with_capacity(cov_idx.len());
        for (&idx, name) in cov_idx.iter().zip(&schema.covariates) {
            let v = parse_cell(row.get(idx).unwrap_or_default(), name, row_no)?;
            if !v.is_finite() {
                return Err(Error::validation_at(
                    row_no,
                    format!("covariate '{name}' is not finite: {v}"),
                ));
            }
            values.push(v);
        }
        let covariates = CovariateVector::new(schema.covariates.clone(), values)?;
        records.push(BinaryRecord { subject_id, outcome: outcome as u8, covariates });
    }
    BinaryCohort::new(records)
}

/// Write a cohort as `id,time,event,<covariates...>` with header. Floats use
/// shortest round-trip formatting so reloading reproduces them bit-for-bit.
pub fn write_survival_csv(cohort: &Cohort, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["id".to_string(), "time".to_string(), "event".to_string()];
    header.extend(cohort.covariate_names().iter().cloned());
    writer.write_record(&header)?;
    for r in cohort.records() {
        let mut row = vec![
            r.subject_id.clone(),
            format!("{}", r.time),
            if r.event { "1".to_string() } else { "0".to_string() },
        ];
        row.extend(r.covariates.values().iter().map(|v| format!("{v}")));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// The built-in schema matching [`write_survival_csv`] output.
pub fn written_schema(covariates: Vec<String>) -> SurvivalSchema {
    SurvivalSchema {
        id: Some("id".to_string()),
        time: "time".to_string(),
        event: "event".to_string(),
        covariates,
    }
}

/// Data-quality issue reported by [`validate_cohort`]. Findings are data,
/// not failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finding {
    NoObservedEvents,
    ConstantCovariate { name: String },
    DuplicateSubjectId { id: String },
    NonFiniteValue { subject_id: String, what: String },
    NegativeTime { subject_id: String },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::NoObservedEvents => write!(f, "no observed events"),
            Finding::ConstantCovariate { name } => write!(f, "constant covariate '{name}'"),
            Finding::DuplicateSubjectId { id } => write!(f, "duplicate subject id '{id}'"),
            Finding::NonFiniteValue { subject_id, what } => {
                write!(f, "non-finite {what} for subject '{subject_id}'")
            }
            Finding::NegativeTime { subject_id } => {
                write!(f, "negative time for subject '{subject_id}'")
            }
        }
    }
}

/// Check a cohort against the survival-fitting invariants.
///
/// Returns an empty list iff the cohort is clean: at least one observed
/// event, no constant covariate column, unique subject ids, finite values,
/// nonnegative times.
pub fn validate_cohort(cohort: &Cohort) -> Vec<Finding> {
    let mut findings = Vec::new();

    if cohort.n_events() == 0 {
        findings.push(Finding::NoObservedEvents);
    }

    for (j, name) in cohort.covariate_names().iter().enumerate() {
        let first = cohort.records()[0].covariates.values()[j];
        if cohort.records().iter().all(|r| r.covariates.values()[j] == first) {
            findings.push(Finding::ConstantCovariate { name: name.clone() });
        }
    }

    let mut seen = HashSet::new();
    for r in cohort.records() {
        if !seen.insert(r.subject_id.as_str()) {
            findings.push(Finding::DuplicateSubjectId { id: r.subject_id.clone() });
        }
    }

    for r in cohort.records() {
        if !r.time.is_finite() {
            findings.push(Finding::NonFiniteValue {
                subject_id: r.subject_id.clone(),
                what: "time".to_string(),
            });
        } else if r.time < 0.0 {
            findings.push(Finding::NegativeTime { subject_id: r.subject_id.clone() });
        }
        for (name, v) in r.covariates.names().iter().zip(r.covariates.values()) {
            if !v.is_finite() {
                findings.push(Finding::NonFiniteValue {
                    subject_id: r.subject_id.clone(),
                    what: format!("covariate '{name}'"),
                });
            }
        }
    }

    findings
}
