//! Model artifacts: the JSON wire format for fitted models.
//!
//! Every floating-point value is serialized with 17 significant digits so a
//! reload reproduces the exact f64 bits. Diagnostics that are not part of
//! the wire schema (covariate means, standard errors) stay in memory only.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coxph::{BaselineHazardTable, FittedCoxModel};
use crate::error::{Error, Result};
use crate::glm::{FittedGlmModel, GlmFamily};
use crate::optim::TieMethod;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlmArtifact {
    pub family: String,
    pub covariate_names: Vec<String>,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub time_unit: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineRow {
    pub time: f64,
    pub increment: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoxArtifact {
    pub covariate_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub baseline: Vec<BaselineRow>,
    pub converged: bool,
    pub log_partial_likelihood: f64,
    pub iterations: usize,
    pub time_unit: Option<String>,
    pub ties: String,
}

/// Either artifact kind, distinguished by its required fields.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ModelArtifact {
    Cox(CoxArtifact),
    Glm(GlmArtifact),
}

#[derive(Debug, Clone)]
pub enum LoadedModel {
    Cox(FittedCoxModel),
    Glm(FittedGlmModel),
}

impl From<&FittedGlmModel> for GlmArtifact {
    fn from(m: &FittedGlmModel) -> Self {
        GlmArtifact {
            family: m.family.as_str().to_string(),
            covariate_names: m.covariate_names.clone(),
            intercept: m.intercept,
            coefficients: m.coefficients.clone(),
            converged: m.converged,
            log_likelihood: m.final_log_likelihood,
            iterations: m.iterations,
            time_unit: m.time_unit.clone(),
        }
    }
}

impl From<&FittedCoxModel> for CoxArtifact {
    fn from(m: &FittedCoxModel) -> Self {
        CoxArtifact {
            covariate_names: m.covariate_names.clone(),
            coefficients: m.coefficients.clone(),
            baseline: m
                .baseline
                .entries()
                .iter()
                .map(|e| BaselineRow { time: e.time, increment: e.increment, cumulative: e.cumulative })
                .collect(),
            converged: m.converged,
            log_partial_likelihood: m.final_log_partial_likelihood,
            iterations: m.iterations,
            time_unit: m.time_unit.clone(),
            ties: TieMethod::Breslow.as_str().to_string(),
        }
    }
}

impl TryFrom<GlmArtifact> for FittedGlmModel {
    type Error = Error;

    fn try_from(a: GlmArtifact) -> Result<Self> {
        let family = match a.family.as_str() {
            "logistic" => GlmFamily::Logistic,
            "poisson_survival" => GlmFamily::PoissonSurvival,
            other => return Err(Error::Schema(format!("unknown glm family '{other}'"))),
        };
        if a.covariate_names.len() != a.coefficients.len() {
            return Err(Error::Schema(format!(
                "artifact has {} covariate names but {} coefficients",
                a.covariate_names.len(),
                a.coefficients.len()
            )));
        }
        Ok(FittedGlmModel {
            family,
            covariate_names: a.covariate_names,
            intercept: a.intercept,
            coefficients: a.coefficients,
            converged: a.converged,
            final_log_likelihood: a.log_likelihood,
            iterations: a.iterations,
            time_unit: a.time_unit,
        })
    }
}

impl TryFrom<CoxArtifact> for FittedCoxModel {
    type Error = Error;

    fn try_from(a: CoxArtifact) -> Result<Self> {
        if a.ties != TieMethod::Breslow.as_str() {
            return Err(Error::Schema(format!(
                "unsupported tie convention '{}'; only breslow is implemented",
                a.ties
            )));
        }
        if a.covariate_names.len() != a.coefficients.len() {
            return Err(Error::Schema(format!(
                "artifact has {} covariate names but {} coefficients",
                a.covariate_names.len(),
                a.coefficients.len()
            )));
        }
        let baseline =
            BaselineHazardTable::from_increments(a.baseline.iter().map(|r| (r.time, r.increment)))?;
        for (entry, row) in baseline.entries().iter().zip(&a.baseline) {
            let tolerance = 1e-9 * row.cumulative.abs().max(1.0);
            if (entry.cumulative - row.cumulative).abs() > tolerance {
                return Err(Error::validation(format!(
                    "baseline cumulative value at time {} is {} but the increments sum to {}",
                    row.time, row.cumulative, entry.cumulative
                )));
            }
        }
        Ok(FittedCoxModel {
            covariate_names: a.covariate_names,
            coefficients: a.coefficients,
            baseline,
            converged: a.converged,
            final_log_partial_likelihood: a.log_partial_likelihood,
            iterations: a.iterations,
            covariate_means: None,
            standard_errors: None,
            time_unit: a.time_unit,
        })
    }
}

/// JSON formatter printing every f64 with 17 significant digits.
struct SigDigits17;

impl serde_json::ser::Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize with the 17-significant-digit float format, newline-terminated.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let mut out = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut out, SigDigits17);
    value.serialize(&mut serializer)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

pub fn write_glm_model(path: impl AsRef<Path>, model: &FittedGlmModel) -> Result<()> {
    std::fs::write(path, to_json(&GlmArtifact::from(model))?)?;
    Ok(())
}

pub fn write_cox_model(path: impl AsRef<Path>, model: &FittedCoxModel) -> Result<()> {
    std::fs::write(path, to_json(&CoxArtifact::from(model))?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<LoadedModel> {
    let contents = std::fs::read_to_string(path.as_ref())?;
    let artifact: ModelArtifact = serde_json::from_str(&contents).map_err(|e| {
        Error::Schema(format!("{} is not a model artifact: {e}", path.as_ref().display()))
    })?;
    match artifact {
        ModelArtifact::Cox(a) => Ok(LoadedModel::Cox(a.try_into()?)),
        ModelArtifact::Glm(a) => Ok(LoadedModel::Glm(a.try_into()?)),
    }
}
