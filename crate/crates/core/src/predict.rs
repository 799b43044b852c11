//! Prediction workflows over fitted survival models: survival probability at
//! chosen time points, time-to-event by inverting the baseline hazard table,
//! hazard-ratio interpretation of coefficients, and the Cox-vs-Poisson
//! comparison over a shared grid.

use crate::coxph::FittedCoxModel;
use crate::dataset::CovariateVector;
use crate::error::{Error, Result};
use crate::glm::{FittedGlmModel, GlmFamily};

/// Threshold labeled "median survival time" in reports.
pub const MEDIAN_THRESHOLD: f64 = 0.5;

/// A survival model usable for S(t | X) prediction: a Cox fit, or a
/// Poisson-survival GLM whose constant rate exp(beta0 + beta' x) makes the
/// curve exp(-t exp(beta0 + beta' x)).
#[derive(Debug, Clone, Copy)]
pub enum SurvivalModel<'a> {
    Cox(&'a FittedCoxModel),
    PoissonSurvival(&'a FittedGlmModel),
}

impl<'a> SurvivalModel<'a> {
    pub fn poisson(model: &'a FittedGlmModel) -> Result<Self> {
        if model.family != GlmFamily::PoissonSurvival {
            return Err(Error::Domain(
                "survival prediction needs a poisson_survival model".to_string(),
            ));
        }
        Ok(SurvivalModel::PoissonSurvival(model))
    }

    pub fn covariate_names(&self) -> &[String] {
        match self {
            SurvivalModel::Cox(m) => &m.covariate_names,
            SurvivalModel::PoissonSurvival(m) => &m.covariate_names,
        }
    }

    pub fn time_unit(&self) -> Option<&str> {
        match self {
            SurvivalModel::Cox(m) => m.time_unit.as_deref(),
            SurvivalModel::PoissonSurvival(m) => m.time_unit.as_deref(),
        }
    }
}

/// An evaluable survival curve S(t | X) for one covariate profile.
#[derive(Debug, Clone)]
pub struct SurvivalCurve<'a> {
    model: SurvivalModel<'a>,
    profile: CovariateVector,
    /// Cox: beta' x. Poisson: beta0 + beta' x.
    linear_predictor: f64,
}

impl<'a> SurvivalCurve<'a> {
    pub fn new(model: SurvivalModel<'a>, profile: CovariateVector) -> Result<Self> {
        let linear_predictor = match model {
            SurvivalModel::Cox(m) => m.log_relative_risk(&profile)?,
            SurvivalModel::PoissonSurvival(m) => m.linear_predictor(&profile)?,
        };
        Ok(SurvivalCurve { model, profile, linear_predictor })
    }

    pub fn profile(&self) -> &CovariateVector {
        &self.profile
    }

    pub fn linear_predictor(&self) -> f64 {
        self.linear_predictor
    }

    /// S(t | X); 1 at t = 0, nonincreasing in t.
    pub fn survival(&self, t: f64) -> f64 {
        match self.model {
            SurvivalModel::Cox(m) => {
                (-(m.baseline.cumulative_at(t) * self.linear_predictor.exp())).exp()
            }
            SurvivalModel::PoissonSurvival(_) => (-(t * self.linear_predictor.exp())).exp(),
        }
    }

    /// True when evaluating at `t` holds the baseline beyond its last
    /// tabulated event time. Always false for the constant-rate model.
    pub fn extrapolated(&self, t: f64) -> bool {
        match self.model {
            SurvivalModel::Cox(m) => m.baseline.beyond_horizon(t),
            SurvivalModel::PoissonSurvival(_) => false,
        }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    for &t in times {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!("times must be finite and >= 0, got {t}")));
        }
    }
    Ok(())
}

/// S(t | X) at each requested time.
///
/// Cox: exp(-H0(t) exp(beta' x)); Poisson-survival: exp(-t exp(beta0 + beta' x)).
pub fn survival_at(
    model: SurvivalModel<'_>,
    profile: &CovariateVector,
    times: &[f64],
) -> Result<Vec<f64>> {
    check_times(times)?;
    let curve = SurvivalCurve::new(model, profile.clone())?;
    Ok(times.iter().map(|&t| curve.survival(t)).collect())
}

/// A time estimate from inverting the survival curve at a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeEstimate {
    /// Smallest tabulated time where S(t | X) <= threshold; `None` when the
    /// table never accumulates enough hazard (beyond the observed horizon).
    pub time: Option<f64>,
    pub threshold: f64,
    pub extrapolated: bool,
}

/// The cumulative-hazard level S(t | X) = threshold corresponds to:
/// -ln(threshold) / exp(beta' x).
pub fn target_cumulative_hazard(threshold: f64, log_relative_risk: f64) -> f64 {
    (-threshold.ln()) / log_relative_risk.exp()
}

/// Invert S(t | X) at `threshold` (0.5 = median survival time).
///
/// For a Cox model this is a step-function lookup: the first tabulated event
/// time whose H0 reaches -ln(threshold)/exp(beta' x). No interpolation is
/// applied between table rows. For the constant-rate Poisson model the
/// inversion is exact.
pub fn time_to_threshold(
    model: SurvivalModel<'_>,
    profile: &CovariateVector,
    threshold: f64,
) -> Result<TimeEstimate> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Domain(format!("threshold must be in (0,1), got {threshold}")));
    }
    let curve = SurvivalCurve::new(model, profile.clone())?;
    match model {
        SurvivalModel::Cox(m) => {
            let target = target_cumulative_hazard(threshold, curve.linear_predictor());
            match m.baseline.first_time_reaching(target) {
                Some(time) => Ok(TimeEstimate { time: Some(time), threshold, extrapolated: false }),
                None => Ok(TimeEstimate { time: None, threshold, extrapolated: true }),
            }
        }
        SurvivalModel::PoissonSurvival(_) => {
            let time = (-threshold.ln()) / curve.linear_predictor().exp();
            Ok(TimeEstimate { time: Some(time), threshold, extrapolated: false })
        }
    }
}

/// Per-covariate effect size: exp(beta) and the percent change in hazard.
#[derive(Debug, Clone, PartialEq)]
pub struct HazardRatio {
    pub covariate: String,
    pub coefficient: f64,
    /// exp(beta): multiplicative hazard change per unit increase.
    pub hazard_ratio: f64,
    /// 100 (exp(beta) - 1), stored unrounded; reports round to whole percent.
    pub percent_change: f64,
}

/// Hazard ratios for every coefficient of a Cox model.
pub fn hazard_ratios(model: &FittedCoxModel) -> Vec<HazardRatio> {
    model
        .covariate_names
        .iter()
        .zip(&model.coefficients)
        .map(|(name, &beta)| HazardRatio {
            covariate: name.clone(),
            coefficient: beta,
            hazard_ratio: beta.exp(),
            percent_change: 100.0 * (beta.exp() - 1.0),
        })
        .collect()
}

/// One grid cell of the Cox-vs-Poisson survival comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceCell {
    pub profile_index: usize,
    pub time: f64,
    pub cox_survival: f64,
    pub poisson_survival: f64,
    pub divergence: f64,
}

/// Baseline-shape comparison: tabulated H0(t) against the straight line
/// t exp(beta0) implied by the constant-rate model.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineComparison {
    pub time: f64,
    pub cox_cumulative_hazard: f64,
    pub constant_rate_cumulative_hazard: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub cells: Vec<EquivalenceCell>,
    pub max_divergence: f64,
    pub baseline: Vec<BaselineComparison>,
}

/// Compare survival curves from a Cox fit and a Poisson-survival fit trained
/// on the same cohort, over the given profiles and time grid.
pub fn cox_poisson_equivalence_report(
    cox: &FittedCoxModel,
    glm: &FittedGlmModel,
    profiles: &[CovariateVector],
    times: &[f64],
) -> Result<EquivalenceReport> {
    if glm.family != GlmFamily::PoissonSurvival {
        return Err(Error::Domain("comparison needs a poisson_survival model".to_string()));
    }
    let mut glm_names = glm.covariate_names.clone();
    let mut cox_names = cox.covariate_names.clone();
    glm_names.sort();
    cox_names.sort();
    if glm_names != cox_names {
        return Err(Error::Schema(format!(
            "models disagree on covariates: cox has {:?}, poisson has {:?}",
            cox.covariate_names, glm.covariate_names
        )));
    }
    check_times(times)?;

    let mut cells = Vec::with_capacity(profiles.len() * times.len());
    let mut max_divergence = 0.0_f64;
    for (profile_index, profile) in profiles.iter().enumerate() {
        let cox_curve = SurvivalCurve::new(SurvivalModel::Cox(cox), profile.clone())?;
        let glm_curve = SurvivalCurve::new(SurvivalModel::poisson(glm)?, profile.clone())?;
        for &time in times {
            let cox_survival = cox_curve.survival(time);
            let poisson_survival = glm_curve.survival(time);
            let divergence = (cox_survival - poisson_survival).abs();
            max_divergence = max_divergence.max(divergence);
            cells.push(EquivalenceCell {
                profile_index,
                time,
                cox_survival,
                poisson_survival,
                divergence,
            });
        }
    }

    let rate0 = glm.intercept.exp();
    let baseline = cox
        .baseline
        .entries()
        .iter()
        .map(|e| BaselineComparison {
            time: e.time,
            cox_cumulative_hazard: e.cumulative,
            constant_rate_cumulative_hazard: e.time * rate0,
        })
        .collect();

    Ok(EquivalenceReport { cells, max_divergence, baseline })
}
