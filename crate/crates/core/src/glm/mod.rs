//! Maximum-likelihood GLM fitting: logistic regression for fixed-interval
//! event probability and the Poisson-regression survival model
//! S(t | X) = exp(-t exp(beta' X)).
//!
//! Both fits run the shared damped-Newton maximizer from beta = 0. The
//! Poisson-survival likelihood sums d_i eta_i - t_i exp(eta_i), which is the
//! exponential time-to-event likelihood with the event flag selecting the
//! density term, and equivalently Poisson count regression with exposure
//! offset ln t_i. The intercept plays the role of the log baseline rate.

mod exp_family;

pub use exp_family::{exp_family_form, ExpFamily, ExpFamilyForm};

use nalgebra::{DMatrix, DVector};

use crate::dataset::{BinaryCohort, Cohort, CovariateVector};
use crate::error::{Error, Result};
use crate::optim::{maximize, FitConfig, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlmFamily {
    Logistic,
    PoissonSurvival,
}

impl GlmFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            GlmFamily::Logistic => "logistic",
            GlmFamily::PoissonSurvival => "poisson_survival",
        }
    }
}

/// A fitted GLM: intercept plus one coefficient per named covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedGlmModel {
    pub family: GlmFamily,
    pub covariate_names: Vec<String>,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub final_log_likelihood: f64,
    pub iterations: usize,
    /// Display metadata only; never used in computation.
    pub time_unit: Option<String>,
}

impl FittedGlmModel {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.covariate_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }

    /// beta0 + beta' x for covariates already in model order.
    pub fn linear_predictor_aligned(&self, values: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(values)
                .map(|(b, x)| b * x)
                .sum::<f64>()
    }

    /// beta0 + beta' x with `profile` matched to the model by name.
    pub fn linear_predictor(&self, profile: &CovariateVector) -> Result<f64> {
        let values = profile.aligned_to(&self.covariate_names)?;
        Ok(self.linear_predictor_aligned(&values))
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Design matrix with a leading intercept column.
fn design_matrix(rows: usize, names_len: usize, values: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, names_len + 1, |i, j| if j == 0 { 1.0 } else { values(i, j - 1) })
}

struct BernoulliLikelihood {
    design: DMatrix<f64>,
    outcome: DVector<f64>,
}

impl Objective for BernoulliLikelihood {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn value(&self, beta: &DVector<f64>) -> f64 {
        let eta = &self.design * beta;
        eta.iter()
            .zip(self.outcome.iter())
            .map(|(&e, &y)| y * e - softplus(e))
            .sum()
    }

    fn value_grad_hessian(&self, beta: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let p = self.dim();
        let eta = &self.design * beta;
        let mut value = 0.0;
        let mut grad = DVector::zeros(p);
        let mut hess = DMatrix::zeros(p, p);
        for i in 0..self.design.nrows() {
            let e = eta[i];
            let y = self.outcome[i];
            let mu = sigmoid(e);
            let w = mu * (1.0 - mu);
            value += y * e - softplus(e);
            let row = self.design.row(i);
            for a in 0..p {
                grad[a] += (y - mu) * row[a];
                for b in 0..p {
                    hess[(a, b)] -= w * row[a] * row[b];
                }
            }
        }
        (value, grad, hess)
    }
}

struct ExponentialTimeLikelihood {
    design: DMatrix<f64>,
    event: DVector<f64>,
    time: DVector<f64>,
}

impl Objective for ExponentialTimeLikelihood {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn value(&self, beta: &DVector<f64>) -> f64 {
        let eta = &self.design * beta;
        eta.iter()
            .zip(self.event.iter().zip(self.time.iter()))
            .map(|(&e, (&d, &t))| d * e - t * e.exp())
            .sum()
    }

    fn value_grad_hessian(&self, beta: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let p = self.dim();
        let eta = &self.design * beta;
        let mut value = 0.0;
        let mut grad = DVector::zeros(p);
        let mut hess = DMatrix::zeros(p, p);
        for i in 0..self.design.nrows() {
            let e = eta[i];
            let d = self.event[i];
            let expected = self.time[i] * e.exp();
            value += d * e - expected;
            let row = self.design.row(i);
            for a in 0..p {
                grad[a] += (d - expected) * row[a];
                for b in 0..p {
                    hess[(a, b)] -= expected * row[a] * row[b];
                }
            }
        }
        (value, grad, hess)
    }
}

fn bernoulli_likelihood(cohort: &BinaryCohort) -> BernoulliLikelihood {
    BernoulliLikelihood {
        design: design_matrix(cohort.len(), cohort.covariate_names().len(), |i, j| {
            cohort.records()[i].covariates.values()[j]
        }),
        outcome: DVector::from_iterator(
            cohort.len(),
            cohort.records().iter().map(|r| r.outcome as f64),
        ),
    }
}

fn exponential_time_likelihood(cohort: &Cohort) -> ExponentialTimeLikelihood {
    ExponentialTimeLikelihood {
        design: design_matrix(cohort.len(), cohort.covariate_names().len(), |i, j| {
            cohort.records()[i].covariates.values()[j]
        }),
        event: DVector::from_iterator(
            cohort.len(),
            cohort.records().iter().map(|r| if r.event { 1.0 } else { 0.0 }),
        ),
        time: DVector::from_iterator(cohort.len(), cohort.records().iter().map(|r| r.time)),
    }
}

fn check_beta(beta: &[f64], covariates: usize) {
    assert_eq!(beta.len(), covariates + 1, "beta is [intercept, coefficients...]");
    assert!(beta.iter().all(|b| b.is_finite()), "beta must be finite");
}

/// Bernoulli log-likelihood at `beta` = [intercept, coefficients...].
pub fn logistic_log_likelihood(cohort: &BinaryCohort, beta: &[f64]) -> f64 {
    check_beta(beta, cohort.covariate_names().len());
    bernoulli_likelihood(cohort).value(&DVector::from_column_slice(beta))
}

/// Analytic gradient of [`logistic_log_likelihood`].
pub fn logistic_gradient(cohort: &BinaryCohort, beta: &[f64]) -> Vec<f64> {
    check_beta(beta, cohort.covariate_names().len());
    let (_, grad, _) =
        bernoulli_likelihood(cohort).value_grad_hessian(&DVector::from_column_slice(beta));
    grad.as_slice().to_vec()
}

/// Exponential-time log-likelihood at `beta` = [intercept, coefficients...]:
/// sum_i [ d_i eta_i - t_i exp(eta_i) ].
pub fn poisson_survival_log_likelihood(cohort: &Cohort, beta: &[f64]) -> f64 {
    check_beta(beta, cohort.covariate_names().len());
    exponential_time_likelihood(cohort).value(&DVector::from_column_slice(beta))
}

/// Analytic gradient of [`poisson_survival_log_likelihood`].
pub fn poisson_survival_gradient(cohort: &Cohort, beta: &[f64]) -> Vec<f64> {
    check_beta(beta, cohort.covariate_names().len());
    let (_, grad, _) =
        exponential_time_likelihood(cohort).value_grad_hessian(&DVector::from_column_slice(beta));
    grad.as_slice().to_vec()
}

fn model_from_outcome(
    family: GlmFamily,
    covariate_names: Vec<String>,
    outcome: crate::optim::NewtonOutcome,
) -> Result<FittedGlmModel> {
    let model = FittedGlmModel {
        family,
        covariate_names,
        intercept: outcome.beta[0],
        coefficients: outcome.beta.as_slice()[1..].to_vec(),
        converged: outcome.converged,
        final_log_likelihood: outcome.value,
        iterations: outcome.iterations,
        time_unit: None,
    };
    if model.converged {
        Ok(model)
    } else {
        Err(Error::NonConvergedGlm(Box::new(model)))
    }
}

/// Fit logistic regression by damped Newton on the Bernoulli log-likelihood.
///
/// Requires at least one record of each outcome class. Perfect separation
/// surfaces as a non-convergence error carrying the last iterate.
pub fn fit_logistic(cohort: &BinaryCohort, config: &FitConfig) -> Result<FittedGlmModel> {
    let n_ones = cohort.records().iter().filter(|r| r.outcome == 1).count();
    if n_ones == 0 || n_ones == cohort.len() {
        return Err(Error::DegenerateData(
            "logistic fit needs at least one record of each outcome class".to_string(),
        ));
    }
    let likelihood = bernoulli_likelihood(cohort);
    let outcome = maximize(&likelihood, config);
    model_from_outcome(GlmFamily::Logistic, cohort.covariate_names().to_vec(), outcome)
}

/// P(Y = 1 | x) = 1 / (1 + exp(-(beta0 + beta' x))).
pub fn predict_logistic(model: &FittedGlmModel, profile: &CovariateVector) -> Result<f64> {
    if model.family != GlmFamily::Logistic {
        return Err(Error::Domain("model family is not logistic".to_string()));
    }
    Ok(sigmoid(model.linear_predictor(profile)?))
}

/// exp(beta_k): multiplicative change in the odds (logistic) or hazard
/// (Poisson-survival) per unit increase of the named covariate.
pub fn odds_ratio(model: &FittedGlmModel, covariate_name: &str) -> Result<f64> {
    model
        .coefficient(covariate_name)
        .map(f64::exp)
        .ok_or_else(|| Error::Schema(format!("unknown covariate '{covariate_name}'")))
}

/// Fit the Poisson-regression survival model by maximizing
/// sum_i [ d_i (beta0 + beta' x_i) - t_i exp(beta0 + beta' x_i) ].
pub fn fit_poisson_survival(cohort: &Cohort, config: &FitConfig) -> Result<FittedGlmModel> {
    if cohort.n_events() == 0 {
        return Err(Error::DegenerateData("no observed events".to_string()));
    }
    if cohort.records().iter().all(|r| r.time == 0.0) {
        return Err(Error::DegenerateData(
            "total follow-up time is zero; the event rate is unbounded".to_string(),
        ));
    }
    let likelihood = exponential_time_likelihood(cohort);
    let outcome = maximize(&likelihood, config);
    model_from_outcome(GlmFamily::PoissonSurvival, cohort.covariate_names().to_vec(), outcome)
}

/// S(t | x) = exp(-t exp(beta0 + beta' x)).
pub fn predict_poisson_survival(
    model: &FittedGlmModel,
    profile: &CovariateVector,
    t: f64,
) -> Result<f64> {
    if model.family != GlmFamily::PoissonSurvival {
        return Err(Error::Domain("model family is not poisson_survival".to_string()));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("horizon must be finite and >= 0, got {t}")));
    }
    Ok((-t * model.linear_predictor(profile)?.exp()).exp())
}
