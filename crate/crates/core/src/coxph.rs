//! Cox proportional hazards estimation.
//!
//! The fit maximizes the log partial likelihood
//! sum over events of [ beta' X_i - ln sum_{j in R(t_i)} exp(beta' X_j) ]
//! with the Breslow convention for ties (every tied event keeps the full
//! risk-set denominator), then tabulates the baseline cumulative hazard as
//! Delta H0(t_i) = d_i / sum_{j in R(t_i)} exp(beta' X_j) over the distinct
//! event times. Risk-set denominators are evaluated in log space with a
//! max shift so large linear predictors cannot overflow.

use nalgebra::{DMatrix, DVector};

use crate::dataset::{Cohort, CovariateVector};
use crate::error::{Error, Result};
use crate::optim::{maximize, FitConfig, Objective};

/// Distinct event times with tie counts and suffix-encoded risk sets.
///
/// Subjects are kept sorted by follow-up time ascending; the risk set at the
/// i-th distinct event time is the suffix of that order starting at
/// `risk_start[i]`, so the sets are nested decreasing by construction.
#[derive(Debug, Clone)]
pub struct RiskSetIndex {
    order: Vec<usize>,
    distinct_event_times: Vec<f64>,
    events_at: Vec<usize>,
    event_subjects: Vec<Vec<usize>>,
    risk_start: Vec<usize>,
}

impl RiskSetIndex {
    pub fn distinct_event_times(&self) -> &[f64] {
        &self.distinct_event_times
    }

    pub fn n_distinct(&self) -> usize {
        self.distinct_event_times.len()
    }

    /// Number of events d_i at the i-th distinct event time.
    pub fn events_at(&self, i: usize) -> usize {
        self.events_at[i]
    }

    /// Cohort indices of subjects with follow-up time >= t_i.
    pub fn at_risk(&self, i: usize) -> &[usize] {
        &self.order[self.risk_start[i]..]
    }

    /// Cohort indices of the subjects whose event occurred at t_i.
    pub fn event_subjects(&self, i: usize) -> &[usize] {
        &self.event_subjects[i]
    }
}

/// Extract distinct event times and risk sets from a cohort.
///
/// A subject is at risk at t_i iff its follow-up time is >= t_i; censored
/// subjects stay in risk sets while under observation.
pub fn build_risk_sets(cohort: &Cohort) -> Result<RiskSetIndex> {
    if cohort.n_events() == 0 {
        return Err(Error::DegenerateData("no observed events".to_string()));
    }
    let records = cohort.records();

    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].time.total_cmp(&records[b].time));

    let mut distinct_event_times: Vec<f64> = records
        .iter()
        .filter(|r| r.event)
        .map(|r| r.time)
        .collect();
    distinct_event_times.sort_by(f64::total_cmp);
    distinct_event_times.dedup();

    let mut events_at = vec![0usize; distinct_event_times.len()];
    let mut event_subjects = vec![Vec::new(); distinct_event_times.len()];
    for (idx, r) in records.iter().enumerate() {
        if r.event {
            let i = distinct_event_times
                .binary_search_by(|t| t.total_cmp(&r.time))
                .expect("event time is in the distinct list");
            events_at[i] += 1;
            event_subjects[i].push(idx);
        }
    }

    let risk_start = distinct_event_times
        .iter()
        .map(|&t| order.partition_point(|&idx| records[idx].time < t))
        .collect();

    Ok(RiskSetIndex { order, distinct_event_times, events_at, event_subjects, risk_start })
}

/// Shared evaluator for the log partial likelihood and its derivatives,
/// laid out in the risk-set order so denominators accumulate as suffix sums.
struct PartialLikelihood {
    n: usize,
    p: usize,
    /// Covariates row-major in `order` (time-ascending) sequence.
    x_sorted: Vec<f64>,
    /// Per distinct event time (ascending): boundary into the sorted rows,
    /// tie count, and the covariate sum over that time's event subjects.
    risk_start: Vec<usize>,
    events_at: Vec<f64>,
    event_x_sum: Vec<f64>,
}

impl PartialLikelihood {
    fn new(index: &RiskSetIndex, cohort: &Cohort) -> Self {
        let p = cohort.covariate_names().len();
        let records = cohort.records();
        let mut x_sorted = Vec::with_capacity(index.order.len() * p);
        for &idx in &index.order {
            x_sorted.extend_from_slice(records[idx].covariates.values());
        }
        let mut event_x_sum = vec![0.0; index.n_distinct() * p];
        for i in 0..index.n_distinct() {
            for &idx in index.event_subjects(i) {
                for (j, v) in records[idx].covariates.values().iter().enumerate() {
                    event_x_sum[i * p + j] += v;
                }
            }
        }
        PartialLikelihood {
            n: index.order.len(),
            p,
            x_sorted,
            risk_start: index.risk_start.clone(),
            events_at: index.events_at.iter().map(|&d| d as f64).collect(),
            event_x_sum,
        }
    }

    fn eta(&self, beta: &DVector<f64>) -> (Vec<f64>, f64) {
        let mut eta = vec![0.0; self.n];
        let mut max_eta = f64::NEG_INFINITY;
        for (i, e) in eta.iter_mut().enumerate() {
            let row = &self.x_sorted[i * self.p..(i + 1) * self.p];
            *e = row.iter().zip(beta.iter()).map(|(x, b)| x * b).sum();
            if *e > max_eta {
                max_eta = *e;
            }
        }
        (eta, max_eta)
    }
}

impl Objective for PartialLikelihood {
    fn dim(&self) -> usize {
        self.p
    }

    fn value(&self, beta: &DVector<f64>) -> f64 {
        let (eta, shift) = self.eta(beta);
        let n = eta.len();
        let mut value = 0.0;
        let mut s0 = 0.0;
        let mut cursor = n;
        for i in (0..self.risk_start.len()).rev() {
            for k in self.risk_start[i]..cursor {
                s0 += (eta[k] - shift).exp();
            }
            cursor = cursor.min(self.risk_start[i]);
            let d = self.events_at[i];
            let event_sum = &self.event_x_sum[i * self.p..(i + 1) * self.p];
            let numerator: f64 = event_sum.iter().zip(beta.iter()).map(|(x, b)| x * b).sum();
            value += numerator - d * (shift + s0.ln());
        }
        value
    }

    fn value_grad_hessian(&self, beta: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let p = self.p;
        let (eta, shift) = self.eta(beta);
        let n = eta.len();
        let mut value = 0.0;
        let mut grad = DVector::zeros(p);
        let mut hess = DMatrix::zeros(p, p);
        let mut s0 = 0.0;
        let mut s1 = vec![0.0; p];
        let mut s2 = vec![0.0; p * p];
        let mut cursor = n;
        for i in (0..self.risk_start.len()).rev() {
            for k in self.risk_start[i]..cursor {
                let w = (eta[k] - shift).exp();
                let row = &self.x_sorted[k * p..(k + 1) * p];
                s0 += w;
                for a in 0..p {
                    s1[a] += w * row[a];
                    for b in 0..p {
                        s2[a * p + b] += w * row[a] * row[b];
                    }
                }
            }
            cursor = cursor.min(self.risk_start[i]);

            let d = self.events_at[i];
            let event_sum = &self.event_x_sum[i * p..(i + 1) * p];
            let numerator: f64 = event_sum.iter().zip(beta.iter()).map(|(x, b)| x * b).sum();
            value += numerator - d * (shift + s0.ln());
            for a in 0..p {
                let mean_a = s1[a] / s0;
                grad[a] += event_sum[a] - d * mean_a;
                for b in 0..p {
                    hess[(a, b)] -= d * (s2[a * p + b] / s0 - mean_a * s1[b] / s0);
                }
            }
        }
        (value, grad, hess)
    }
}

fn check_beta(beta: &[f64], p: usize) {
    assert_eq!(beta.len(), p, "beta length must match covariate count");
    assert!(beta.iter().all(|b| b.is_finite()), "beta must be finite");
}

/// Log partial likelihood at `beta` under the Breslow tie convention.
pub fn log_partial_likelihood(beta: &[f64], index: &RiskSetIndex, cohort: &Cohort) -> f64 {
    check_beta(beta, cohort.covariate_names().len());
    let eval = PartialLikelihood::new(index, cohort);
    eval.value(&DVector::from_column_slice(beta))
}

/// Analytic gradient of [`log_partial_likelihood`] with respect to beta.
pub fn partial_likelihood_gradient(beta: &[f64], index: &RiskSetIndex, cohort: &Cohort) -> Vec<f64> {
    check_beta(beta, cohort.covariate_names().len());
    let eval = PartialLikelihood::new(index, cohort);
    let (_, grad, _) = eval.value_grad_hessian(&DVector::from_column_slice(beta));
    grad.as_slice().to_vec()
}

/// Analytic Hessian of [`log_partial_likelihood`]; negative semidefinite
/// everywhere since the objective is concave.
pub fn partial_likelihood_hessian(
    beta: &[f64],
    index: &RiskSetIndex,
    cohort: &Cohort,
) -> DMatrix<f64> {
    check_beta(beta, cohort.covariate_names().len());
    let eval = PartialLikelihood::new(index, cohort);
    let (_, _, hessian) = eval.value_grad_hessian(&DVector::from_column_slice(beta));
    hessian
}

/// One step of the baseline cumulative hazard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineEntry {
    pub time: f64,
    pub increment: f64,
    pub cumulative: f64,
}

/// Nondecreasing step table for H0(t) over the distinct event times.
///
/// H0 is right-continuous: it is 0 before the first event time and holds the
/// last preceding cumulative value between entries.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineHazardTable {
    entries: Vec<BaselineEntry>,
}

impl BaselineHazardTable {
    /// Build from (time, increment) pairs, accumulating the prefix sums.
    pub fn from_increments(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut entries = Vec::new();
        let mut cumulative = 0.0;
        let mut last_time = f64::NEG_INFINITY;
        for (time, increment) in pairs {
            if !time.is_finite() || time <= last_time {
                return Err(Error::validation(format!(
                    "baseline times must be finite and strictly increasing, got {time}"
                )));
            }
            if !increment.is_finite() || increment <= 0.0 {
                return Err(Error::validation(format!(
                    "baseline increments must be finite and > 0, got {increment} at time {time}"
                )));
            }
            cumulative += increment;
            entries.push(BaselineEntry { time, increment, cumulative });
            last_time = time;
        }
        if entries.is_empty() {
            return Err(Error::validation("baseline table must have at least one entry"));
        }
        Ok(BaselineHazardTable { entries })
    }

    /// Used for fit outputs, where a non-converged iterate may produce
    /// denominators that underflow the positivity checks.
    fn from_increments_unchecked(pairs: Vec<(f64, f64)>) -> Self {
        let mut cumulative = 0.0;
        let entries = pairs
            .into_iter()
            .map(|(time, increment)| {
                cumulative += increment;
                BaselineEntry { time, increment, cumulative }
            })
            .collect();
        BaselineHazardTable { entries }
    }

    pub fn entries(&self) -> &[BaselineEntry] {
        &self.entries
    }

    pub fn first_time(&self) -> f64 {
        self.entries[0].time
    }

    pub fn last_time(&self) -> f64 {
        self.entries[self.entries.len() - 1].time
    }

    /// H0(t) as a right-continuous step function; 0 before the first event
    /// time, held at the last value beyond the table.
    pub fn cumulative_at(&self, t: f64) -> f64 {
        let idx = self.entries.partition_point(|e| e.time <= t);
        if idx == 0 {
            0.0
        } else {
            self.entries[idx - 1].cumulative
        }
    }

    /// True when `t` lies beyond the last tabulated event time, where
    /// evaluation extrapolates by holding the final value.
    pub fn beyond_horizon(&self, t: f64) -> bool {
        t > self.last_time()
    }

    /// Smallest tabulated time whose cumulative hazard reaches `target`.
    pub fn first_time_reaching(&self, target: f64) -> Option<f64> {
        self.entries.iter().find(|e| e.cumulative >= target).map(|e| e.time)
    }
}

/// S0(t) = exp(-H0(t)) plus a flag marking extrapolation beyond the table.
pub fn baseline_survival(table: &BaselineHazardTable, t: f64) -> (f64, bool) {
    ((-table.cumulative_at(t)).exp(), table.beyond_horizon(t))
}

/// Breslow estimate of the baseline cumulative hazard at `beta`:
/// Delta H0(t_i) = d_i / sum_{j in R(t_i)} exp(beta' X_j).
pub fn breslow_baseline(beta: &[f64], index: &RiskSetIndex, cohort: &Cohort) -> BaselineHazardTable {
    check_beta(beta, cohort.covariate_names().len());
    let records = cohort.records();
    let beta_v = DVector::from_column_slice(beta);

    let eta: Vec<f64> = index
        .order
        .iter()
        .map(|&idx| {
            records[idx]
                .covariates
                .values()
                .iter()
                .zip(beta_v.iter())
                .map(|(x, b)| x * b)
                .sum()
        })
        .collect();
    let shift = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut pairs = Vec::with_capacity(index.n_distinct());
    let mut s0 = 0.0;
    let mut cursor = eta.len();
    for i in (0..index.n_distinct()).rev() {
        for k in index.risk_start[i]..cursor {
            s0 += (eta[k] - shift).exp();
        }
        cursor = cursor.min(index.risk_start[i]);
        let log_denominator = shift + s0.ln();
        let increment = (index.events_at[i] as f64) * (-log_denominator).exp();
        pairs.push((index.distinct_event_times[i], increment));
    }
    pairs.reverse();
    BaselineHazardTable::from_increments_unchecked(pairs)
}

/// A fitted Cox model: named coefficients plus the Breslow baseline table.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedCoxModel {
    pub covariate_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub baseline: BaselineHazardTable,
    pub converged: bool,
    pub final_log_partial_likelihood: f64,
    pub iterations: usize,
    /// Training covariate means, kept as a diagnostic; never used in
    /// prediction.
    pub covariate_means: Option<Vec<f64>>,
    /// sqrt(diag((-H)^-1)) at the optimum; a diagnostic, not inference.
    pub standard_errors: Option<Vec<f64>>,
    /// Display metadata only; never used in computation.
    pub time_unit: Option<String>,
}

impl FittedCoxModel {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.covariate_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }

    /// beta' x for covariates already in model order.
    pub fn log_relative_risk_aligned(&self, values: &[f64]) -> f64 {
        self.coefficients.iter().zip(values).map(|(b, x)| b * x).sum()
    }

    /// beta' x with `profile` matched to the model by name.
    pub fn log_relative_risk(&self, profile: &CovariateVector) -> Result<f64> {
        let values = profile.aligned_to(&self.covariate_names)?;
        Ok(self.log_relative_risk_aligned(&values))
    }
}

/// Fit a Cox model by damped Newton on the log partial likelihood, then
/// tabulate the Breslow baseline at the estimate.
///
/// Requires at least one event and at least one non-constant covariate.
/// Monotone likelihood (a covariate perfectly ordering the events) surfaces
/// as a non-convergence error with a diverging iterate.
pub fn fit_cox(cohort: &Cohort, config: &FitConfig) -> Result<FittedCoxModel> {
    let p = cohort.covariate_names().len();
    if p == 0 {
        return Err(Error::DegenerateData(
            "cox fit needs at least one covariate; the baseline absorbs the intercept".to_string(),
        ));
    }
    for (j, name) in cohort.covariate_names().iter().enumerate() {
        let first = cohort.records()[0].covariates.values()[j];
        if cohort.records().iter().all(|r| r.covariates.values()[j] == first) {
            return Err(Error::DegenerateData(format!(
                "constant covariate '{name}' cannot enter a cox fit"
            )));
        }
    }
    let index = build_risk_sets(cohort)?;
    let likelihood = PartialLikelihood::new(&index, cohort);

    let outcome = maximize(&likelihood, config);
    let beta = outcome.beta.as_slice().to_vec();
    let baseline = breslow_baseline(&beta, &index, cohort);

    let n = cohort.len() as f64;
    let covariate_means = (0..p)
        .map(|j| cohort.records().iter().map(|r| r.covariates.values()[j]).sum::<f64>() / n)
        .collect();

    let standard_errors = if outcome.converged {
        let (_, _, hessian) = likelihood.value_grad_hessian(&outcome.beta);
        (-hessian)
            .cholesky()
            .map(|c| c.inverse())
            .map(|cov| (0..p).map(|j| cov[(j, j)].sqrt()).collect())
    } else {
        None
    };

    let model = FittedCoxModel {
        covariate_names: cohort.covariate_names().to_vec(),
        coefficients: beta,
        baseline,
        converged: outcome.converged,
        final_log_partial_likelihood: outcome.value,
        iterations: outcome.iterations,
        covariate_means: Some(covariate_means),
        standard_errors,
        time_unit: None,
    };
    if model.converged {
        Ok(model)
    } else {
        Err(Error::NonConvergedCox(Box::new(model)))
    }
}
