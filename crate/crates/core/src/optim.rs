//! Damped Newton maximization shared by the GLM and Cox fitters.
//!
//! All likelihoods in this crate are concave, so plain Newton steps with
//! step-halving are enough: a step is only accepted if it does not decrease
//! the objective, which makes the objective non-decreasing across accepted
//! iterations. Convergence is declared on relative objective change.

use nalgebra::{DMatrix, DVector};

/// Fit controls shared by every maximum-likelihood fitter.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Relative log-likelihood change below which the fit converged.
    pub tol: f64,
    /// Iteration cap; exceeding it is a non-convergence diagnostic.
    pub max_iter: usize,
    /// Tie convention for the Cox partial likelihood. Only Breslow is
    /// supported; the field pins the convention into fit artifacts.
    pub ties: TieMethod,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { tol: 1e-8, max_iter: 100, ties: TieMethod::Breslow }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieMethod {
    Breslow,
}

impl TieMethod {
    pub fn as_str(&self) -> &'static str {
        "breslow"
    }
}

const MAX_HALVINGS: u32 = 30;

/// A twice-differentiable concave objective to maximize over beta.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, beta: &DVector<f64>) -> f64;
    /// Value, gradient, and Hessian at `beta`.
    fn value_grad_hessian(&self, beta: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>);
}

/// Outcome of a Newton run; `converged == false` still carries the last
/// iterate for diagnostics.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub beta: DVector<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximize `objective` from beta = 0 with damped Newton steps.
pub fn maximize(objective: &impl Objective, config: &FitConfig) -> NewtonOutcome {
    let mut beta = DVector::zeros(objective.dim());
    let mut value = objective.value(&beta);
    let mut last_step_norm: Option<f64> = None;

    for iteration in 1..=config.max_iter {
        let (_, gradient, hessian) = objective.value_grad_hessian(&beta);

        // When curvature degenerates or no uphill step exists, decide between
        // "at the optimum" and "diverging". A vanishing gradient alone is not
        // enough: with separation/monotone likelihood the gradient underflows
        // while the iterates are still moving, so the last step must have
        // been small too.
        let stalled_converged = |g: &DVector<f64>, b: &DVector<f64>, v: f64| {
            g.norm() <= 1e-8 * (1.0 + v.abs())
                && last_step_norm.map_or(true, |s| s <= 1e-4 * (1.0 + b.norm()))
        };

        let direction = match solve_newton_direction(&hessian, &gradient) {
            Some(d) => d,
            None => {
                let converged = stalled_converged(&gradient, &beta, value);
                return NewtonOutcome { beta, value, iterations: iteration, converged };
            }
        };

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate = &beta + &direction * step;
            let candidate_value = objective.value(&candidate);
            if candidate_value.is_finite() && candidate_value >= value {
                accepted = Some((candidate, candidate_value, step));
                break;
            }
            step *= 0.5;
        }

        let (next_beta, next_value, taken_step) = match accepted {
            Some(triple) => triple,
            None => {
                let converged = stalled_converged(&gradient, &beta, value);
                return NewtonOutcome { beta, value, iterations: iteration, converged };
            }
        };

        let rel_change = (next_value - value).abs() / value.abs().max(1e-8);
        let step_norm = direction.norm() * taken_step;
        beta = next_beta;
        value = next_value;
        last_step_norm = Some(step_norm);
        // Both the objective and the iterate must have stopped moving. A
        // small value change alone is not convergence: near a likelihood
        // supremum at infinity (separation) the value plateaus while the
        // iterate still travels.
        if rel_change < config.tol && step_norm <= 1e-4 * (1.0 + beta.norm()) {
            return NewtonOutcome { beta, value, iterations: iteration, converged: true };
        }
    }

    NewtonOutcome { beta, value, iterations: config.max_iter, converged: false }
}

/// Solve (-H) d = g. Cholesky first (H should be negative definite), LU as
/// a fallback for near-semidefinite cases.
fn solve_newton_direction(hessian: &DMatrix<f64>, gradient: &DVector<f64>) -> Option<DVector<f64>> {
    if hessian.iter().any(|v| !v.is_finite()) || gradient.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let neg_hessian = -hessian;
    if let Some(chol) = neg_hessian.clone().cholesky() {
        let d = chol.solve(gradient);
        if d.iter().all(|v| v.is_finite()) {
            return Some(d);
        }
    }
    let lu = neg_hessian.lu();
    let d = lu.solve(gradient)?;
    if d.iter().all(|v| v.is_finite()) {
        Some(d)
    } else {
        None
    }
}
