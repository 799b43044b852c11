//! Closed-form Poisson-process and exponential-distribution calculators for a
//! constant event rate.
//!
//! All functions are pure and answer the two basic questions about a process
//! with constant rate `lambda` over a horizon `t`: how many events land in
//! `[0, t]` (Poisson counts) and how long until the first event (exponential
//! waiting time). `P(N_t >= 1)` and the exponential CDF are the same number;
//! `survival_const_rate` and the zero-count pmf are kept bit-identical.

use crate::error::{Error, Result};

/// Constant event rate, events per unit of analysis time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRate {
    lambda: f64,
}

impl ConstantRate {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::Domain(format!(
                "rate must be finite and > 0, got {lambda}"
            )));
        }
        Ok(ConstantRate { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Nonnegative length of the observation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    t: f64,
}

impl Horizon {
    pub fn new(t: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!(
                "horizon must be finite and >= 0, got {t}"
            )));
        }
        Ok(Horizon { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Exact factorials stay representable in f64 up to 20!; beyond that the pmf
/// switches to the log-gamma path.
const MAX_EXACT_FACTORIAL_K: u64 = 20;

fn factorial_exact(k: u64) -> f64 {
    let mut acc = 1.0_f64;
    for i in 2..=k {
        acc *= i as f64;
    }
    acc
}

/// P(N_t = k) = (t lambda)^k exp(-lambda t) / k!
///
/// The empty window is total: t = 0 gives 1 at k = 0 (0^0 = 1 here) and 0
/// for k > 0.
pub fn poisson_pmf(rate: ConstantRate, horizon: Horizon, k: u64) -> f64 {
    let mean = rate.lambda * horizon.t;
    if k <= MAX_EXACT_FACTORIAL_K {
        let pow = if k == 0 { 1.0 } else { mean.powi(k as i32) };
        pow * (-mean).exp() / factorial_exact(k)
    } else {
        if mean == 0.0 {
            return 0.0;
        }
        let log_p = k as f64 * mean.ln() - mean - statrs::function::gamma::ln_gamma(k as f64 + 1.0);
        log_p.exp()
    }
}

/// P(N_t = 1) = t lambda exp(-lambda t).
pub fn prob_exactly_one(rate: ConstantRate, horizon: Horizon) -> f64 {
    poisson_pmf(rate, horizon, 1)
}

/// P(N_t >= 1) = 1 - exp(-lambda t); also the exponential CDF P(T <= t).
pub fn prob_at_least_one(rate: ConstantRate, horizon: Horizon) -> f64 {
    1.0 - (-rate.lambda * horizon.t).exp()
}

/// S(t) = P(T >= t) = P(N_t = 0) = exp(-lambda t).
pub fn survival_const_rate(rate: ConstantRate, horizon: Horizon) -> f64 {
    (-rate.lambda * horizon.t).exp()
}

/// Exponential waiting-time density lambda exp(-lambda t) for t >= 0.
pub fn exponential_pdf(rate: ConstantRate, horizon: Horizon) -> f64 {
    rate.lambda * (-rate.lambda * horizon.t).exp()
}
