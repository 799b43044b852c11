//! Exponential-family rewrites of the Bernoulli, Exponential, and Poisson
//! distributions: f(y; eta) = b(y) exp(eta T(y) - a(eta)).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpFamily {
    Bernoulli,
    Exponential,
    Poisson,
}

/// One evaluation of the canonical form at a parameter/observation pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFamilyForm {
    /// Natural (canonical) parameter eta.
    pub natural_param: f64,
    /// Log-partition a(eta).
    pub log_partition: f64,
    /// ln b(y); zero except for Poisson where b(y) = 1/y!.
    pub base_measure_log: f64,
    /// Sufficient statistic T(y); identically y for these three families.
    pub sufficient_stat: f64,
}

impl ExpFamilyForm {
    /// ln b(y) + eta T(y) - a(eta).
    pub fn log_density(&self) -> f64 {
        self.base_measure_log + self.natural_param * self.sufficient_stat - self.log_partition
    }

    /// b(y) exp(eta T(y) - a(eta)).
    pub fn density(&self) -> f64 {
        self.log_density().exp()
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Rewrite `family` with parameter `param` at observation `y` into canonical
/// form.
///
/// Parameters must be in-domain (0 < p < 1, lambda > 0) and `y` in the
/// family's support.
pub fn exp_family_form(family: ExpFamily, param: f64, y: f64) -> Result<ExpFamilyForm> {
    match family {
        ExpFamily::Bernoulli => {
            if !param.is_finite() || param <= 0.0 || param >= 1.0 {
                return Err(Error::Domain(format!("bernoulli p must be in (0,1), got {param}")));
            }
            if y != 0.0 && y != 1.0 {
                return Err(Error::Domain(format!("bernoulli support is {{0,1}}, got {y}")));
            }
            let eta = (param / (1.0 - param)).ln();
            Ok(ExpFamilyForm {
                natural_param: eta,
                log_partition: softplus(eta),
                base_measure_log: 0.0,
                sufficient_stat: y,
            })
        }
        ExpFamily::Exponential => {
            if !param.is_finite() || param <= 0.0 {
                return Err(Error::Domain(format!("exponential rate must be > 0, got {param}")));
            }
            if !y.is_finite() || y < 0.0 {
                return Err(Error::Domain(format!("exponential support is y >= 0, got {y}")));
            }
            // a(eta) = -ln(-eta), so that exp(eta y - a) = lambda exp(-lambda y).
            let eta = -param;
            Ok(ExpFamilyForm {
                natural_param: eta,
                log_partition: -(-eta).ln(),
                base_measure_log: 0.0,
                sufficient_stat: y,
            })
        }
        ExpFamily::Poisson => {
            if !param.is_finite() || param <= 0.0 {
                return Err(Error::Domain(format!("poisson rate must be > 0, got {param}")));
            }
            if !y.is_finite() || y < 0.0 || y.fract() != 0.0 {
                return Err(Error::Domain(format!(
                    "poisson support is nonnegative integers, got {y}"
                )));
            }
            let eta = param.ln();
            Ok(ExpFamilyForm {
                natural_param: eta,
                log_partition: eta.exp(),
                base_measure_log: -statrs::function::gamma::ln_gamma(y + 1.0),
                sufficient_stat: y,
            })
        }
    }
}
