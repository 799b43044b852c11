//! Time-to-event modeling library: fixed-interval logistic prediction,
//! Poisson/exponential event-process calculators, Poisson-regression
//! survival models, and a Cox proportional hazards engine, with prediction
//! workflows for risk at chosen times, covariate effect interpretation, and
//! time-to-next-event estimates.
//!
//! The `survival` binary exposes the same functionality as subcommands:
//! `fit`, `predict`, `simulate`, `compare`, `prob`.

pub mod cli;
pub mod coxph;
pub mod dataset;
pub mod distributions;
pub mod error;
pub mod glm;
pub mod optim;
pub mod predict;
pub mod simulate;

pub use error::{Error, Result};
pub use optim::FitConfig;
