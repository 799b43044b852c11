//! Independent oracles shared by the integration suites: central finite
//! differences, Simpson quadrature, and brute-force grid search. These stay
//! free of the implementation paths they are used to check.

#![allow(dead_code)]

use survival::dataset::{Cohort, CovariateVector, SurvivalRecord};

/// Central finite-difference gradient of `f` at `x`.
pub fn central_difference_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut hi = x.to_vec();
            let mut lo = x.to_vec();
            hi[i] += step;
            lo[i] -= step;
            (f(&hi) - f(&lo)) / (2.0 * step)
        })
        .collect()
}

/// Max relative error between an analytic gradient and the FD oracle.
pub fn max_relative_error(analytic: &[f64], reference: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(reference)
        .map(|(a, r)| (a - r).abs() / r.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Composite Simpson integral of `f` over [a, b] with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0 && n >= 2);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Argmax of `f` over the grid lo, lo+step, ..., hi.
pub fn grid_search_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let mut best_x = lo;
    let mut best = f(lo);
    let steps = ((hi - lo) / step).round() as usize;
    for i in 1..=steps {
        let x = lo + i as f64 * step;
        let v = f(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    best_x
}

pub fn named(names: &[&str], values: &[f64]) -> CovariateVector {
    CovariateVector::new(names.iter().map(|s| s.to_string()).collect(), values.to_vec()).unwrap()
}

/// Cohort over one covariate `x` from (time, event, x) rows.
pub fn cohort_1d(rows: &[(f64, bool, f64)]) -> Cohort {
    let records = rows
        .iter()
        .enumerate()
        .map(|(i, &(t, e, x))| {
            SurvivalRecord::new(format!("s{i}"), t, e, named(&["x"], &[x])).unwrap()
        })
        .collect();
    Cohort::new(records).unwrap()
}
