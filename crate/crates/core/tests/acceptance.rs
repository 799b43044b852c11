//! Acceptance suite. Each test prints one PASS/FAIL line and enforces its
//! runtime budget. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use survival::coxph::{
    baseline_survival, breslow_baseline, build_risk_sets, fit_cox, log_partial_likelihood,
    partial_likelihood_gradient, BaselineHazardTable, FittedCoxModel,
};
use survival::dataset::{BinaryCohort, BinaryRecord, Cohort, CovariateVector, SurvivalRecord};
use survival::distributions::{
    poisson_pmf, prob_at_least_one, survival_const_rate, ConstantRate, Horizon,
};
use survival::glm::{
    exp_family_form, fit_poisson_survival, logistic_gradient, logistic_log_likelihood,
    poisson_survival_gradient, poisson_survival_log_likelihood, ExpFamily, FittedGlmModel,
    GlmFamily,
};
use survival::predict::{
    cox_poisson_equivalence_report, hazard_ratios, survival_at, target_cumulative_hazard,
    time_to_threshold, SurvivalModel,
};
use survival::simulate::{simulate_cohort, BaselineShape, CovariateDistribution, SimulationSpec};
use survival::FitConfig;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !($cond) {
            return Err(format!($($arg)+));
        }
    };
}

fn criterion(name: &str, limit: Duration, run: impl FnOnce() -> Result<(), String>) {
    let start = Instant::now();
    let result = run();
    let elapsed = start.elapsed();
    match &result {
        Ok(()) => println!("acceptance {name}: PASS ({elapsed:.2?})"),
        Err(msg) => println!("acceptance {name}: FAIL ({elapsed:.2?}): {msg}"),
    }
    if let Err(msg) = result {
        panic!("{name}: {msg}");
    }
    assert!(
        elapsed <= limit,
        "{name} exceeded its runtime budget: {elapsed:?} > {limit:?}"
    );
}

fn paper_baseline() -> BaselineHazardTable {
    // Cumulative H0 over months 1..6: 0.10, 0.25, 0.40, 0.60, 0.85, 1.10.
    BaselineHazardTable::from_increments([
        (1.0, 0.10),
        (2.0, 0.15),
        (3.0, 0.15),
        (4.0, 0.20),
        (5.0, 0.25),
        (6.0, 0.25),
    ])
    .unwrap()
}

fn synthetic_cox(names: &[&str], coefs: &[f64], baseline: BaselineHazardTable) -> FittedCoxModel {
    FittedCoxModel {
        covariate_names: names.iter().map(|s| s.to_string()).collect(),
        coefficients: coefs.to_vec(),
        baseline,
        converged: true,
        final_log_partial_likelihood: 0.0,
        iterations: 0,
        covariate_means: None,
        standard_errors: None,
        time_unit: Some("months".to_string()),
    }
}

#[test]
fn c1_paper_worked_example() {
    criterion("C1 paper worked example", Duration::from_secs(1), || {
        let model = synthetic_cox(&["x"], &[2.0], paper_baseline());
        let expected = [0.10, 0.25, 0.40, 0.60, 0.85, 1.10];
        for (entry, want) in model.baseline.entries().iter().zip(expected) {
            ensure!(
                (entry.cumulative - want).abs() < 1e-12,
                "cumulative at t={} is {}, want {}",
                entry.time,
                entry.cumulative,
                want
            );
        }
        let profile = common::named(&["x"], &[1.0]);
        let target = target_cumulative_hazard(0.5, model.log_relative_risk(&profile).unwrap());
        ensure!(
            (target - 0.094).abs() <= 1e-3,
            "target hazard {target} not within 0.094 +- 0.001"
        );
        let estimate = time_to_threshold(SurvivalModel::Cox(&model), &profile, 0.5)
            .map_err(|e| e.to_string())?;
        ensure!(
            estimate.time == Some(1.0),
            "median time {:?}, want 1 month",
            estimate.time
        );
        // Sanity on the same table: S0(6) = exp(-1.10).
        let (s6, _) = baseline_survival(&model.baseline, 6.0);
        ensure!((s6 - 0.3328710836980795).abs() < 1e-12, "S0(6) = {s6}");
        Ok(())
    });
}

#[test]
fn c2_hazard_ratio_interpretation() {
    criterion("C2 hazard-ratio interpretation", Duration::from_secs(1), || {
        let model = synthetic_cox(&["up", "down"], &[0.5, -0.5], paper_baseline());
        let ratios = hazard_ratios(&model);
        ensure!(
            (ratios[0].hazard_ratio - 1.6487).abs() <= 1e-3,
            "exp(0.5) reported {}",
            ratios[0].hazard_ratio
        );
        ensure!(
            (ratios[1].hazard_ratio - 0.6065).abs() <= 1e-3,
            "exp(-0.5) reported {}",
            ratios[1].hazard_ratio
        );
        ensure!(
            ratios[0].percent_change.round() == 65.0,
            "percent change {} rounds to {}, want 65",
            ratios[0].percent_change,
            ratios[0].percent_change.round()
        );
        ensure!(
            ratios[1].percent_change.round() == -39.0,
            "percent change {} rounds to {}, want -39",
            ratios[1].percent_change,
            ratios[1].percent_change.round()
        );
        Ok(())
    });
}

#[test]
fn c3_distribution_identities() {
    criterion("C3 distribution identities", Duration::from_secs(1), || {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..100 {
            let lambda = 10.0 * (1.0 - rng.gen::<f64>());
            let t = 10.0 * (1.0 - rng.gen::<f64>());
            let rate = ConstantRate::new(lambda).unwrap();
            let horizon = Horizon::new(t).unwrap();

            let p_none = poisson_pmf(rate, horizon, 0);
            let p_any = prob_at_least_one(rate, horizon);
            ensure!(
                (p_any + p_none - 1.0).abs() < 1e-15,
                "complement identity off at lambda={lambda} t={t}: {}",
                (p_any + p_none - 1.0).abs()
            );

            let s = survival_const_rate(rate, horizon);
            ensure!(
                s.to_bits() == p_none.to_bits(),
                "survival != pmf(0) at lambda={lambda} t={t}"
            );

            let total: f64 = (0..=200).map(|k| poisson_pmf(rate, horizon, k)).sum();
            ensure!(
                (total - 1.0).abs() < 1e-10,
                "pmf normalization off at lambda={lambda} t={t}: sum={total}"
            );
        }
        Ok(())
    });
}

#[test]
fn c4_exponential_family_reconstruction() {
    criterion("C4 exponential-family reconstruction", Duration::from_secs(1), || {
        // Bernoulli: 50 parameters x {0,1} = 100 points.
        for i in 1..=50 {
            let p = i as f64 / 51.0;
            for y in [0.0, 1.0] {
                let form = exp_family_form(ExpFamily::Bernoulli, p, y).unwrap();
                let standard = if y == 1.0 { p } else { 1.0 - p };
                ensure!(
                    (form.density() - standard).abs() < 1e-12,
                    "bernoulli p={p} y={y}: {} vs {}",
                    form.density(),
                    standard
                );
            }
        }
        // Exponential: 10 rates x 10 support points = 100 points.
        for i in 1..=10 {
            let lambda = i as f64 * 0.37;
            for j in 0..10 {
                let y = j as f64 * 0.8;
                let form = exp_family_form(ExpFamily::Exponential, lambda, y).unwrap();
                let standard = lambda * (-lambda * y).exp();
                ensure!(
                    (form.density() - standard).abs() < 1e-12,
                    "exponential lambda={lambda} y={y}: {} vs {}",
                    form.density(),
                    standard
                );
            }
        }
        // Poisson: 10 rates x counts 0..9 = 100 points.
        for i in 1..=10 {
            let lambda = i as f64 * 0.63;
            for k in 0..10u32 {
                let form = exp_family_form(ExpFamily::Poisson, lambda, k as f64).unwrap();
                let factorial: f64 = (1..=k).map(|v| v as f64).product();
                let standard = lambda.powi(k as i32) * (-lambda).exp() / factorial;
                ensure!(
                    (form.density() - standard).abs() < 1e-12,
                    "poisson lambda={lambda} k={k}: {} vs {}",
                    form.density(),
                    standard
                );
            }
        }
        Ok(())
    });
}

fn binary_cohort_for_gradients(seed: u64, n: usize) -> BinaryCohort {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|i| {
            let x1: f64 = StandardNormal.sample(&mut rng);
            let x2: f64 = StandardNormal.sample(&mut rng);
            let p = 1.0 / (1.0 + (-(-0.3 + 0.6 * x1 - 0.4 * x2)).exp());
            let y = (rng.gen::<f64>() < p) as u8;
            BinaryRecord::new(format!("s{i}"), y, common::named(&["x1", "x2"], &[x1, x2])).unwrap()
        })
        .collect();
    BinaryCohort::new(records).unwrap()
}

fn survival_cohort_for_gradients(seed: u64, n: usize) -> Cohort {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|i| {
            let x1: f64 = StandardNormal.sample(&mut rng);
            let x2: f64 = StandardNormal.sample(&mut rng);
            let rate = 0.4 * (0.5 * x1 - 0.3 * x2).exp();
            let t = -(1.0 - rng.gen::<f64>()).ln() / rate;
            let censor = 6.0 * rng.gen::<f64>();
            let (time, event) = if t <= censor { (t, true) } else { (censor, false) };
            SurvivalRecord::new(format!("s{i}"), time, event, common::named(&["x1", "x2"], &[x1, x2]))
                .unwrap()
        })
        .collect();
    Cohort::new(records).unwrap()
}

#[test]
fn c5_gradient_oracles() {
    criterion("C5 gradient oracles", Duration::from_secs(10), || {
        let step = 1e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let draw_beta = |dim: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };

        let binary = binary_cohort_for_gradients(550, 80);
        for draw in 0..20 {
            let beta = draw_beta(3, &mut rng);
            let analytic = logistic_gradient(&binary, &beta);
            let oracle = common::central_difference_gradient(
                |b| logistic_log_likelihood(&binary, b),
                &beta,
                step,
            );
            let err = common::max_relative_error(&analytic, &oracle);
            ensure!(err < 1e-5, "logistic gradient draw {draw}: relative error {err}");
        }

        let cohort = survival_cohort_for_gradients(551, 80);
        for draw in 0..20 {
            let beta = draw_beta(3, &mut rng);
            let analytic = poisson_survival_gradient(&cohort, &beta);
            let oracle = common::central_difference_gradient(
                |b| poisson_survival_log_likelihood(&cohort, b),
                &beta,
                step,
            );
            let err = common::max_relative_error(&analytic, &oracle);
            ensure!(err < 1e-5, "poisson gradient draw {draw}: relative error {err}");
        }

        let index = build_risk_sets(&cohort).unwrap();
        for draw in 0..20 {
            let beta = draw_beta(2, &mut rng);
            let analytic = partial_likelihood_gradient(&beta, &index, &cohort);
            let oracle = common::central_difference_gradient(
                |b| log_partial_likelihood(b, &index, &cohort),
                &beta,
                step,
            );
            let err = common::max_relative_error(&analytic, &oracle);
            ensure!(err < 1e-5, "cox gradient draw {draw}: relative error {err}");
        }
        Ok(())
    });
}

#[test]
fn c6_brute_force_cox_oracle() {
    criterion("C6 brute-force cox oracle", Duration::from_secs(5), || {
        let cohort = common::cohort_1d(&[
            (1.0, true, 0.8),
            (2.0, true, -0.5),
            (3.0, true, 0.6),
            (4.0, true, -0.9),
        ]);
        let index = build_risk_sets(&cohort).unwrap();

        let grid_estimate = common::grid_search_max(
            |b| log_partial_likelihood(&[b], &index, &cohort),
            -3.0,
            3.0,
            1e-3,
        );
        let model = fit_cox(&cohort, &FitConfig::default()).map_err(|e| e.to_string())?;
        ensure!(
            (model.coefficients[0] - grid_estimate).abs() <= 2e-3,
            "fit {} vs grid {}",
            model.coefficients[0],
            grid_estimate
        );

        let null_value = log_partial_likelihood(&[0.0], &index, &cohort);
        let closed_form: f64 = -(0..index.n_distinct())
            .map(|i| index.events_at(i) as f64 * (index.at_risk(i).len() as f64).ln())
            .sum::<f64>();
        ensure!(
            (null_value - closed_form).abs() < 1e-12,
            "null value {null_value} vs closed form {closed_form}"
        );
        Ok(())
    });
}

fn recovery_spec(seed: u64) -> SimulationSpec {
    SimulationSpec {
        n_subjects: 5000,
        true_beta: vec![0.5, -0.3],
        covariates: vec![
            CovariateDistribution::StandardNormal,
            CovariateDistribution::StandardNormal,
        ],
        baseline: BaselineShape::Constant,
        lambda0: 0.1,
        censoring_target: 0.2,
        seed,
    }
}

#[test]
fn c7_parameter_recovery() {
    criterion("C7 parameter recovery", Duration::from_secs(60), || {
        let cohort = simulate_cohort(&recovery_spec(2026)).unwrap();

        let cox = fit_cox(&cohort, &FitConfig::default()).map_err(|e| e.to_string())?;
        ensure!(
            (cox.coefficients[0] - 0.5).abs() <= 0.1,
            "cox beta1 = {}",
            cox.coefficients[0]
        );
        ensure!(
            (cox.coefficients[1] + 0.3).abs() <= 0.1,
            "cox beta2 = {}",
            cox.coefficients[1]
        );

        let glm = fit_poisson_survival(&cohort, &FitConfig::default()).map_err(|e| e.to_string())?;
        ensure!(
            (glm.coefficients[0] - 0.5).abs() <= 0.1,
            "poisson beta1 = {}",
            glm.coefficients[0]
        );
        ensure!(
            (glm.coefficients[1] + 0.3).abs() <= 0.1,
            "poisson beta2 = {}",
            glm.coefficients[1]
        );
        ensure!(
            (glm.intercept - 0.1f64.ln()).abs() <= 0.1,
            "poisson intercept = {} vs ln 0.1 = {}",
            glm.intercept,
            0.1f64.ln()
        );
        Ok(())
    });
}

#[test]
fn c8_constant_baseline_equivalence() {
    criterion("C8 cox-poisson equivalence", Duration::from_secs(60), || {
        let cohort = simulate_cohort(&recovery_spec(515)).unwrap();
        let cox = fit_cox(&cohort, &FitConfig::default()).map_err(|e| e.to_string())?;
        let glm = fit_poisson_survival(&cohort, &FitConfig::default()).map_err(|e| e.to_string())?;

        let first = cox.baseline.first_time();
        let last = cox.baseline.last_time();
        let times: Vec<f64> = (0..50)
            .map(|i| first + (last - first) * i as f64 / 49.0)
            .collect();
        let profiles = [
            common::named(&["x1", "x2"], &[0.0, 0.0]),
            common::named(&["x1", "x2"], &[1.0, -1.0]),
            common::named(&["x1", "x2"], &[-1.0, 1.0]),
            common::named(&["x1", "x2"], &[0.5, 0.5]),
        ];
        let report = cox_poisson_equivalence_report(&cox, &glm, &profiles, &times)
            .map_err(|e| e.to_string())?;
        ensure!(
            report.max_divergence < 0.05,
            "max divergence {} over [{first}, {last}]",
            report.max_divergence
        );

        // Forced identity: H0(t) = t (lambda0 = 1) with shared beta makes
        // the curves coincide.
        let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
        let mut pairs = Vec::new();
        let mut prev = 0.0;
        for &t in &grid {
            pairs.push((t, t - prev));
            prev = t;
        }
        let forced = FittedCoxModel {
            covariate_names: glm.covariate_names.clone(),
            coefficients: glm.coefficients.clone(),
            baseline: BaselineHazardTable::from_increments(pairs).unwrap(),
            converged: true,
            final_log_partial_likelihood: 0.0,
            iterations: 0,
            covariate_means: None,
            standard_errors: None,
            time_unit: None,
        };
        let shared_glm = FittedGlmModel {
            family: GlmFamily::PoissonSurvival,
            covariate_names: glm.covariate_names.clone(),
            intercept: 0.0,
            coefficients: glm.coefficients.clone(),
            converged: true,
            final_log_likelihood: 0.0,
            iterations: 0,
            time_unit: None,
        };
        let identity = cox_poisson_equivalence_report(&forced, &shared_glm, &profiles, &grid)
            .map_err(|e| e.to_string())?;
        ensure!(
            identity.max_divergence <= 1e-15,
            "forced-identity divergence {}",
            identity.max_divergence
        );
        Ok(())
    });
}

#[test]
fn c9_property_suites() {
    criterion("C9 property suites", Duration::from_secs(60), || {
        let config = FitConfig::default();
        for round in 0..50u64 {
            let spec = SimulationSpec {
                n_subjects: 30 + (round as usize * 7) % 41,
                true_beta: vec![0.4, -0.2],
                covariates: vec![
                    CovariateDistribution::StandardNormal,
                    CovariateDistribution::Bernoulli { p: 0.5 },
                ],
                baseline: BaselineShape::Constant,
                lambda0: 0.5,
                censoring_target: 0.25,
                seed: 9000 + round,
            };
            let cohort = simulate_cohort(&spec).unwrap();
            let model = match fit_cox(&cohort, &config) {
                Ok(m) => m,
                Err(e) => return Err(format!("round {round}: fit failed: {e}")),
            };
            let beta = model.coefficients.clone();

            // Baseline table strictly increases.
            let entries = model.baseline.entries();
            for pair in entries.windows(2) {
                ensure!(
                    pair[1].cumulative > pair[0].cumulative && pair[1].time > pair[0].time,
                    "round {round}: baseline not strictly increasing"
                );
            }

            // Survival-curve monotonicity along an increasing grid.
            let profile = common::named(&["x1", "x2"], &[0.7, 1.0]);
            let last = model.baseline.last_time();
            let grid: Vec<f64> = (0..30).map(|i| last * i as f64 / 29.0 * 1.2).collect();
            let curve = survival_at(SurvivalModel::Cox(&model), &profile, &grid)
                .map_err(|e| e.to_string())?;
            for pair in curve.windows(2) {
                ensure!(
                    pair[1] <= pair[0] + 1e-15,
                    "round {round}: survival curve increased"
                );
            }

            // Proportionality identity in log(-log) scale.
            let p1 = common::named(&["x1", "x2"], &[1.3, 0.0]);
            let p2 = common::named(&["x1", "x2"], &[-0.4, 1.0]);
            let t_mid = model.baseline.first_time().max(0.5 * last);
            let s1 = survival_at(SurvivalModel::Cox(&model), &p1, &[t_mid]).unwrap()[0];
            let s2 = survival_at(SurvivalModel::Cox(&model), &p2, &[t_mid]).unwrap()[0];
            let lhs = (-s1.ln()).ln() - (-s2.ln()).ln();
            let rhs = beta[0] * (1.3 - (-0.4)) + beta[1] * (0.0 - 1.0);
            ensure!(
                (lhs - rhs).abs() < 1e-9,
                "round {round}: proportionality identity off by {}",
                (lhs - rhs).abs()
            );

            // Centering invariance: same beta-hat, increments rescaled by
            // exp(beta' c).
            let shift = [0.9, -1.7];
            let centered = Cohort::new(
                cohort
                    .records()
                    .iter()
                    .map(|r| {
                        let values: Vec<f64> = r
                            .covariates
                            .values()
                            .iter()
                            .zip(&shift)
                            .map(|(v, c)| v - c)
                            .collect();
                        SurvivalRecord::new(
                            r.subject_id.clone(),
                            r.time,
                            r.event,
                            CovariateVector::new(r.covariates.names().to_vec(), values).unwrap(),
                        )
                        .unwrap()
                    })
                    .collect(),
            )
            .unwrap();
            let centered_model = match fit_cox(&centered, &config) {
                Ok(m) => m,
                Err(e) => return Err(format!("round {round}: centered fit failed: {e}")),
            };
            for j in 0..2 {
                ensure!(
                    (centered_model.coefficients[j] - beta[j]).abs() < 1e-4,
                    "round {round}: centering changed beta[{j}]: {} vs {}",
                    centered_model.coefficients[j],
                    beta[j]
                );
            }
            let index = build_risk_sets(&cohort).unwrap();
            let centered_index = build_risk_sets(&centered).unwrap();
            let base = breslow_baseline(&beta, &index, &cohort);
            let base_centered = breslow_baseline(&beta, &centered_index, &centered);
            let scale = (beta[0] * shift[0] + beta[1] * shift[1]).exp();
            for (a, b) in base.entries().iter().zip(base_centered.entries()) {
                ensure!(
                    (b.increment - a.increment * scale).abs() <= 1e-12 * scale.max(1.0),
                    "round {round}: increment rescale off at t={}",
                    a.time
                );
            }

            // Time rescaling leaves the partial likelihood unchanged.
            let rescaled = Cohort::new(
                cohort
                    .records()
                    .iter()
                    .map(|r| {
                        SurvivalRecord::new(
                            r.subject_id.clone(),
                            r.time.powf(1.3) + r.time,
                            r.event,
                            r.covariates.clone(),
                        )
                        .unwrap()
                    })
                    .collect(),
            )
            .unwrap();
            let rescaled_index = build_risk_sets(&rescaled).unwrap();
            let a = log_partial_likelihood(&beta, &index, &cohort);
            let b = log_partial_likelihood(&beta, &rescaled_index, &rescaled);
            ensure!(
                a.to_bits() == b.to_bits(),
                "round {round}: time rescaling changed the partial likelihood"
            );
        }
        Ok(())
    });
}
