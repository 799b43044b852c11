//! Command-line entry point: `fit`, `predict`, `simulate`, `compare`,
//! `prob`.
//!
//! Exit codes are a stable scripting contract: 0 success, 2 input error,
//! 3 numerical non-convergence (the model artifact is still written with
//! `converged: false`). Outputs are deterministic given identical inputs
//! and seeds. Fit controls resolve as flags > JSON config file > defaults.

pub mod artifact;
mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dataset::{
    load_binary_csv, load_survival_csv, write_survival_csv, BinarySchema, Cohort, CovariateVector,
    SurvivalSchema,
};
use crate::distributions::{
    exponential_pdf, poisson_pmf, prob_at_least_one, prob_exactly_one, survival_const_rate,
    ConstantRate, Horizon,
};
use crate::error::{Error, Result};
use crate::optim::FitConfig;
use crate::predict::{
    cox_poisson_equivalence_report, hazard_ratios, survival_at, time_to_threshold, SurvivalModel,
};
use crate::simulate::{simulate_cohort, BaselineShape, CovariateDistribution, SimulationSpec};
use artifact::LoadedModel;

#[derive(Parser)]
#[command(
    name = "survival",
    version,
    about = "Time-to-event modeling: Cox PH and GLM fitting, prediction, simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a cohort CSV and write a model JSON artifact.
    Fit {
        #[command(subcommand)]
        model: FitModel,
    },
    /// Evaluate a fitted model: survival at times, median time, hazard ratios.
    Predict(PredictArgs),
    /// Generate a synthetic cohort under known proportional-hazards truth.
    Simulate(SimulateArgs),
    /// Compare Cox and Poisson-survival curves fitted on the same cohort.
    Compare(CompareArgs),
    /// Constant-rate event-process probabilities.
    Prob {
        #[command(subcommand)]
        question: ProbCommand,
    },
}

#[derive(Subcommand)]
enum FitModel {
    /// Cox proportional hazards (Breslow ties).
    Cox(SurvivalFitArgs),
    /// Poisson-regression survival model S(t|X) = exp(-t exp(b0 + b'x)).
    Poisson(SurvivalFitArgs),
    /// Logistic regression on a binary outcome.
    Logistic(LogisticFitArgs),
}

#[derive(Args)]
struct SurvivalFitArgs {
    /// Cohort CSV path.
    #[arg(long)]
    data: PathBuf,
    /// Follow-up time column.
    #[arg(long, default_value = "time")]
    time: String,
    /// Event indicator column (0/1/true/false).
    #[arg(long, default_value = "event")]
    event: String,
    /// Comma-separated covariate columns.
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
    /// Subject id column; row numbers are used when absent.
    #[arg(long)]
    id: Option<String>,
    #[command(flatten)]
    fit: FitFlags,
    /// Time unit recorded in the artifact (metadata only).
    #[arg(long)]
    time_unit: Option<String>,
    /// Output model JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LogisticFitArgs {
    #[arg(long)]
    data: PathBuf,
    /// Binary outcome column (0/1/true/false).
    #[arg(long, default_value = "outcome")]
    outcome: String,
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
    #[arg(long)]
    id: Option<String>,
    #[command(flatten)]
    fit: FitFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitFlags {
    /// Relative log-likelihood convergence tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Newton iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// JSON file with {"tol": .., "max_iter": ..}; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
struct FileConfig {
    tol: Option<f64>,
    max_iter: Option<usize>,
}

impl FitFlags {
    fn resolve(&self) -> Result<FitConfig> {
        let file: FileConfig = match &self.config {
            Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            None => FileConfig::default(),
        };
        let defaults = FitConfig::default();
        let config = FitConfig {
            tol: self.tol.or(file.tol).unwrap_or(defaults.tol),
            max_iter: self.max_iter.or(file.max_iter).unwrap_or(defaults.max_iter),
            ties: defaults.ties,
        };
        if !(config.tol > 0.0) {
            return Err(Error::validation(format!("tol must be > 0, got {}", config.tol)));
        }
        if config.max_iter == 0 {
            return Err(Error::validation("max_iter must be >= 1"));
        }
        Ok(config)
    }
}

#[derive(Args)]
struct PredictArgs {
    /// Fitted model JSON artifact.
    #[arg(long)]
    model: PathBuf,
    /// Covariate profile as name=value pairs, e.g. --profile age=70,gait=1.
    /// Repeatable.
    #[arg(long = "profile")]
    profiles: Vec<String>,
    /// CSV of profiles: one covariate column per model covariate, optional
    /// `id` column for labels.
    #[arg(long)]
    profile_csv: Option<PathBuf>,
    /// Comma-separated times for survival probabilities.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Report the time at which S(t|X) crosses --threshold.
    #[arg(long)]
    median: bool,
    /// Survival threshold for --median (0.5 = median survival time).
    #[arg(long, default_value_t = crate::predict::MEDIAN_THRESHOLD)]
    threshold: f64,
    /// Report exp(beta) per covariate of a Cox model.
    #[arg(long)]
    hazard_ratios: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON SimulationSpec; flags below override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated true coefficients.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// Per-covariate generators: `normal` or `bernoulli:<p>`.
    #[arg(long, value_delimiter = ',')]
    covariates: Option<Vec<String>>,
    #[arg(long, value_enum)]
    baseline: Option<BaselineArg>,
    /// Weibull shape (with --baseline weibull).
    #[arg(long)]
    shape: Option<f64>,
    #[arg(long)]
    lambda0: Option<f64>,
    /// Target censoring fraction in [0,1).
    #[arg(long)]
    censoring: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output cohort CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Constant,
    Weibull,
}

#[derive(Args)]
struct CompareArgs {
    /// Cox model JSON artifact.
    #[arg(long)]
    cox: PathBuf,
    /// Poisson-survival model JSON artifact.
    #[arg(long)]
    glm: PathBuf,
    /// Time grid; defaults to the Cox baseline table times.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Covariate profiles (name=value pairs); defaults to all-zero.
    #[arg(long = "profile")]
    profiles: Vec<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum ProbCommand {
    /// P(N_t >= 1) = 1 - exp(-rate t).
    AtLeastOne(ProbArgs),
    /// P(N_t = 1) = rate t exp(-rate t).
    ExactlyOne(ProbArgs),
    /// S(t) = P(no events by t) = exp(-rate t).
    Survival(ProbArgs),
    /// Poisson pmf P(N_t = k).
    Pmf(PmfArgs),
    /// Exponential waiting-time density at t.
    Pdf(ProbArgs),
}

#[derive(Args)]
struct ProbArgs {
    /// Events per unit time (> 0).
    #[arg(long)]
    rate: f64,
    /// Horizon (>= 0).
    #[arg(long)]
    t: f64,
}

#[derive(Args)]
struct PmfArgs {
    #[arg(long)]
    rate: f64,
    #[arg(long)]
    t: f64,
    /// Event count.
    #[arg(long)]
    k: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Table,
}

/// Parse arguments, dispatch, and map errors onto the exit-code contract.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                2
            } else {
                3
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit { model } => cmd_fit(model),
        Command::Predict(args) => cmd_predict(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Prob { question } => cmd_prob(question),
    }
}

fn load_cohort(args: &SurvivalFitArgs) -> Result<Cohort> {
    let schema = SurvivalSchema {
        id: args.id.clone(),
        time: args.time.clone(),
        event: args.event.clone(),
        covariates: args.covariates.clone(),
    };
    load_survival_csv(&args.data, &schema)
}

fn cmd_fit(model: FitModel) -> Result<()> {
    match model {
        FitModel::Cox(args) => {
            let cohort = load_cohort(&args)?;
            let config = args.fit.resolve()?;
            let (mut fitted, failure) = match crate::coxph::fit_cox(&cohort, &config) {
                Ok(m) => (m, None),
                Err(Error::NonConvergedCox(m)) => (*m, Some(())),
                Err(e) => return Err(e),
            };
            fitted.time_unit = args.time_unit.clone();
            artifact::write_cox_model(&args.out, &fitted)?;
            println!(
                "fit cox: converged={} iterations={} log_partial_likelihood={:.6}",
                fitted.converged, fitted.iterations, fitted.final_log_partial_likelihood
            );
            println!("wrote {}", args.out.display());
            match failure {
                None => Ok(()),
                Some(()) => Err(Error::NonConvergedCox(Box::new(fitted))),
            }
        }
        FitModel::Poisson(args) => {
            let cohort = load_cohort(&args)?;
            let config = args.fit.resolve()?;
            let (mut fitted, failure) = match crate::glm::fit_poisson_survival(&cohort, &config) {
                Ok(m) => (m, None),
                Err(Error::NonConvergedGlm(m)) => (*m, Some(())),
                Err(e) => return Err(e),
            };
            fitted.time_unit = args.time_unit.clone();
            artifact::write_glm_model(&args.out, &fitted)?;
            println!(
                "fit poisson: converged={} iterations={} log_likelihood={:.6}",
                fitted.converged, fitted.iterations, fitted.final_log_likelihood
            );
            println!("wrote {}", args.out.display());
            match failure {
                None => Ok(()),
                Some(()) => Err(Error::NonConvergedGlm(Box::new(fitted))),
            }
        }
        FitModel::Logistic(args) => {
            let schema = BinarySchema {
                id: args.id.clone(),
                outcome: args.outcome.clone(),
                covariates: args.covariates.clone(),
            };
            let cohort = load_binary_csv(&args.data, &schema)?;
            let config = args.fit.resolve()?;
            let (fitted, failure) = match crate::glm::fit_logistic(&cohort, &config) {
                Ok(m) => (m, None),
                Err(Error::NonConvergedGlm(m)) => (*m, Some(())),
                Err(e) => return Err(e),
            };
            artifact::write_glm_model(&args.out, &fitted)?;
            println!(
                "fit logistic: converged={} iterations={} log_likelihood={:.6}",
                fitted.converged, fitted.iterations, fitted.final_log_likelihood
            );
            println!("wrote {}", args.out.display());
            match failure {
                None => Ok(()),
                Some(()) => Err(Error::NonConvergedGlm(Box::new(fitted))),
            }
        }
    }
}

/// A profile with a display label, covariates as a sorted map for output.
struct LabeledProfile {
    label: String,
    profile: CovariateVector,
}

impl LabeledProfile {
    fn covariate_map(&self) -> BTreeMap<String, f64> {
        self.profile
            .names()
            .iter()
            .cloned()
            .zip(self.profile.values().iter().copied())
            .collect()
    }
}

fn parse_profile_flag(text: &str) -> Result<CovariateVector> {
    let mut names = Vec::new();
    let mut values = Vec::new();
    for pair in text.split(',').filter(|s| !s.is_empty()) {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Schema(format!("profile entry '{pair}' is not name=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Schema(format!("profile value '{value}' is not a number")))?;
        names.push(name.trim().to_string());
        values.push(value);
    }
    CovariateVector::new(names, values)
}

fn profiles_from_csv(path: &Path, covariate_names: &[String]) -> Result<Vec<LabeledProfile>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let id_idx = headers.iter().position(|h| h == "id");
    let indices: Vec<usize> = covariate_names
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("missing column '{name}'")))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let label = id_idx
            .and_then(|idx| row.get(idx))
            .map(str::to_string)
            .unwrap_or_else(|| format!("profile{}", i + 1));
        let values: Vec<f64> = indices
            .iter()
            .zip(covariate_names)
            .map(|(&idx, name)| {
                row.get(idx).unwrap_or_default().trim().parse::<f64>().map_err(|_| Error::Parse {
                    row: i + 1,
                    message: format!("column '{name}': cannot parse as a number"),
                })
            })
            .collect::<Result<_>>()?;
        out.push(LabeledProfile {
            label,
            profile: CovariateVector::new(covariate_names.to_vec(), values)?,
        });
    }
    Ok(out)
}

fn gather_profiles(args: &PredictArgs, covariate_names: &[String]) -> Result<Vec<LabeledProfile>> {
    let mut profiles = Vec::new();
    for (i, text) in args.profiles.iter().enumerate() {
        profiles.push(LabeledProfile {
            label: format!("profile{}", i + 1),
            profile: parse_profile_flag(text)?,
        });
    }
    if let Some(path) = &args.profile_csv {
        profiles.extend(profiles_from_csv(path, covariate_names)?);
    }
    if profiles.is_empty() {
        if covariate_names.is_empty() {
            profiles.push(LabeledProfile {
                label: "baseline".to_string(),
                profile: CovariateVector::empty(),
            });
        } else {
            return Err(Error::Schema(format!(
                "the model has covariates {covariate_names:?}; pass --profile or --profile-csv"
            )));
        }
    }
    Ok(profiles)
}

#[derive(Serialize)]
struct SurvivalPoint {
    time: f64,
    survival: f64,
    extrapolated: bool,
}

#[derive(Serialize)]
struct SurvivalRow {
    profile: String,
    covariates: BTreeMap<String, f64>,
    points: Vec<SurvivalPoint>,
}

#[derive(Serialize)]
struct SurvivalReport {
    model: &'static str,
    time_unit: Option<String>,
    results: Vec<SurvivalRow>,
}

#[derive(Serialize)]
struct TimeEstimateRow {
    profile: String,
    covariates: BTreeMap<String, f64>,
    time: Option<f64>,
    beyond_horizon: bool,
    extrapolated: bool,
}

#[derive(Serialize)]
struct TimeEstimateReport {
    threshold: f64,
    time_unit: Option<String>,
    estimates: Vec<TimeEstimateRow>,
}

#[derive(Serialize)]
struct HazardRatioRow {
    covariate: String,
    coefficient: f64,
    hazard_ratio: f64,
    percent_change: f64,
}

#[derive(Serialize)]
struct HazardRatioReport {
    ratios: Vec<HazardRatioRow>,
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let loaded = artifact::load_model(&args.model)?;

    let modes = args.times.is_some() as u8 + args.median as u8 + args.hazard_ratios as u8;
    if modes != 1 {
        return Err(Error::Schema(
            "choose exactly one of --times, --median, --hazard-ratios".to_string(),
        ));
    }

    if args.hazard_ratios {
        let cox = match &loaded {
            LoadedModel::Cox(m) => m,
            LoadedModel::Glm(_) => {
                return Err(Error::Domain(
                    "hazard ratios are reported for cox models; for GLMs exp(beta) is the odds ratio"
                        .to_string(),
                ))
            }
        };
        let ratios = hazard_ratios(cox);
        let report = HazardRatioReport {
            ratios: ratios
                .iter()
                .map(|r| HazardRatioRow {
                    covariate: r.covariate.clone(),
                    coefficient: r.coefficient,
                    hazard_ratio: r.hazard_ratio,
                    percent_change: r.percent_change,
                })
                .collect(),
        };
        match args.format {
            OutputFormat::Json => print!("{}", artifact::to_json(&report)?),
            OutputFormat::Table => {
                let rows: Vec<Vec<String>> = ratios
                    .iter()
                    .map(|r| {
                        vec![
                            r.covariate.clone(),
                            report::fmt_num(r.coefficient),
                            report::fmt_num(r.hazard_ratio),
                            report::fmt_percent(r.percent_change),
                        ]
                    })
                    .collect();
                print!(
                    "{}",
                    report::render_table(
                        &["covariate", "coefficient", "hazard_ratio", "change"],
                        &rows
                    )
                );
            }
        }
        return Ok(());
    }

    let model = match &loaded {
        LoadedModel::Cox(m) => SurvivalModel::Cox(m),
        LoadedModel::Glm(m) => SurvivalModel::poisson(m).map_err(|_| {
            Error::Domain(
                "logistic models predict fixed-interval probabilities, not survival curves"
                    .to_string(),
            )
        })?,
    };
    let profiles = gather_profiles(&args, model.covariate_names())?;

    if let Some(times) = &args.times {
        let mut results = Vec::new();
        for lp in &profiles {
            let survivals = survival_at(model, &lp.profile, times)?;
            let curve = crate::predict::SurvivalCurve::new(model, lp.profile.clone())?;
            results.push(SurvivalRow {
                profile: lp.label.clone(),
                covariates: lp.covariate_map(),
                points: times
                    .iter()
                    .zip(survivals)
                    .map(|(&time, survival)| SurvivalPoint {
                        time,
                        survival,
                        extrapolated: curve.extrapolated(time),
                    })
                    .collect(),
            });
        }
        let report = SurvivalReport {
            model: match model {
                SurvivalModel::Cox(_) => "cox",
                SurvivalModel::PoissonSurvival(_) => "poisson_survival",
            },
            time_unit: model.time_unit().map(str::to_string),
            results,
        };
        match args.format {
            OutputFormat::Json => print!("{}", artifact::to_json(&report)?),
            OutputFormat::Table => {
                let mut rows = Vec::new();
                for row in &report.results {
                    for point in &row.points {
                        rows.push(vec![
                            row.profile.clone(),
                            report::fmt_num(point.time),
                            report::fmt_num(point.survival),
                            point.extrapolated.to_string(),
                        ]);
                    }
                }
                print!(
                    "{}",
                    report::render_table(&["profile", "time", "survival", "extrapolated"], &rows)
                );
            }
        }
        return Ok(());
    }

    // --median
    let mut estimates = Vec::new();
    for lp in &profiles {
        let estimate = time_to_threshold(model, &lp.profile, args.threshold)?;
        estimates.push(TimeEstimateRow {
            profile: lp.label.clone(),
            covariates: lp.covariate_map(),
            time: estimate.time,
            beyond_horizon: estimate.time.is_none(),
            extrapolated: estimate.extrapolated,
        });
    }
    let report = TimeEstimateReport {
        threshold: args.threshold,
        time_unit: model.time_unit().map(str::to_string),
        estimates,
    };
    match args.format {
        OutputFormat::Json => print!("{}", artifact::to_json(&report)?),
        OutputFormat::Table => {
            let rows: Vec<Vec<String>> = report
                .estimates
                .iter()
                .map(|e| {
                    vec![
                        e.profile.clone(),
                        e.time.map(report::fmt_num).unwrap_or_else(|| "beyond-horizon".to_string()),
                        e.extrapolated.to_string(),
                    ]
                })
                .collect();
            print!("{}", report::render_table(&["profile", "time", "extrapolated"], &rows));
        }
    }
    Ok(())
}

fn parse_covariate_generator(text: &str) -> Result<CovariateDistribution> {
    match text {
        "normal" => Ok(CovariateDistribution::StandardNormal),
        other => match other.strip_prefix("bernoulli:") {
            Some(p) => {
                let p: f64 = p.parse().map_err(|_| {
                    Error::Spec(format!("bernoulli parameter '{p}' is not a number"))
                })?;
                Ok(CovariateDistribution::Bernoulli { p })
            }
            None => Err(Error::Spec(format!(
                "unknown covariate generator '{other}'; use 'normal' or 'bernoulli:<p>'"
            ))),
        },
    }
}

fn resolve_spec(args: &SimulateArgs) -> Result<SimulationSpec> {
    let mut spec: SimulationSpec = match &args.spec {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => SimulationSpec {
            n_subjects: 0,
            true_beta: vec![],
            covariates: vec![],
            baseline: BaselineShape::Constant,
            lambda0: 1.0,
            censoring_target: 0.0,
            seed: 0,
        },
    };
    if let Some(n) = args.n {
        spec.n_subjects = n;
    }
    if let Some(beta) = &args.beta {
        spec.true_beta = beta.clone();
    }
    if let Some(covariates) = &args.covariates {
        spec.covariates = covariates
            .iter()
            .map(|c| parse_covariate_generator(c))
            .collect::<Result<_>>()?;
    } else if args.spec.is_none() && !spec.true_beta.is_empty() {
        // Flags-only runs default every covariate to standard normal.
        spec.covariates =
            vec![CovariateDistribution::StandardNormal; spec.true_beta.len()];
    }
    if let Some(baseline) = args.baseline {
        spec.baseline = match baseline {
            BaselineArg::Constant => BaselineShape::Constant,
            BaselineArg::Weibull => BaselineShape::Weibull {
                shape: args.shape.ok_or_else(|| {
                    Error::Spec("--baseline weibull needs --shape".to_string())
                })?,
            },
        };
    }
    if let Some(lambda0) = args.lambda0 {
        spec.lambda0 = lambda0;
    }
    if let Some(censoring) = args.censoring {
        spec.censoring_target = censoring;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let spec = resolve_spec(&args)?;
    let cohort = simulate_cohort(&spec)?;
    write_survival_csv(&cohort, &args.out)?;
    let events = cohort.n_events();
    let censored = cohort.len() - events;
    println!(
        "simulated {} subjects: {} events, {} censored (fraction {:.4})",
        cohort.len(),
        events,
        censored,
        censored as f64 / cohort.len() as f64
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct CompareCell {
    profile: String,
    time: f64,
    cox_survival: f64,
    poisson_survival: f64,
    divergence: f64,
}

#[derive(Serialize)]
struct CompareBaselineRow {
    time: f64,
    cox_cumulative_hazard: f64,
    constant_rate_cumulative_hazard: f64,
}

#[derive(Serialize)]
struct CompareReport {
    max_divergence: f64,
    cells: Vec<CompareCell>,
    baseline: Vec<CompareBaselineRow>,
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let cox = match artifact::load_model(&args.cox)? {
        LoadedModel::Cox(m) => m,
        LoadedModel::Glm(_) => {
            return Err(Error::Schema(format!("{} is not a cox artifact", args.cox.display())))
        }
    };
    let glm = match artifact::load_model(&args.glm)? {
        LoadedModel::Glm(m) => m,
        LoadedModel::Cox(_) => {
            return Err(Error::Schema(format!("{} is not a glm artifact", args.glm.display())))
        }
    };

    let times: Vec<f64> = match &args.times {
        Some(times) => times.clone(),
        None => cox.baseline.entries().iter().map(|e| e.time).collect(),
    };
    let mut labels = Vec::new();
    let mut profiles = Vec::new();
    if args.profiles.is_empty() {
        labels.push("zero".to_string());
        profiles.push(CovariateVector::new(
            cox.covariate_names.clone(),
            vec![0.0; cox.covariate_names.len()],
        )?);
    } else {
        for (i, text) in args.profiles.iter().enumerate() {
            labels.push(format!("profile{}", i + 1));
            profiles.push(parse_profile_flag(text)?);
        }
    }

    let report = cox_poisson_equivalence_report(&cox, &glm, &profiles, &times)?;
    let out = CompareReport {
        max_divergence: report.max_divergence,
        cells: report
            .cells
            .iter()
            .map(|c| CompareCell {
                profile: labels[c.profile_index].clone(),
                time: c.time,
                cox_survival: c.cox_survival,
                poisson_survival: c.poisson_survival,
                divergence: c.divergence,
            })
            .collect(),
        baseline: report
            .baseline
            .iter()
            .map(|b| CompareBaselineRow {
                time: b.time,
                cox_cumulative_hazard: b.cox_cumulative_hazard,
                constant_rate_cumulative_hazard: b.constant_rate_cumulative_hazard,
            })
            .collect(),
    };
    match args.format {
        OutputFormat::Json => print!("{}", artifact::to_json(&out)?),
        OutputFormat::Table => {
            let rows: Vec<Vec<String>> = out
                .cells
                .iter()
                .map(|c| {
                    vec![
                        c.profile.clone(),
                        report::fmt_num(c.time),
                        report::fmt_num(c.cox_survival),
                        report::fmt_num(c.poisson_survival),
                        report::fmt_num(c.divergence),
                    ]
                })
                .collect();
            print!(
                "{}",
                report::render_table(&["profile", "time", "cox", "poisson", "divergence"], &rows)
            );
            println!("max divergence: {}", report::fmt_num(out.max_divergence));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ProbReport {
    question: &'static str,
    rate: f64,
    t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u64>,
    value: f64,
}

fn cmd_prob(question: ProbCommand) -> Result<()> {
    let report = match &question {
        ProbCommand::AtLeastOne(a) => ProbReport {
            question: "at_least_one",
            rate: a.rate,
            t: a.t,
            k: None,
            value: prob_at_least_one(ConstantRate::new(a.rate)?, Horizon::new(a.t)?),
        },
        ProbCommand::ExactlyOne(a) => ProbReport {
            question: "exactly_one",
            rate: a.rate,
            t: a.t,
            k: None,
            value: prob_exactly_one(ConstantRate::new(a.rate)?, Horizon::new(a.t)?),
        },
        ProbCommand::Survival(a) => ProbReport {
            question: "survival",
            rate: a.rate,
            t: a.t,
            k: None,
            value: survival_const_rate(ConstantRate::new(a.rate)?, Horizon::new(a.t)?),
        },
        ProbCommand::Pmf(a) => ProbReport {
            question: "pmf",
            rate: a.rate,
            t: a.t,
            k: Some(a.k),
            value: poisson_pmf(ConstantRate::new(a.rate)?, Horizon::new(a.t)?, a.k),
        },
        ProbCommand::Pdf(a) => ProbReport {
            question: "pdf",
            rate: a.rate,
            t: a.t,
            k: None,
            value: exponential_pdf(ConstantRate::new(a.rate)?, Horizon::new(a.t)?),
        },
    };
    print!("{}", artifact::to_json(&report)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_flag_parses_pairs() {
        let p = parse_profile_flag("age=70,gait=1.5").unwrap();
        assert_eq!(p.get("age"), Some(70.0));
        assert_eq!(p.get("gait"), Some(1.5));
        assert!(parse_profile_flag("age").is_err());
        assert!(parse_profile_flag("age=x").is_err());
    }

    #[test]
    fn covariate_generator_parses() {
        assert_eq!(
            parse_covariate_generator("normal").unwrap(),
            CovariateDistribution::StandardNormal
        );
        assert_eq!(
            parse_covariate_generator("bernoulli:0.4").unwrap(),
            CovariateDistribution::Bernoulli { p: 0.4 }
        );
        assert!(parse_covariate_generator("uniform").is_err());
    }

    #[test]
    fn fit_flags_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{"tol": 1e-6, "max_iter": 25}"#).unwrap();

        let flags = FitFlags { tol: None, max_iter: None, config: Some(path.clone()) };
        let config = flags.resolve().unwrap();
        assert_eq!(config.tol, 1e-6);
        assert_eq!(config.max_iter, 25);

        let flags = FitFlags { tol: Some(1e-10), max_iter: None, config: Some(path) };
        let config = flags.resolve().unwrap();
        assert_eq!(config.tol, 1e-10);
        assert_eq!(config.max_iter, 25);

        let flags = FitFlags { tol: None, max_iter: None, config: None };
        let config = flags.resolve().unwrap();
        assert_eq!(config.tol, 1e-8);
        assert_eq!(config.max_iter, 100);
    }

    #[test]
    fn bad_tol_rejected() {
        let flags = FitFlags { tol: Some(0.0), max_iter: None, config: None };
        assert!(flags.resolve().is_err());
    }
}
