//! Subcommand definitions and dispatch.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use colsel::experiments::{check_inf1_reduction, check_inf2_reduction, ExperimentResult, Model};
use colsel::grothendieck::{groth_factorize, groth_optimal_alpha};
use colsel::matcore::{norm_inf1_exact_capped, norm_inf2_exact_capped, standardize, ENUMERATION_CAP};
use colsel::pietsch::{pietsch_factorize, pietsch_optimal_alpha};
use colsel::select::{bt_select, kt_select, SelectConfig, SelectionReport};
use colsel::{Bracket, DenseMatrix, FactorizeOptions, K_G_UPPER, K_P};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::input::{load_matrix, Format};
use crate::report::write_report;

#[derive(Debug, Parser)]
#[command(name = "colsel", version, about = "Randomized column subset selection and norm certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select columns with small spectral norm.
    Kt(SelectArgs),
    /// Select well-conditioned columns.
    Bt(SelectArgs),
    /// Factor B = T D, at a given alpha or with a bracket search.
    Pietsch(FactorArgs),
    /// Factor a symmetric G = D T D, at a given alpha or with a bracket search.
    Grothendieck(FactorArgs),
    /// Certified bracket for the (inf,2) or (inf,1) norm.
    Norm(NormArgs),
    /// Monte Carlo check of random-submatrix norm bounds.
    Experiment(ExperimentArgs),
    /// Exact (inf,2) or (inf,1) norm by sign enumeration.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Input matrix (CSV or Matrix Market).
    pub input: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mirror-descent iterations per factorization.
    #[arg(long = "iters", default_value_t = 5000)]
    pub iters: usize,
    /// Scale columns to unit norm before running.
    #[arg(long)]
    pub standardize: bool,
    /// Worker threads for the selection rounds.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Include wall-clock timings in the report (makes output non-reproducible).
    #[arg(long)]
    pub timings: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub common: Common,
    /// Override the acceptance bound (15 for kt, sqrt 3 for bt).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// kt only: return every column when the whole matrix already passes.
    #[arg(long)]
    pub shortcut: bool,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[command(flatten)]
    pub common: Common,
    /// Factor at this alpha instead of searching for the smallest one.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "rel-tol", default_value_t = 0.05)]
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Inf2,
    Inf1,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Kind::Inf2)]
    pub kind: Kind,
    #[arg(long = "rel-tol", default_value_t = 0.05)]
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    /// Fixed-size uniform subsets.
    #[value(alias = "P_delta")]
    P,
    /// Independent coordinate selection.
    #[value(alias = "R_delta")]
    R,
    Both,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Kind::Inf2)]
    pub kind: Kind,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// Which sampling model's records to list.
    #[arg(long, value_enum, default_value_t = ModelChoice::Both)]
    pub model: ModelChoice,
    /// inf1 only: check the s/9 bound when s <= ceil(regime * st.rank).
    #[arg(long)]
    pub regime: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Kind::Inf2)]
    pub kind: Kind,
    /// Largest column count to enumerate.
    #[arg(long = "oracle-cap", default_value_t = 20)]
    pub oracle_cap: usize,
}

#[derive(Debug, Serialize)]
struct Thresholds {
    kt_norm: f64,
    bt_kappa: f64,
}

/// Configuration after defaults are resolved, echoed into every report.
#[derive(Debug, Serialize)]
struct RunConfig {
    seed: u64,
    emd_iterations: usize,
    rel_tol: f64,
    standardize_input: bool,
    thresholds: Thresholds,
    oracle_cap: usize,
    threads: usize,
    format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    regime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shortcut: Option<bool>,
}

impl RunConfig {
    fn new(common: &Common) -> Self {
        Self {
            seed: common.seed,
            emd_iterations: common.iters,
            rel_tol: 0.05,
            standardize_input: common.standardize,
            thresholds: Thresholds {
                kt_norm: 15.0,
                bt_kappa: 3f64.sqrt(),
            },
            oracle_cap: 20,
            threads: common.threads,
            format: common.format.unwrap_or_else(|| Format::from_path(&common.input)),
            alpha: None,
            kind: None,
            delta: None,
            trials: None,
            model: None,
            regime: None,
            shortcut: None,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.emd_iterations == 0 || self.threads == 0 || self.oracle_cap == 0 {
            return Err(CliError::Usage("--iters, --threads and --oracle-cap must be at least 1".into()));
        }
        if self.trials == Some(0) {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(CliError::Usage(format!("--rel-tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if !(self.thresholds.kt_norm > 0.0 && self.thresholds.bt_kappa > 0.0 && self.thresholds.bt_kappa.is_finite() && self.thresholds.kt_norm.is_finite()) {
            return Err(CliError::Usage("thresholds must be positive and finite".into()));
        }
        if self.alpha.is_some_and(|a| !(a.is_finite() && a > 0.0)) {
            return Err(CliError::Usage("--alpha must be positive and finite".into()));
        }
        if self.delta.is_some_and(|d| !(0.0..=1.0).contains(&d)) {
            return Err(CliError::Usage("--delta must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn factorize_options(&self) -> FactorizeOptions {
        FactorizeOptions::with_budget(self.emd_iterations)
    }
}

#[derive(Serialize)]
struct Timings {
    load: f64,
    compute: f64,
}

#[derive(Serialize)]
struct Envelope {
    command: &'static str,
    config: RunConfig,
    input_shape: [usize; 2],
    result: Value,
    timings_ms: Option<Timings>,
}

/// Whether a command reads a column matrix `A` or a symmetric matrix `G`.
#[derive(PartialEq, Eq)]
enum Input {
    Columns,
    Symmetric,
}

fn load(common: &Common, config: &RunConfig, input: Input) -> Result<DenseMatrix, CliError> {
    let a = load_matrix(&common.input, config.format)?;
    if common.standardize {
        if input == Input::Symmetric {
            return Err(CliError::Usage("--standardize applies only to column matrices".into()));
        }
        return Ok(standardize(&a)?);
    }
    Ok(a)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common, mut config, input) = match &cli.command {
        Command::Kt(a) => ("kt", &a.common, RunConfig::new(&a.common), Input::Columns),
        Command::Bt(a) => ("bt", &a.common, RunConfig::new(&a.common), Input::Columns),
        Command::Pietsch(a) => ("pietsch", &a.common, RunConfig::new(&a.common), Input::Columns),
        Command::Grothendieck(a) => ("grothendieck", &a.common, RunConfig::new(&a.common), Input::Symmetric),
        Command::Norm(a) => (
            "norm",
            &a.common,
            RunConfig::new(&a.common),
            if a.kind == Kind::Inf2 { Input::Columns } else { Input::Symmetric },
        ),
        Command::Experiment(a) => ("experiment", &a.common, RunConfig::new(&a.common), Input::Columns),
        Command::Oracle(a) => (
            "oracle",
            &a.common,
            RunConfig::new(&a.common),
            if a.kind == Kind::Inf2 { Input::Columns } else { Input::Symmetric },
        ),
    };
    match &cli.command {
        Command::Kt(a) => {
            if let Some(t) = a.threshold {
                config.thresholds.kt_norm = t;
            }
            config.shortcut = Some(a.shortcut);
        }
        Command::Bt(a) => {
            if let Some(t) = a.threshold {
                config.thresholds.bt_kappa = t;
            }
            config.shortcut = Some(a.shortcut);
        }
        Command::Pietsch(a) | Command::Grothendieck(a) => {
            config.alpha = a.alpha;
            config.rel_tol = a.rel_tol;
        }
        Command::Norm(a) => {
            config.kind = Some(a.kind);
            config.rel_tol = a.rel_tol;
        }
        Command::Experiment(a) => {
            config.kind = Some(a.kind);
            config.delta = Some(a.delta);
            config.trials = Some(a.trials);
            config.model = Some(a.model);
            config.regime = a.regime;
        }
        Command::Oracle(a) => {
            config.kind = Some(a.kind);
            config.oracle_cap = a.oracle_cap;
        }
    }
    config.validate()?;

    let start = Instant::now();
    let a = load(common, &config, input)?;
    let load_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();

    let result = match &cli.command {
        Command::Kt(_) | Command::Bt(_) => {
            let sel = SelectConfig {
                emd_iterations: config.emd_iterations,
                kt_norm: config.thresholds.kt_norm,
                bt_kappa: config.thresholds.bt_kappa,
                eta_cap: None,
                shortcut: config.shortcut == Some(true),
                threads: config.threads,
            };
            if name == "kt" {
                selection_result(kt_select(&a, config.seed, &sel)?, "norm_of_tau")
            } else {
                selection_result(bt_select(&a, config.seed, &sel)?, "kappa_of_tau")
            }
        }
        Command::Pietsch(_) => {
            let opts = config.factorize_options();
            match config.alpha {
                Some(alpha) => json!({"mode": "fixed", "factorization": pietsch_factorize(&a, alpha, &opts)?}),
                None => bracket_result(&pietsch_optimal_alpha(&a, config.rel_tol, &opts)?, K_P),
            }
        }
        Command::Grothendieck(_) => {
            let opts = config.factorize_options();
            match config.alpha {
                Some(alpha) => json!({"mode": "fixed", "factorization": groth_factorize(&a, alpha, &opts)?}),
                None => bracket_result(&groth_optimal_alpha(&a, config.rel_tol, &opts)?, K_G_UPPER),
            }
        }
        Command::Norm(n) => {
            let opts = config.factorize_options();
            let mut out = match n.kind {
                Kind::Inf2 => bracket_result(&pietsch_optimal_alpha(&a, config.rel_tol, &opts)?, K_P),
                Kind::Inf1 => bracket_result(&groth_optimal_alpha(&a, config.rel_tol, &opts)?, K_G_UPPER),
            };
            if let Value::Object(map) = &mut out {
                map.remove("factorization");
                map.insert("kind".into(), to_value(&n.kind));
            }
            out
        }
        Command::Experiment(e) => experiment_result(&a, e, config.seed)?,
        Command::Oracle(o) => {
            let cap = config.oracle_cap.min(ENUMERATION_CAP);
            let (value, witness) = match o.kind {
                Kind::Inf2 => norm_inf2_exact_capped(&a, cap)?,
                Kind::Inf1 => {
                    a.ensure_symmetric()?;
                    norm_inf1_exact_capped(&a, cap)?
                }
            };
            json!({"kind": o.kind, "value": value, "witness": witness})
        }
    };
    let compute_ms = start.elapsed().as_secs_f64() * 1e3;

    let envelope = Envelope {
        command: name,
        input_shape: [a.nrows(), a.ncols()],
        config,
        result,
        timings_ms: common.timings.then_some(Timings {
            load: load_ms,
            compute: compute_ms,
        }),
    };
    write_report(&envelope, common.output.as_deref())
}

fn selection_result(report: SelectionReport, metric_key: &str) -> Value {
    let mut out = json!({
        "tau": report.tau.indices(),
        "attempts": report.attempts,
        "stable_rank": report.stable_rank,
        "cardinality_ratio": report.cardinality_ratio,
        "shortcut_taken": report.shortcut_taken,
        "per_round_log": report.per_round_log,
        "seed": report.seed,
    });
    out[metric_key] = to_value(&report.accepted_metric);
    out
}

fn bracket_result<F: Serialize>(b: &Bracket<F>, constant: f64) -> Value {
    json!({
        "mode": "bracket",
        "lower": b.alpha_lo,
        "upper": b.alpha_hi,
        "ratio": b.ratio(),
        "constant": constant,
        "converged": b.converged,
        "bisection_steps": b.bisection_steps,
        "witness": b.lower_witness,
        "factorization": b.best_fact,
    })
}

fn experiment_result(a: &DenseMatrix, e: &ExperimentArgs, seed: u64) -> Result<Value, CliError> {
    let keep = |r: &ExperimentResult| match e.model {
        ModelChoice::Both => true,
        ModelChoice::P => r.model == Model::PDelta,
        ModelChoice::R => r.model == Model::RDelta,
    };
    let (records, details): (Vec<(&str, ExperimentResult)>, Value) = match e.kind {
        Kind::Inf2 => {
            let r = check_inf2_reduction(a, e.delta, e.trials, seed)?;
            let mut recs = vec![("bound", r.independent.clone()), ("poissonization", r.fixed_size.clone())];
            if let Some(x) = &r.small_sample {
                recs.push(("small_sample", x.clone()));
            }
            (recs, to_value(&r))
        }
        Kind::Inf1 => {
            let r = check_inf1_reduction(a, e.delta, e.trials, seed, e.regime)?;
            let mut recs = vec![("poissonization", r.fixed_size.clone())];
            if let Some(x) = &r.small_sample {
                recs.push(("small_sample", x.clone()));
            }
            (recs, to_value(&r))
        }
    };
    let records: Vec<Value> = records
        .into_iter()
        .filter(|(_, r)| keep(r))
        .map(|(check, r)| {
            let mut v = to_value(&r);
            v["check"] = json!(check);
            v
        })
        .collect();
    let all_pass = records.iter().all(|r| r["pass"] == json!(true));
    Ok(json!({"kind": e.kind, "records": records, "all_pass": all_pass, "details": details}))
}
