//! Batch driver: experiment configs in, comparison tables out.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asymptotics::{log_n_pre_limit, log_scale_statistic_ln, predict_cardinality, AsymptoticPrediction};
use crate::catalog;
use crate::error::Error;
use crate::exact::{exact_cardinality_with, CardinalityResult, ExactOptions, Method};
use crate::num::big_ln;
use crate::spectrum::{
    atoms_of, detect_lattice, lattice_for, summarize, LatticeStructure, SpectralSummary, Spectrum, SpectrumSpec,
    DEFAULT_LATTICE_TOL,
};

/// Atoms inspected by the numeric span search for infinite sequences.
const LATTICE_PROBE: usize = 64;
const SUMMARY_TOL: f64 = 1e-13;
const BYTES_PER_ENTRY: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded(_) | Error::LimitExceedsMemory(_) | Error::UnsupportedDimension { .. } => {
                CliError::Budget(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tractability", version, about = "Exact and asymptotic approximation cardinality of tensor-product fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral summary and lattice verdict as JSON.
    Analyze(AnalyzeArgs),
    /// Exact cardinalities over the sweep.
    Exact(RunArgs),
    /// Asymptotic predictions over the sweep.
    Predict(RunArgs),
    /// Exact and predicted values side by side.
    Compare(RunArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Spectrum JSON, or an experiment config holding one.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Overrides the methods listed in the config.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub budget_mb: Option<usize>,
    /// Reserved; every computation is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Enumerative,
    Convolution,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Enumerative => Method::Enumerative,
            MethodArg::Convolution => Method::Convolution,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "default_memory_mb")]
    pub memory_mb: usize,
}

fn default_memory_mb() -> usize {
    1024
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            memory_mb: default_memory_mb(),
        }
    }
}

fn default_methods() -> Vec<Method> {
    vec![Method::Convolution]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spectrum: SpectrumSpec,
    pub epsilons: Vec<f64>,
    pub dims: Vec<usize>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub budgets: Budgets,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.epsilons.is_empty() || self.dims.is_empty() {
            return bad("epsilons and dims must be non-empty".into());
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return bad(format!("epsilon {e} is outside (0, 1)"));
        }
        if self.dims.contains(&0) {
            return bad("dimensions must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("methods must be non-empty".into());
        }
        if self.budgets.memory_mb == 0 {
            return bad("budgets must be positive".into());
        }
        Ok(())
    }

    pub fn options(&self) -> ExactOptions {
        ExactOptions::with_memory_mb(self.budgets.memory_mb, BYTES_PER_ENTRY)
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

/// Lattice structure used for predictions: catalog knowledge, then the declared grid, then a numeric search.
pub fn lattice_structure(spec: &SpectrumSpec) -> Result<LatticeStructure<f64>, Error> {
    if let SpectrumSpec::Catalog { name, params } = spec {
        if let Some(known) = catalog::entry(name, params)?.lattice_known {
            return Ok(known);
        }
    }
    let spectrum = Spectrum::<f64>::from_spec(spec)?;
    let n = spectrum.len().unwrap_or(LATTICE_PROBE);
    let atoms = atoms_of(&spectrum, n);
    if spectrum.declared_span().is_some() {
        return Ok(lattice_for(&spectrum, &atoms, DEFAULT_LATTICE_TOL));
    }
    Ok(detect_lattice(&atoms, DEFAULT_LATTICE_TOL))
}

/// JSON report for `analyze`.
pub fn analyze(spec: &SpectrumSpec) -> Result<serde_json::Value, CliError> {
    let spectrum = Spectrum::<f64>::from_spec(spec)?;
    let summary = summarize(&spectrum, SUMMARY_TOL)?;
    let lattice = lattice_structure(spec)?;
    let mut lattice_json = json!({
        "verdict": lattice.verdict(),
        "advisory": lattice.is_advisory(),
    });
    if let Some(l) = lattice.lattice() {
        lattice_json["h"] = json!(l.span);
        lattice_json["a"] = json!(l.offset(summary.mean));
        lattice_json["shift"] = json!(l.shift);
    }
    let mut report = serde_json::to_value(summary).expect("summary serializes");
    report["spectrum"] = serde_json::to_value(spec).expect("spec serializes");
    report["lattice"] = lattice_json;
    Ok(report)
}

/// Which halves of a row to fill.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Exact,
    Predict,
    Compare,
}

/// One line of the output table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub d: usize,
    pub epsilon: f64,
    pub method: String,
    pub mode: Option<String>,
    pub n_min: Option<String>,
    #[serde(rename = "card_A")]
    pub card_a: Option<String>,
    pub n_lo: Option<String>,
    pub n_hi: Option<String>,
    pub log_n_exact: Option<f64>,
    pub log_n_hat: Option<f64>,
    pub ratio: Option<f64>,
    pub r_d: Option<f64>,
    pub two_q: Option<f64>,
    pub theta: Option<f64>,
    pub q_over_sigma: Option<f64>,
    pub log_n_pre_limit: Option<f64>,
    pub status: String,
}

pub const COLUMNS: [&str; 17] = [
    "d",
    "epsilon",
    "method",
    "mode",
    "n_min",
    "card_A",
    "n_lo",
    "n_hi",
    "log_n_exact",
    "log_n_hat",
    "ratio",
    "r_d",
    "two_q",
    "theta",
    "q_over_sigma",
    "log_n_pre_limit",
    "status",
];

fn real(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

impl Row {
    fn empty(d: usize, epsilon: f64, method: &str) -> Self {
        Self {
            d,
            epsilon,
            method: method.to_string(),
            mode: None,
            n_min: None,
            card_a: None,
            n_lo: None,
            n_hi: None,
            log_n_exact: None,
            log_n_hat: None,
            ratio: None,
            r_d: None,
            two_q: None,
            theta: None,
            q_over_sigma: None,
            log_n_pre_limit: None,
            status: "ok".into(),
        }
    }

    pub fn csv_record(&self) -> Vec<String> {
        let text = |x: &Option<String>| x.clone().unwrap_or_default();
        vec![
            self.d.to_string(),
            format!("{:.16e}", self.epsilon),
            self.method.clone(),
            text(&self.mode),
            text(&self.n_min),
            text(&self.card_a),
            text(&self.n_lo),
            text(&self.n_hi),
            real(self.log_n_exact),
            real(self.log_n_hat),
            real(self.ratio),
            real(self.r_d),
            real(self.two_q),
            real(self.theta),
            real(self.q_over_sigma),
            real(self.log_n_pre_limit),
            self.status.clone(),
        ]
    }

    pub fn is_budget_failure(&self) -> bool {
        self.status == "budget-exceeded"
    }
}

struct Context {
    spec: SpectrumSpec,
    summary: SpectralSummary<f64>,
    lattice: LatticeStructure<f64>,
    options: ExactOptions,
}

fn fill_exact(row: &mut Row, ctx: &Context, r: &CardinalityResult<f64>) {
    let log_n = match &r.bracketing {
        Some(b) => (b.log_n_lo + b.log_n_hi) / 2.0,
        None => big_ln(&r.n_min),
    };
    row.mode = r.mode.map(|m| m.to_string());
    row.n_min = Some(r.n_min.to_string());
    row.card_a = Some(r.card_a.to_string());
    if let Some(b) = &r.bracketing {
        row.n_lo = Some(b.n_lo.to_string());
        row.n_hi = Some(b.n_hi.to_string());
    }
    row.log_n_exact = Some(log_n);
    row.r_d = Some(log_scale_statistic_ln(log_n, r.d, ctx.summary.explosion));
    row.theta = Some(r.theta);
    row.log_n_pre_limit = log_n_pre_limit(&ctx.summary, &ctx.lattice, r.theta, r.d).ok();
}

fn fill_prediction(row: &mut Row, ctx: &Context, p: &AsymptoticPrediction<f64>) {
    row.log_n_hat = Some(p.log_n_hat);
    row.two_q = Some(p.r_limit);
    row.q_over_sigma = Some(p.q / ctx.summary.sigma());
}

fn compute_row(ctx: &Context, task: Task, d: usize, eps: f64, method: Method) -> Row {
    let label = if task == Task::Predict { "asymptotic".to_string() } else { method.to_string() };
    let mut row = Row::empty(d, eps, &label);
    if task != Task::Exact {
        match predict_cardinality(&ctx.summary, &ctx.lattice, eps, d) {
            Ok(p) => fill_prediction(&mut row, ctx, &p),
            Err(e) => row.status = format!("error: {e}"),
        }
    }
    if task != Task::Predict {
        match exact_cardinality_with(&ctx.spec, d, eps, method, &ctx.options) {
            Ok(r) => fill_exact(&mut row, ctx, &r),
            Err(Error::BudgetExceeded(_) | Error::LimitExceedsMemory(_) | Error::UnsupportedDimension { .. }) => {
                row.status = "budget-exceeded".into();
            }
            Err(e) => row.status = format!("error: {e}"),
        }
    }
    if let (Some(a), Some(b)) = (row.log_n_exact, row.log_n_hat) {
        row.ratio = Some((a - b).exp());
    }
    row
}

/// All rows of a sweep, ordered by `(d, epsilon, method)`.
pub fn run_experiment(config: &ExperimentConfig, task: Task) -> Result<Vec<Row>, CliError> {
    config.validate()?;
    let spectrum = Spectrum::<f64>::from_spec(&config.spectrum)?;
    let summary = summarize(&spectrum, SUMMARY_TOL)?;
    if summary.degenerate {
        return Err(CliError::Config("degenerate spectrum: sigma = 0".into()));
    }
    let ctx = Context {
        spec: config.spectrum.resolve()?,
        summary,
        lattice: lattice_structure(&config.spectrum)?,
        options: config.options(),
    };
    let mut dims = config.dims.clone();
    dims.sort_unstable();
    dims.dedup();
    let mut epsilons = config.epsilons.clone();
    epsilons.sort_by(f64::total_cmp);
    epsilons.dedup();
    let methods: Vec<Method> = if task == Task::Predict {
        vec![Method::Convolution]
    } else {
        let mut m = config.methods.clone();
        m.sort_by_key(|m| m.to_string());
        m.dedup();
        m
    };
    let mut jobs = Vec::with_capacity(dims.len() * epsilons.len() * methods.len());
    for &d in &dims {
        for &e in &epsilons {
            jobs.extend(methods.iter().map(|&m| (d, e, m)));
        }
    }
    Ok(jobs.par_iter().map(|&(d, e, m)| compute_row(&ctx, task, d, e, m)).collect())
}

pub fn write_rows<W: Write>(rows: &[Row], format: Format, out: W) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(COLUMNS).map_err(csv_error)?;
            for row in rows {
                w.write_record(row.csv_record()).map_err(csv_error)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows).map_err(|e| CliError::Io(e.into()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(io::Error::other(e))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_spectrum(path: &Path) -> Result<SpectrumSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let spec = value.get("spectrum").cloned().unwrap_or(value);
    serde_json::from_value(spec).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let report = analyze(&read_spectrum(&args.config)?)?;
            let mut out = open_output(args.out.as_deref())?;
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| CliError::Io(e.into()))?;
            writeln!(out)?;
            out.flush()?;
            Ok(())
        }
        Command::Exact(args) => sweep(args, Task::Exact),
        Command::Predict(args) => sweep(args, Task::Predict),
        Command::Compare(args) => sweep(args, Task::Compare),
    }
}

fn sweep(args: RunArgs, task: Task) -> Result<(), CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(m) = args.method {
        config.methods = vec![m.into()];
    }
    if let Some(mb) = args.budget_mb {
        config.budgets.memory_mb = mb;
    }
    config.validate()?;
    let rows = run_experiment(&config, task)?;
    let format = args.format.or(config.outputs.format).unwrap_or_default();
    let path = args.out.or(config.outputs.path.clone());
    let mut out = open_output(path.as_deref())?;
    write_rows(&rows, format, &mut out)?;
    out.flush()?;
    let failed = rows.iter().filter(|r| r.is_budget_failure()).count();
    if failed > 0 {
        return Err(CliError::Budget(format!("{failed} of {} rows exceeded the budget", rows.len())));
    }
    Ok(())
}
