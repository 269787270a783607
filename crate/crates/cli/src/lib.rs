//! Command-line front end: every run is described by a [`RunConfig`], which
//! serializes to JSON and replays to the same output.

mod commands;
pub mod scalar;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub use scalar::{parse_scalar, parse_scalar_list, ScalarError};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "OTM_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    InvariantViolation = 2,
    ResourceBudget = 3,
    InputError = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("resource budget exhausted: {0}")]
    Resource(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            CliError::Input(_) | CliError::Io { .. } => ExitStatus::InputError,
            CliError::Resource(_) => ExitStatus::ResourceBudget,
        }
    }
}

impl From<ScalarError> for CliError {
    fn from(e: ScalarError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "otm", version, about = "One-time memories from quantum random access codes: bounds, simulation and geometry")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Root seed; every random stream is derived from it by label.
    #[arg(long, global = true, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: the environment variable OTM_WORKERS, else all cores).
    #[arg(long, global = true, env = WORKERS_ENV)]
    #[serde(default)]
    pub workers: Option<usize>,
    /// Wall-clock budget in seconds, for subcommands that honour one.
    #[arg(long, global = true)]
    #[serde(default)]
    pub time_budget: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Certified bound on what one qubit measurement learns about the encoded bits.
    Bounds(BoundsArgs),
    /// Monte-Carlo round trips of the one-time memory, optionally with an exact simulator comparison.
    Simulate(SimulateArgs),
    /// Smallest cube radius and grid satisfying the size and shell constraints.
    Feasibility(FeasibilityArgs),
    /// Collision and min-entropy quantities of a distribution file.
    Entropy(EntropyArgs),
    /// Exact collision information leaked by product basis measurements.
    Leakage(LeakageArgs),
    /// Success probability of both readouts on all four encoded pairs.
    QracTable,
    /// Re-runs a serialized configuration (or the config of an output document).
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub quantity: QuantityArg,
    #[arg(long, default_value = "0.05")]
    pub coarse: String,
    #[arg(long, default_value = "0.005")]
    pub fine: String,
    #[arg(long)]
    #[serde(default)]
    pub max_cells: Option<u64>,
    /// Refine every cell; for validating pruning.
    #[arg(long)]
    #[serde(default)]
    pub no_prune: bool,
    /// Bound cells by refinement alone.
    #[arg(long)]
    #[serde(default)]
    pub no_dual: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantityArg {
    Greater,
    Total,
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaArg {
    #[value(name = "0")]
    #[serde(rename = "0")]
    Zero,
    #[value(name = "1")]
    #[serde(rename = "1")]
    One,
    Both,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, required_unless_present = "rate", conflicts_with = "rate")]
    #[serde(default)]
    pub k: Option<usize>,
    /// Code rate; `R·n` must be an integer.
    #[arg(long)]
    #[serde(default)]
    pub rate: Option<String>,
    /// Security parameter; messages have λ/8 bits.
    #[arg(long, default_value_t = 8)]
    pub lambda: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, value_enum, default_value = "both")]
    pub alpha: AlphaArg,
    /// Adversary measurement for the exact simulator comparison:
    /// `mu0`, `mu1`, `none` or a basis angle.
    #[arg(long)]
    #[serde(default)]
    pub strategy: Option<String>,
    /// Fixed messages as bit strings; random per trial when absent.
    #[arg(long)]
    #[serde(default)]
    pub m0: Option<String>,
    #[arg(long)]
    #[serde(default)]
    pub m1: Option<String>,
    /// Seed of the public codes (default: derived from the root seed).
    #[arg(long)]
    #[serde(default)]
    pub code_seed: Option<u64>,
    /// Draw fresh codes for every trial.
    #[arg(long, conflicts_with = "code_seed")]
    #[serde(default)]
    pub fresh_codes: bool,
    /// Number of trials whose full transcript is emitted.
    #[arg(long, default_value_t = 5)]
    pub transcript_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FeasibilityArgs {
    #[arg(long = "D")]
    pub dim: u32,
    #[arg(long)]
    pub ell: u64,
    #[arg(long = "d")]
    pub depth: u32,
    #[arg(long, default_value = "2^-20")]
    pub eps1: String,
    #[arg(long, default_value = "2^-20")]
    pub eps2: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(group(clap::ArgGroup::new("op").required(true).args(["mi", "h", "hmin"])))]
pub struct EntropyArgs {
    /// Distribution file, CSV or JSON.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Collision mutual information between two comma-separated variable groups.
    #[arg(long, num_args = 2, value_names = ["X", "Y"])]
    #[serde(default)]
    pub mi: Option<Vec<String>>,
    /// Collision entropy of a variable group.
    #[arg(long)]
    #[serde(default)]
    pub h: Option<String>,
    /// Min-entropy of a variable group.
    #[arg(long)]
    #[serde(default)]
    pub hmin: Option<String>,
    /// Conditioning variable group.
    #[arg(long)]
    #[serde(default)]
    pub given: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LeakageArgs {
    /// Number of encoded pairs.
    #[arg(long)]
    pub m: usize,
    /// Basis angles (default kπ/16 for k = 0..8).
    #[arg(long)]
    #[serde(default)]
    pub angles: Option<String>,
    /// Every product of angles; otherwise one angle on all pairs.
    #[arg(long)]
    #[serde(default)]
    pub exhaustive: bool,
    /// Write the CSV table here; stdout otherwise.
    #[arg(long)]
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub config: PathBuf,
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Accepts a bare config or an output document carrying one under `config`.
    pub fn from_json(s: &str) -> Result<Self, CliError> {
        let v: Value = serde_json::from_str(s).map_err(|e| CliError::Input(format!("config JSON: {e}")))?;
        let v = match v {
            Value::Object(mut m) if m.contains_key("config") && !m.contains_key("command") => m.remove("config").unwrap_or(Value::Null),
            other => other,
        };
        serde_json::from_value(v).map_err(|e| CliError::Input(format!("config JSON: {e}")))
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct Artifacts {
    /// The config actually executed (after replay resolution).
    pub config: RunConfig,
    pub status: ExitStatus,
    /// Deterministic result, a function of the config alone.
    pub result: Value,
    /// Timestamps, durations and the worker count.
    pub metadata: Value,
    pub csv: Option<String>,
    pub summary: String,
}

impl Artifacts {
    /// The JSON document: `{config, result, metadata}`.
    pub fn document(&self) -> String {
        let doc = json!({ "config": self.config, "result": self.result, "metadata": self.metadata });
        serde_json::to_string_pretty(&doc).expect("document serializes") + "\n"
    }

    /// The document without `metadata`, which is byte-identical across re-runs.
    pub fn reproducible_document(&self) -> String {
        let doc = json!({ "config": self.config, "result": self.result });
        serde_json::to_string_pretty(&doc).expect("document serializes") + "\n"
    }
}

/// Output of one subcommand before the run-level metadata is attached.
pub(crate) struct Outcome {
    pub result: Value,
    pub violations: Vec<String>,
    pub budget_exceeded: bool,
    pub csv: Option<String>,
    pub summary: String,
    pub timing: Option<f64>,
}

impl Outcome {
    pub(crate) fn new(result: Value, summary: String) -> Self {
        Outcome { result, violations: Vec::new(), budget_exceeded: false, csv: None, summary, timing: None }
    }
}

/// Executes a config on its own worker pool.
pub fn run(config: &RunConfig) -> Result<Artifacts, CliError> {
    let config = resolve_replay(config)?;
    let workers = match config.workers {
        Some(0) => return Err(CliError::Input("worker count must be positive".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let budget = config.time_budget.as_deref().map(parse_scalar).transpose()?;
    if budget.is_some_and(|b| b <= 0.0) {
        return Err(CliError::Input("time budget must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Resource(format!("worker pool: {e}")))?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let outcome = pool.install(|| commands::dispatch(&config, budget))?;
    let mut violations = outcome.violations.clone();
    violations.sort();
    let status = if outcome.budget_exceeded {
        ExitStatus::ResourceBudget
    } else if !violations.is_empty() {
        ExitStatus::InvariantViolation
    } else {
        ExitStatus::Success
    };
    let result = json!({ "status": status_name(status), "violations": violations, "data": outcome.result });
    let metadata = json!({
        "started_unix_seconds": started,
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
        "search_seconds": outcome.timing,
        "workers": workers,
    });
    Ok(Artifacts { config, status, result, metadata, csv: outcome.csv, summary: outcome.summary })
}

fn status_name(s: ExitStatus) -> &'static str {
    match s {
        ExitStatus::Success => "ok",
        ExitStatus::InvariantViolation => "invariant-violation",
        ExitStatus::ResourceBudget => "budget-exhausted",
        ExitStatus::InputError => "input-error",
    }
}

fn resolve_replay(config: &RunConfig) -> Result<RunConfig, CliError> {
    let Command::Replay(r) = &config.command else {
        return Ok(config.clone());
    };
    let loaded = RunConfig::from_json(&read_file(&r.config)?)?;
    let mut loaded = loaded;
    if matches!(loaded.command, Command::Replay(_)) {
        return Err(CliError::Input("a replayed config cannot itself be a replay".into()));
    }
    // Neither affects the result.
    loaded.out = config.out.clone().or(loaded.out);
    loaded.workers = config.workers.or(loaded.workers);
    Ok(loaded)
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Runs a config and writes its artifacts; returns the exit status.
pub fn execute(config: &RunConfig) -> ExitStatus {
    let artifacts = match run(config) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_status();
        }
    };
    let mut stdout_used = false;
    let written = (|| {
        if let Some(csv) = &artifacts.csv {
            match leakage_csv_path(&artifacts.config) {
                Some(p) => write_file(p, csv)?,
                None => {
                    print!("{csv}");
                    stdout_used = true;
                }
            }
        }
        match &artifacts.config.out {
            Some(p) => write_file(p, &artifacts.document())?,
            None if !stdout_used => print!("{}", artifacts.document()),
            None => {}
        }
        Ok::<_, CliError>(())
    })();
    if let Err(e) = written {
        eprintln!("error: {e}");
        return e.exit_status();
    }
    eprintln!("{}", artifacts.summary);
    artifacts.status
}

fn leakage_csv_path(config: &RunConfig) -> Option<&Path> {
    match &config.command {
        Command::Leakage(a) => a.csv.as_deref(),
        _ => None,
    }
}
