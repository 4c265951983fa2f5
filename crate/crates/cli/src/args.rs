//! Command-line flags and the optional TOML config file they override.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "pmenc",
    version,
    about = "Encode and diagnose process-mining event logs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode the log into a case-by-dimension feature matrix (CSV).
    Encode(EncodeArgs),
    /// Variant coverage, variant list, power-law fit or dependency normality.
    Stats(StatsArgs),
    /// Rebalance cases across variants and write the log as CSV.
    Balance(BalanceArgs),
    /// Directly-follows, dependency and concurrency relations.
    Flow(FlowArgs),
    /// Ingest the log and report data-quality counts.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Xes,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatsReport {
    Coverage,
    Variants,
    Pareto,
    Normality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowReport {
    Csv,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextFormat {
    Jsonl,
    Text,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Event log to read.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub case_col: Option<String>,
    #[arg(long)]
    pub activity_col: Option<String>,
    #[arg(long)]
    pub time_col: Option<String>,
    /// Timestamp pattern, e.g. `DD/MM/YYYY hh:mm:ss`. ISO-8601 when omitted.
    #[arg(long)]
    pub time_format: Option<String>,
    /// Event filter applied before the command runs.
    #[arg(long)]
    pub filter: Option<String>,
    /// Output file (a directory for `flow`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file supplying any of these options; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub common: Common,
    /// one-hot | activity-profile | kgram:k=<n> | positional[:max=<n>] |
    /// numstats:attrs=<a;b>;stats=<avg,sum,...>
    #[arg(long)]
    pub encoder: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub report: Option<StatsReport>,
    /// Coverage percentages to report, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub report_format: Option<TextFormat>,
}

#[derive(Debug, Clone, Args)]
pub struct BalanceArgs {
    #[command(flatten)]
    pub common: Common,
    /// oversample-to-max | undersample-to-min | target-count:<n>
    #[arg(long)]
    pub strategy: Option<String>,
    /// Seed for case selection. Required.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub common: Common,
    /// `dot` additionally writes dfg.dot.
    #[arg(long, value_enum)]
    pub report: Option<FlowReport>,
    /// Dependency magnitude below which a two-way pair is concurrent.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
}

/// Keys accepted in a config file. Names match the long flags with `_` for
/// `-`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    input: Option<PathBuf>,
    format: Option<Format>,
    case_col: Option<String>,
    activity_col: Option<String>,
    time_col: Option<String>,
    time_format: Option<String>,
    filter: Option<String>,
    out: Option<PathBuf>,
    encoder: Option<String>,
    report: Option<String>,
    report_format: Option<TextFormat>,
    thresholds: Option<Vec<f64>>,
    strategy: Option<String>,
    seed: Option<u64>,
    threshold: Option<f64>,
}

impl FileConfig {
    /// Reads the file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.input = cfg.input.map(|p| base.join(p));
        cfg.out = cfg.out.map(|p| base.join(p));
        Ok(cfg)
    }
}

/// Options shared by every command after merging flags over the file.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub input: PathBuf,
    pub format: Option<Format>,
    pub case_col: Option<String>,
    pub activity_col: Option<String>,
    pub time_col: Option<String>,
    pub time_format: Option<String>,
    pub filter: Option<String>,
    pub out: Option<PathBuf>,
}

pub fn load_config(common: &Common) -> Result<FileConfig, CliError> {
    match &common.config {
        Some(path) => FileConfig::load(path),
        None => Ok(FileConfig::default()),
    }
}

pub fn resolve(common: &Common, file: &FileConfig) -> Result<Resolved, CliError> {
    let input = common
        .input
        .clone()
        .or_else(|| file.input.clone())
        .ok_or_else(|| CliError::Config("no input given (use --input)".into()))?;
    Ok(Resolved {
        input,
        format: common.format.or(file.format),
        case_col: common.case_col.clone().or_else(|| file.case_col.clone()),
        activity_col: common
            .activity_col
            .clone()
            .or_else(|| file.activity_col.clone()),
        time_col: common.time_col.clone().or_else(|| file.time_col.clone()),
        time_format: common
            .time_format
            .clone()
            .or_else(|| file.time_format.clone()),
        filter: common.filter.clone().or_else(|| file.filter.clone()),
        out: common.out.clone().or_else(|| file.out.clone()),
    })
}

impl FileConfig {
    pub fn encoder(&self) -> Option<String> {
        self.encoder.clone()
    }

    pub fn stats_report(&self) -> Result<Option<StatsReport>, CliError> {
        self.report
            .as_deref()
            .map(|r| StatsReport::from_str(r, true).map_err(CliError::Config))
            .transpose()
    }

    pub fn flow_report(&self) -> Result<Option<FlowReport>, CliError> {
        self.report
            .as_deref()
            .map(|r| FlowReport::from_str(r, true).map_err(CliError::Config))
            .transpose()
    }

    pub fn report_format(&self) -> Option<TextFormat> {
        self.report_format
    }

    pub fn thresholds(&self) -> Option<Vec<f64>> {
        self.thresholds.clone()
    }

    pub fn strategy(&self) -> Option<String> {
        self.strategy.clone()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }
}
