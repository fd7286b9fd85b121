use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use collatz_core::affine::{DEFAULT_CACHE_DEPTH, MAX_CACHE_DEPTH};
use collatz_core::experiment::ExperimentConfig;
use collatz_core::sieve::{SieveConfig, DEFAULT_K_LIMIT, DEFAULT_MAX_STATES};
use collatz_core::trajectory::DEFAULT_BUDGET_MULT;
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "collatz", version, about = "Condensed Collatz verification for huge integers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    /// Write output to PATH instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Print progress to stderr.
    #[arg(long, global = true)]
    pub progress: bool,
}

#[derive(Debug, Args, Clone)]
pub struct VerifyArgs {
    /// Decimal digits of each random start value.
    #[arg(long, default_value_t = 10_000)]
    pub digits: u64,
    /// Number of random start values.
    #[arg(long, default_value_t = 100)]
    pub count: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CACHE_DEPTH)]
    pub cache_depth: u32,
    /// Iteration budget as a multiple of the expected stopping time.
    #[arg(long, default_value_t = DEFAULT_BUDGET_MULT)]
    pub budget_mult: f64,
    /// Worker threads (default: all cores).
    #[arg(long, env = "COLLATZ_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Verify random numbers with a fixed number of digits; per-sample records plus summary.
    Verify(VerifyArgs),
    /// Verify a single number given on the command line or in a file.
    VerifyNumber {
        /// Decimal value.
        #[arg(long, conflicts_with = "value_file", required_unless_present = "value_file")]
        value: Option<String>,
        /// File holding a decimal value; whitespace is ignored.
        #[arg(long, value_name = "PATH")]
        value_file: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CACHE_DEPTH)]
        cache_depth: u32,
        #[arg(long, default_value_t = DEFAULT_BUDGET_MULT)]
        budget_mult: f64,
    },
    /// Count (and optionally list) residue classes mod 2^k that do not shrink within k steps.
    Sieve {
        #[arg(long, default_value_t = 10)]
        k_max: u32,
        /// Directory receiving one `level_<k>.txt` survivor list per level.
        #[arg(long, value_name = "PATH")]
        emit_classes: Option<PathBuf>,
        /// Abort if a level would hold more states than this.
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Like `verify`, but report only the summary statistics.
    Stats(VerifyArgs),
    /// Run the built-in consistency suites.
    Selfcheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    VerifyNumber,
    Sieve,
    Stats,
    Selfcheck,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueSource {
    Literal(String),
    File(PathBuf),
}

/// Validated settings for one invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub digits: u64,
    pub count: u64,
    pub seed: u64,
    pub k_max: u32,
    pub cache_depth: u32,
    pub budget_mult: f64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub threads: usize,
    pub emit_classes: Option<PathBuf>,
    pub max_states: usize,
    pub value: Option<ValueSource>,
    pub progress: bool,
}

impl RunConfig {
    fn base(command: Command, cli: &Cli) -> Self {
        RunConfig {
            command,
            digits: 1,
            count: 1,
            seed: 0,
            k_max: 1,
            cache_depth: DEFAULT_CACHE_DEPTH,
            budget_mult: DEFAULT_BUDGET_MULT,
            format: cli.format,
            out: cli.out.clone(),
            threads: 1,
            emit_classes: None,
            max_states: DEFAULT_MAX_STATES,
            value: None,
            progress: cli.progress,
        }
    }

    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let cfg = match &cli.command {
            CommandArgs::Verify(v) | CommandArgs::Stats(v) => {
                let command = if matches!(cli.command, CommandArgs::Verify(_)) {
                    Command::Verify
                } else {
                    Command::Stats
                };
                RunConfig {
                    digits: v.digits,
                    count: v.count,
                    seed: v.seed,
                    cache_depth: v.cache_depth,
                    budget_mult: v.budget_mult,
                    threads: v.threads.unwrap_or_else(default_threads),
                    ..RunConfig::base(command, &cli)
                }
            }
            CommandArgs::VerifyNumber {
                value,
                value_file,
                cache_depth,
                budget_mult,
            } => RunConfig {
                cache_depth: *cache_depth,
                budget_mult: *budget_mult,
                value: match (value, value_file) {
                    (Some(v), _) => Some(ValueSource::Literal(v.clone())),
                    (None, Some(p)) => Some(ValueSource::File(p.clone())),
                    (None, None) => None,
                },
                ..RunConfig::base(Command::VerifyNumber, &cli)
            },
            CommandArgs::Sieve {
                k_max,
                emit_classes,
                max_states,
            } => RunConfig {
                k_max: *k_max,
                emit_classes: emit_classes.clone(),
                max_states: *max_states,
                ..RunConfig::base(Command::Sieve, &cli)
            },
            CommandArgs::Selfcheck => RunConfig::base(Command::Selfcheck, &cli),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.digits == 0 {
            return usage("--digits must be at least 1".into());
        }
        if self.count == 0 {
            return usage("--count must be at least 1".into());
        }
        if !(1..=MAX_CACHE_DEPTH).contains(&self.cache_depth) {
            return usage(format!("--cache-depth must lie in 1..={MAX_CACHE_DEPTH}"));
        }
        if !(self.budget_mult.is_finite() && self.budget_mult > 0.0) {
            return usage("--budget-mult must be a positive number".into());
        }
        if self.threads == 0 {
            return usage("--threads must be at least 1".into());
        }
        if self.command == Command::Sieve && !(1..=DEFAULT_K_LIMIT).contains(&self.k_max) {
            return usage(format!("--k-max must lie in 1..={DEFAULT_K_LIMIT}"));
        }
        if self.command == Command::VerifyNumber && self.value.is_none() {
            return usage("one of --value or --value-file is required".into());
        }
        Ok(())
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            digits: self.digits,
            count: self.count,
            seed: self.seed,
            cache_depth: self.cache_depth,
            budget_mult: self.budget_mult,
            threads: self.threads,
        }
    }

    pub fn sieve(&self) -> SieveConfig {
        SieveConfig {
            k_limit: DEFAULT_K_LIMIT,
            max_states: self.max_states,
        }
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
