use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use collatz_core::experiment::{run_experiment, ExperimentConfig, SampleFailure, SampleRecord};
use collatz_core::selfcheck::{run_selfcheck as core_selfcheck, SelfCheckReport};
use collatz_core::sieve::{sieve_counts_with, SieveConfig, SieveError, SieveLevel};
use collatz_core::stats::ExperimentSummary;
use collatz_core::trajectory::{default_budget, hyperstep_verify, Progress, TrajectoryError, TrajectoryRecord};
use collatz_core::{BaseTable, Integer};
use serde::Serialize;

use crate::config::{Command, RunConfig, ValueSource};
use crate::CliError;

/// Echo of the settings that determine a run's results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentEcho {
    pub digits: u64,
    pub count: u64,
    pub seed: u64,
    pub cache_depth: u32,
    pub budget_mult: f64,
}

impl From<&ExperimentConfig> for ExperimentEcho {
    fn from(c: &ExperimentConfig) -> Self {
        ExperimentEcho {
            digits: c.digits,
            count: c.count,
            seed: c.seed,
            cache_depth: c.cache_depth,
            budget_mult: c.budget_mult,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub command: Command,
    pub config: ExperimentEcho,
    /// Empty for `stats`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<SampleRecord>,
    pub failures: Vec<SampleFailure>,
    pub summary: Option<ExperimentSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumberReport {
    pub command: Command,
    pub record: TrajectoryRecord,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LevelCount {
    pub k: u32,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SieveReport {
    pub command: Command,
    pub k_max: u32,
    pub levels: Vec<LevelCount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfcheckOutput {
    pub command: Command,
    pub passed: bool,
    #[serde(flatten)]
    pub report: SelfCheckReport,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Verify(VerifyReport),
    Number(NumberReport),
    Sieve(SieveReport),
    Selfcheck(SelfcheckOutput),
}

impl Report {
    /// Verification anomalies that map to exit code 2.
    pub fn anomaly(&self) -> bool {
        match self {
            Report::Verify(v) => !v.failures.is_empty(),
            Report::Number(_) | Report::Sieve(_) => false,
            Report::Selfcheck(s) => !s.passed,
        }
    }
}

pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    match config.command {
        Command::Verify => run_verify(config, true).map(Report::Verify),
        Command::Stats => run_verify(config, false).map(Report::Verify),
        Command::VerifyNumber => run_verify_number(config).map(Report::Number),
        Command::Sieve => run_sieve(config).map(Report::Sieve),
        Command::Selfcheck => run_selfcheck(config).map(Report::Selfcheck),
    }
}

pub fn run_verify(config: &RunConfig, keep_records: bool) -> Result<VerifyReport, CliError> {
    let exp = config.experiment();
    let done = AtomicU64::new(0);
    let show = config.progress;
    let outcome = run_experiment(&exp, |index| {
        if show {
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!("[{n}/{}] sample {index} done", exp.count);
        }
    })
    .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(VerifyReport {
        command: config.command,
        config: ExperimentEcho::from(&exp),
        records: if keep_records { outcome.records } else { Vec::new() },
        failures: outcome.failures,
        summary: outcome.summary,
    })
}

/// Parses a positive decimal integer, ignoring all whitespace.
pub fn parse_decimal(text: &str) -> Result<Integer, CliError> {
    let digits: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(CliError::Usage("value must be a positive decimal integer".into()));
    }
    let n = Integer::from_str_radix(&digits, 10).map_err(|e| CliError::Usage(e.to_string()))?;
    if n == 0 {
        return Err(CliError::Usage("value must be positive".into()));
    }
    Ok(n)
}

pub fn run_verify_number(config: &RunConfig) -> Result<NumberReport, CliError> {
    let n = match &config.value {
        Some(ValueSource::Literal(s)) => parse_decimal(s)?,
        Some(ValueSource::File(p)) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_decimal(&text)?
        }
        None => return Err(CliError::Usage("no value given".into())),
    };
    let table = BaseTable::new(config.cache_depth).map_err(|e| CliError::Usage(e.to_string()))?;
    let budget = default_budget(&n, config.budget_mult);
    let mut tick = |p: Progress| {
        eprintln!("block {:>6}: +{} steps, {} total, {} bits left", p.hypersteps, p.block, p.steps, p.bits);
    };
    let progress: Option<&mut dyn FnMut(Progress)> = if config.progress { Some(&mut tick) } else { None };
    let record = hyperstep_verify(&n, budget, &table, progress).map_err(|e| match e {
        e @ TrajectoryError::BudgetExhausted { .. } => CliError::Anomaly(e.to_string()),
        e => CliError::Usage(e.to_string()),
    })?;
    Ok(NumberReport {
        command: Command::VerifyNumber,
        record,
    })
}

fn write_level(dir: &Path, level: &SieveLevel) -> Result<(), CliError> {
    let path = dir.join(format!("level_{}.txt", level.k));
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    level
        .write_residues(BufWriter::new(file))
        .map_err(|e| CliError::io(&path, e))
}

pub fn run_sieve(config: &RunConfig) -> Result<SieveReport, CliError> {
    let sieve_cfg: SieveConfig = config.sieve();
    if let Some(dir) = &config.emit_classes {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut write_err = None;
    let counts = sieve_counts_with(config.k_max, &sieve_cfg, |level| {
        if config.progress {
            eprintln!("level {:>2}: {} classes", level.k, level.count());
        }
        if let (Some(dir), None) = (&config.emit_classes, &write_err) {
            if let Err(e) = write_level(dir, level) {
                write_err = Some(e);
            }
        }
    })
    .map_err(|e| match e {
        e @ SieveError::MemoryGuard { .. } => CliError::Resource(e.to_string()),
        e => CliError::Usage(e.to_string()),
    })?;
    if let Some(e) = write_err {
        return Err(e);
    }
    Ok(SieveReport {
        command: Command::Sieve,
        k_max: config.k_max,
        levels: counts.into_iter().map(|(k, count)| LevelCount { k, count }).collect(),
        classes_dir: config.emit_classes.clone(),
    })
}

pub fn run_selfcheck(_config: &RunConfig) -> Result<SelfcheckOutput, CliError> {
    let report = core_selfcheck(BaseTable::shared());
    Ok(SelfcheckOutput {
        command: Command::Selfcheck,
        passed: report.passed(),
        report,
    })
}
