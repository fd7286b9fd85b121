//! Seeded random experiments: draw `count` numbers with a fixed number of
//! decimal digits, verify each, summarize the step counts.
//!
//! Sample `i` draws from its own ChaCha stream (`seed`, stream `i`), so the
//! values and results do not depend on how samples are spread over threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::affine::{AffineError, BaseTable, DEFAULT_CACHE_DEPTH};
use crate::stats::{summary_stats, ExperimentSummary, SampleSet};
use crate::trajectory::{default_budget, hyperstep_verify, TrajectoryError, TrajectoryRecord, DEFAULT_BUDGET_MULT};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("digits must be at least 1")]
    ZeroDigits,
    #[error("count must be at least 1")]
    ZeroCount,
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

/// Random stream for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform over `[10^(digits-1), 10^digits)`: a nonzero leading digit, then
/// uniform digits.
pub fn random_with_digits<R: Rng + ?Sized>(digits: u64, rng: &mut R) -> Integer {
    assert!(digits >= 1, "digits must be positive");
    let mut s = String::with_capacity(digits as usize);
    s.push(char::from(b'0' + rng.gen_range(1..=9u8)));
    for _ in 1..digits {
        s.push(char::from(b'0' + rng.gen_range(0..=9u8)));
    }
    Integer::from_str_radix(&s, 10).expect("decimal digits")
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub digits: u64,
    pub count: u64,
    pub seed: u64,
    pub cache_depth: u32,
    pub budget_mult: f64,
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            digits: 10_000,
            count: 100,
            seed: 42,
            cache_depth: DEFAULT_CACHE_DEPTH,
            budget_mult: DEFAULT_BUDGET_MULT,
            threads: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: u64,
    #[serde(flatten)]
    pub record: TrajectoryRecord,
}

/// A sample whose verification did not finish.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleFailure {
    pub index: u64,
    pub seed: u64,
    pub error: String,
    /// Steps done before giving up, when the budget ran out.
    pub steps: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    /// Sorted by index.
    pub records: Vec<SampleRecord>,
    pub failures: Vec<SampleFailure>,
    /// `None` when fewer than two samples succeeded.
    pub summary: Option<ExperimentSummary>,
}

/// Runs the experiment; `on_sample` is called after each finished sample
/// with its index (from worker threads, in no particular order).
pub fn run_experiment(
    config: &ExperimentConfig,
    on_sample: impl Fn(u64) + Sync,
) -> Result<ExperimentOutcome, ExperimentError> {
    if config.digits == 0 {
        return Err(ExperimentError::ZeroDigits);
    }
    if config.count == 0 {
        return Err(ExperimentError::ZeroCount);
    }
    let table = BaseTable::new(config.cache_depth)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.max(1))
        .build()?;
    let results: Vec<(u64, Result<TrajectoryRecord, TrajectoryError>)> = pool.install(|| {
        (0..config.count)
            .into_par_iter()
            .map(|index| {
                let n = random_with_digits(config.digits, &mut sample_rng(config.seed, index));
                let budget = default_budget(&n, config.budget_mult);
                let res = hyperstep_verify(&n, budget, &table, None);
                on_sample(index);
                (index, res)
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (index, res) in results {
        match res {
            Ok(record) => records.push(SampleRecord { index, record }),
            Err(e) => failures.push(SampleFailure {
                index,
                seed: config.seed,
                steps: match &e {
                    TrajectoryError::BudgetExhausted { steps, .. } => Some(*steps),
                    _ => None,
                },
                error: e.to_string(),
            }),
        }
    }
    let counts: Vec<u64> = records.iter().map(|r| r.record.condensed_steps).collect();
    let summary = SampleSet::new(config.digits, config.seed, counts)
        .ok()
        .and_then(|set| summary_stats(&set).ok());
    Ok(ExperimentOutcome {
        records,
        failures,
        summary,
    })
}
