//! Verifying that a start value reaches 1.
//!
//! [`hyperstep_verify`] advances the value by blocks of `max(1, floor(log2 n) / 2)`
//! iterations, each applied as one multiply-add-shift. Blocks are never cut
//! short when they pass through 1, so the reported count can include a few
//! laps of the terminal 1 -> 2 -> 1 cycle. [`exact_stopping_time`] is the
//! one-iteration-at-a-time reference.

use std::time::Instant;

use rug::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::affine::{AffineError, BaseTable};

/// `ln(2/sqrt(3))`, the expected per-iteration decrease of `ln n`.
pub const LN_2_OVER_SQRT3: f64 = 0.143_841_036_225_890_1;

/// Default budget multiplier over the expected number of iterations.
pub const DEFAULT_BUDGET_MULT: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("start value must be positive")]
    NonPositive,
    #[error("iteration budget of {budget} exhausted after {steps} steps ({hypersteps} blocks); current value has {} bits", .current.significant_bits())]
    BudgetExhausted {
        budget: u64,
        steps: u64,
        hypersteps: u64,
        current: Box<Integer>,
    },
    #[error(transparent)]
    Affine(#[from] AffineError),
}

/// Outcome of one verification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub start_digits: u64,
    /// Total T-iterations performed, including any terminal-cycle overshoot.
    pub condensed_steps: u64,
    pub hypersteps: u64,
    pub reached_one: bool,
    /// Wall-clock seconds.
    pub elapsed: f64,
}

/// Reported once per block by [`hyperstep_verify`].
#[derive(Clone, Copy, Debug)]
pub struct Progress {
    pub hypersteps: u64,
    pub steps: u64,
    pub block: u32,
    pub bits: u32,
}

/// One iteration of `n -> n/2` (even), `n -> (3n+1)/2` (odd).
pub fn t_step(n: &Integer) -> Result<Integer, TrajectoryError> {
    if *n <= 0 {
        return Err(TrajectoryError::NonPositive);
    }
    Ok(if n.is_even() {
        Integer::from(n >> 1)
    } else {
        let mut v = Integer::from(n * 3u32);
        v += 1;
        v >> 1
    })
}

/// Smallest `s` with `T^s(n) = 1`, counting single iterations.
pub fn exact_stopping_time(n: &Integer, budget: u64) -> Result<u64, TrajectoryError> {
    if *n <= 0 {
        return Err(TrajectoryError::NonPositive);
    }
    let mut v = n.clone();
    let mut s = 0u64;
    while v != 1 {
        if s >= budget {
            return Err(TrajectoryError::BudgetExhausted {
                budget,
                steps: s,
                hypersteps: s,
                current: Box::new(v),
            });
        }
        v = t_step(&v)?;
        s += 1;
    }
    Ok(s)
}

/// Block length used for the next hyperstep: `max(1, floor(log2 n) div 2)`.
pub fn step_policy(n: &Integer) -> u32 {
    let log2 = n.significant_bits().saturating_sub(1);
    (log2 / 2).max(1)
}

/// Iteration budget for start value `n`: `mult * floor(log2 n) / log2(2/sqrt 3)`,
/// with `floor(log2 n)` clamped below at 1 so that tiny inputs get a usable budget.
pub fn default_budget(n: &Integer, mult: f64) -> u64 {
    let log2 = n.significant_bits().saturating_sub(1).max(1) as f64;
    let per_bit = std::f64::consts::LN_2 / LN_2_OVER_SQRT3;
    (mult * log2 * per_bit).ceil() as u64
}

/// Decimal length of a positive integer.
pub fn decimal_digits(n: &Integer) -> u64 {
    if *n == 0 {
        return 1;
    }
    // bits * log10(2) is either exact or one too high
    let bits = n.significant_bits() as f64;
    let guess = ((bits - 1.0) * std::f64::consts::LOG10_2).floor() as u32 + 1;
    let pow = Integer::from(Integer::u_pow_u(10, guess));
    let abs = n.clone().abs();
    if abs >= pow {
        guess as u64 + 1
    } else if guess > 1 && abs < Integer::from(Integer::u_pow_u(10, guess - 1)) {
        guess as u64 - 1
    } else {
        guess as u64
    }
}

/// Runs the condensed iteration from `n` until it reaches 1.
///
/// `budget` bounds the total number of T-iterations; it is checked before
/// each block, so the last block may run past it.
pub fn hyperstep_verify(
    n: &Integer,
    budget: u64,
    table: &BaseTable,
    mut progress: Option<&mut dyn FnMut(Progress)>,
) -> Result<TrajectoryRecord, TrajectoryError> {
    if *n <= 0 {
        return Err(TrajectoryError::NonPositive);
    }
    let start = Instant::now();
    let mut cur = n.clone();
    let mut steps = 0u64;
    let mut hypersteps = 0u64;
    while cur != 1 {
        if steps >= budget {
            return Err(TrajectoryError::BudgetExhausted {
                budget,
                steps,
                hypersteps,
                current: Box::new(cur),
            });
        }
        let block = step_policy(&cur);
        let map = table.poly_fast(&cur, block);
        cur = map.eval(&cur)?;
        steps += block as u64;
        hypersteps += 1;
        if let Some(cb) = progress.as_mut() {
            cb(Progress {
                hypersteps,
                steps,
                block,
                bits: cur.significant_bits(),
            });
        }
    }
    Ok(TrajectoryRecord {
        start_digits: decimal_digits(n),
        condensed_steps: steps,
        hypersteps,
        reached_one: true,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// [`hyperstep_verify`] with the shared base table and the default budget.
pub fn verify(n: &Integer) -> Result<TrajectoryRecord, TrajectoryError> {
    hyperstep_verify(n, default_budget(n, DEFAULT_BUDGET_MULT), BaseTable::shared(), None)
}
