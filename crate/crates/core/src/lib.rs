//! Collatz verification for arbitrary-precision integers.
//!
//! Blocks of `k` iterations of `T(n) = n/2 | (3n+1)/2` are condensed into a
//! single affine map `(a*X + b) / 2^k` selected by `n mod 2^k`
//! ([`affine`]), which makes it practical to follow numbers with hundreds of
//! thousands of digits all the way down to 1 ([`trajectory`]). Alongside:
//! the residue-class sieve of non-shrinking classes ([`sieve`]),
//! step-count statistics ([`stats`]), seeded random experiments
//! ([`experiment`]) and a small self-check ([`selfcheck`]).

pub mod affine;
pub mod experiment;
pub mod selfcheck;
pub mod sieve;
pub mod stats;
pub mod trajectory;

pub use affine::{poly_direct, AffineError, AffineStep, BaseTable};
pub use sieve::{sieve_counts, sieve_level, survives, SieveConfig, SieveError, SieveLevel};
pub use stats::{expected_steps_model, ks_normal, summary_stats, ExperimentSummary, SampleSet};
pub use trajectory::{exact_stopping_time, hyperstep_verify, step_policy, t_step, TrajectoryError, TrajectoryRecord};

/// Re-exported so callers need not depend on `rug` directly for inputs.
pub use rug::Integer;
