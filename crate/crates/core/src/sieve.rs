//! Residue classes mod `2^k` whose members do not shrink within `k` iterations.
//!
//! A class `r mod 2^j` maps through `T^j` to `(3^o * X + b) / 2^j`, where `o`
//! counts the odd steps. Its members eventually fall below their start iff
//! `3^o < 2^j`. A class survives level `k` when that never happens for any
//! prefix `j <= k`.
//!
//! Levels are built by doubling: the children of a survivor `r` at level `k`
//! are `r` and `r + 2^k`, whose `k`-th iterates are `T^k(r)` and
//! `T^k(r) + 3^o`. Only the step `k + 1` needs checking for each child.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

/// Default highest sieve level.
pub const DEFAULT_K_LIMIT: u32 = 30;

/// Hard ceiling on the level: iterates (< 2 * 3^k) and residues stay in a `u64`.
pub const MAX_K: u32 = 36;

/// Default cap on the number of states a single level may hold.
pub const DEFAULT_MAX_STATES: usize = 1 << 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SieveError {
    #[error("residue {residue} is not below 2^{k}")]
    ResidueOutOfRange { residue: u64, k: u32 },
    #[error("level {k} outside 1..={limit}")]
    LevelOutOfRange { k: u32, limit: u32 },
    #[error("level {k} would need up to {estimate} states, above the cap of {cap}")]
    MemoryGuard { k: u32, estimate: usize, cap: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct SieveConfig {
    /// Highest level accepted (at most [`MAX_K`]).
    pub k_limit: u32,
    /// Largest number of states a level is allowed to allocate.
    pub max_states: usize,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            k_limit: DEFAULT_K_LIMIT,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

/// A surviving class at some level `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SurvivorState {
    pub residue: u64,
    /// Odd steps among the first `k` iterations.
    pub odd_count: u32,
    /// `T^k(residue)`.
    pub iterate: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveLevel {
    pub k: u32,
    /// Sorted by residue.
    pub survivors: Vec<SurvivorState>,
}

impl SieveLevel {
    /// Level 0: the single class mod 1.
    pub fn root() -> Self {
        SieveLevel {
            k: 0,
            survivors: vec![SurvivorState {
                residue: 0,
                odd_count: 0,
                iterate: 0,
            }],
        }
    }

    pub fn count(&self) -> usize {
        self.survivors.len()
    }

    pub fn residues(&self) -> impl Iterator<Item = u64> + '_ {
        self.survivors.iter().map(|s| s.residue)
    }

    /// Newline-delimited decimal residues, ascending.
    pub fn write_residues<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in self.residues() {
            writeln!(out, "{r}")?;
        }
        Ok(())
    }

    /// Survivors of level `k + 1`.
    pub fn next(&self, config: &SieveConfig) -> Result<SieveLevel, SieveError> {
        let k = self.k + 1;
        check_level(k, config)?;
        let estimate = 2 * self.survivors.len();
        if estimate > config.max_states {
            return Err(SieveError::MemoryGuard {
                k,
                estimate,
                cap: config.max_states,
            });
        }
        let bound = 1u64 << k;
        let high_bit = 1u64 << self.k;
        let mut low = Vec::with_capacity(self.survivors.len());
        let mut high = Vec::with_capacity(self.survivors.len());
        for s in &self.survivors {
            let lift = 3u64.pow(s.odd_count);
            for (residue, iterate, dest) in [
                (s.residue, s.iterate, &mut low),
                (s.residue | high_bit, s.iterate + lift, &mut high),
            ] {
                let (odd_count, iterate) = if iterate % 2 == 0 {
                    (s.odd_count, iterate / 2)
                } else {
                    (s.odd_count + 1, (3 * iterate + 1) / 2)
                };
                if 3u64.pow(odd_count) > bound {
                    dest.push(SurvivorState {
                        residue,
                        odd_count,
                        iterate,
                    });
                }
            }
        }
        // every child r + 2^k exceeds every child r, so concatenation stays sorted
        low.append(&mut high);
        Ok(SieveLevel { k, survivors: low })
    }
}

fn check_level(k: u32, config: &SieveConfig) -> Result<(), SieveError> {
    let limit = config.k_limit.min(MAX_K);
    if k == 0 || k > limit {
        return Err(SieveError::LevelOutOfRange { k, limit });
    }
    Ok(())
}

/// Whether the class `r mod 2^k` survives all prefixes `j = 1..=k`.
///
/// Walks the parity sequence of `r` directly; independent of the level
/// construction in [`SieveLevel::next`]. Supports `k <= 63`.
pub fn survives(r: u64, k: u32) -> Result<bool, SieveError> {
    if k > 63 {
        return Err(SieveError::LevelOutOfRange { k, limit: 63 });
    }
    if r >> k != 0 {
        return Err(SieveError::ResidueOutOfRange { residue: r, k });
    }
    let mut v = r as u128;
    let mut three_pow = 1u128;
    for j in 1..=k {
        if v % 2 == 0 {
            v /= 2;
        } else {
            v = (3 * v + 1) / 2;
            three_pow *= 3;
        }
        if three_pow < 1u128 << j {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Survivors at level `k`.
pub fn sieve_level(k: u32, config: &SieveConfig) -> Result<SieveLevel, SieveError> {
    check_level(k, config)?;
    let mut level = SieveLevel::root();
    while level.k < k {
        level = level.next(config)?;
    }
    Ok(level)
}

/// `(k, count)` for `k = 1..=k_max`. Each level is handed to `on_level`
/// before being dropped.
pub fn sieve_counts_with(
    k_max: u32,
    config: &SieveConfig,
    mut on_level: impl FnMut(&SieveLevel),
) -> Result<Vec<(u32, usize)>, SieveError> {
    check_level(k_max, config)?;
    let mut counts = Vec::with_capacity(k_max as usize);
    let mut level = SieveLevel::root();
    while level.k < k_max {
        level = level.next(config)?;
        on_level(&level);
        counts.push((level.k, level.count()));
    }
    Ok(counts)
}

pub fn sieve_counts(k_max: u32, config: &SieveConfig) -> Result<Vec<(u32, usize)>, SieveError> {
    sieve_counts_with(k_max, config, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survives_examples() {
        assert!(survives(3, 2).unwrap());
        assert!(!survives(1, 2).unwrap());
        assert!(!survives(0, 1).unwrap());
        assert!(survives(1, 1).unwrap());
        assert_eq!(
            survives(6, 1).unwrap_err(),
            SieveError::ResidueOutOfRange { residue: 6, k: 1 }
        );
        assert!(!survives(0, 1).unwrap());
        assert!(survives(1, 0).is_err());
    }

    #[test]
    fn level_examples() {
        let cfg = SieveConfig::default();
        let res = |k| sieve_level(k, &cfg).unwrap().residues().collect::<Vec<_>>();
        assert_eq!(res(2), vec![3]);
        assert_eq!(res(5), vec![7, 15, 27, 31]);
        assert_eq!(sieve_level(7, &cfg).unwrap().count(), 13);
    }

    #[test]
    fn counts_first_ten() {
        let counts = sieve_counts(10, &SieveConfig::default()).unwrap();
        assert_eq!(
            counts,
            vec![(1, 1), (2, 1), (3, 2), (4, 3), (5, 4), (6, 8), (7, 13), (8, 19), (9, 38), (10, 64)]
        );
    }

    #[test]
    fn level_range_errors() {
        let cfg = SieveConfig::default();
        assert_eq!(
            sieve_level(0, &cfg).unwrap_err(),
            SieveError::LevelOutOfRange { k: 0, limit: 30 }
        );
        assert_eq!(
            sieve_counts(31, &cfg).unwrap_err(),
            SieveError::LevelOutOfRange { k: 31, limit: 30 }
        );
        let wide = SieveConfig { k_limit: 99, ..cfg };
        assert_eq!(
            sieve_level(37, &wide).unwrap_err(),
            SieveError::LevelOutOfRange { k: 37, limit: MAX_K }
        );
    }

    #[test]
    fn memory_guard_trips() {
        let cfg = SieveConfig {
            max_states: 100,
            ..SieveConfig::default()
        };
        // count(10) = 64, so building level 11 needs up to 128 states
        assert_eq!(
            sieve_counts(12, &cfg).unwrap_err(),
            SieveError::MemoryGuard { k: 11, estimate: 128, cap: 100 }
        );
    }

    #[test]
    fn incremental_matches_direct_filter() {
        let cfg = SieveConfig::default();
        let mut level = SieveLevel::root();
        for k in 1..=14 {
            level = level.next(&cfg).unwrap();
            let direct: Vec<u64> = (0..1u64 << k).filter(|&r| survives(r, k).unwrap()).collect();
            assert_eq!(level.residues().collect::<Vec<_>>(), direct, "level {k}");
            if k >= 2 {
                assert!(level.residues().all(|r| r % 4 == 3));
            }
        }
    }

    #[test]
    fn children_reduce_to_parents() {
        let cfg = SieveConfig::default();
        let mut level = SieveLevel::root();
        for _ in 0..16 {
            let next = level.next(&cfg).unwrap();
            let parents: std::collections::HashSet<u64> = level.residues().collect();
            let mask = (1u64 << level.k) - 1;
            assert!(next.residues().all(|r| parents.contains(&(r & mask))));
            assert!(next.residues().zip(next.residues().skip(1)).all(|(a, b)| a < b));
            level = next;
        }
    }

    #[test]
    fn write_residues_format() {
        let level = sieve_level(5, &SieveConfig::default()).unwrap();
        let mut buf = Vec::new();
        level.write_residues(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "7\n15\n27\n31\n");
    }
}
