//! Small-scale consistency suites run by `collatz selfcheck`.

use rug::Integer;
use serde::Serialize;

use crate::affine::{poly_direct_u64, BaseTable};
use crate::sieve::{survives, SieveConfig, SieveLevel};
use crate::trajectory::{exact_stopping_time, hyperstep_verify, t_step};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub checks: u64,
    /// First failure, if any.
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelfCheckReport {
    pub suites: Vec<SuiteResult>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

struct Suite {
    name: &'static str,
    checks: u64,
    detail: Option<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite {
            name,
            checks: 0,
            detail: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) -> bool {
        self.checks += 1;
        if !ok && self.detail.is_none() {
            self.detail = Some(what());
        }
        ok
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            passed: self.detail.is_none(),
            checks: self.checks,
            detail: self.detail,
        }
    }
}

fn iterate(x: &Integer, k: u32) -> Integer {
    let mut v = x.clone();
    for _ in 0..k {
        v = t_step(&v).expect("positive");
    }
    v
}

/// Table-backed construction and block evaluation against single steps,
/// and condensed verification against the exact stopping time.
fn oracle_equivalence(table: &BaseTable) -> SuiteResult {
    let mut s = Suite::new("oracle-equivalence");
    for k in 1..=10u32 {
        for r in 0..1u64 << k {
            let fast = table.poly_fast(&Integer::from(r), k);
            let direct = poly_direct_u64(r, k);
            if !s.check(fast == direct, || format!("poly_fast({r}, {k}) = {fast}, expected {direct}")) {
                return s.finish();
            }
            // a positive member of the class, away from the small fixed points
            let x = Integer::from(r) + (Integer::from(1_000_003u64) << k);
            let got = fast.eval(&x);
            let want = iterate(&x, k);
            if !s.check(got.as_ref() == Ok(&want), || {
                format!("block <{k},{r}> at {x}: {got:?}, single steps give {want}")
            }) {
                return s.finish();
            }
        }
    }
    for n in 1..=5_000u64 {
        let n = Integer::from(n);
        let exact = exact_stopping_time(&n, 100_000).expect("small values reach 1");
        let bound = (n.significant_bits() as u64 - 1) / 2 + 2;
        let ok = match hyperstep_verify(&n, 100_000, table, None) {
            Ok(rec) => rec.condensed_steps >= exact && rec.condensed_steps - exact <= bound,
            Err(_) => false,
        };
        if !s.check(ok, || format!("hyperstep count for {n} disagrees with exact time {exact}")) {
            break;
        }
    }
    s.finish()
}

/// `C_{k+l,r} = C_{k, C_{l,r}(r) mod 2^k} ∘ C_{l, r mod 2^l}`.
fn composition_law() -> SuiteResult {
    let mut s = Suite::new("composition-law");
    for k in 1..=5u32 {
        for l in 1..=5u32 {
            for r in 0..1u64 << (k + l) {
                let inner = poly_direct_u64(r, l);
                let image = inner.eval(&Integer::from(r)).expect("r in its own class");
                let outer = poly_direct_u64(Integer::from(image.keep_bits_ref(k)).to_u64().unwrap(), k);
                let whole = poly_direct_u64(r, k + l);
                let composed = outer.compose(&inner);
                if !s.check(whole == composed, || format!("k={k} l={l} r={r}: {whole} != {composed}")) {
                    return s.finish();
                }
            }
        }
    }
    s.finish()
}

fn sieve_brute_force() -> SuiteResult {
    let mut s = Suite::new("sieve-brute-force");
    let config = SieveConfig::default();
    let mut level = SieveLevel::root();
    for k in 1..=12u32 {
        level = match level.next(&config) {
            Ok(l) => l,
            Err(e) => {
                s.check(false, || e.to_string());
                return s.finish();
            }
        };
        // a class survives iff every prefix block has a > 2^j
        let brute: Vec<u64> = (0..1u64 << k)
            .filter(|&r| (1..=k).all(|j| poly_direct_u64(r, j).a > Integer::from(1) << j))
            .collect();
        let got: Vec<u64> = level.residues().collect();
        s.check(got == brute, || format!("level {k}: {} survivors, brute force {}", got.len(), brute.len()));
        let walk: Vec<u64> = (0..1u64 << k).filter(|&r| survives(r, k).unwrap_or(false)).collect();
        s.check(walk == brute, || format!("survives() disagrees at level {k}"));
    }
    s.finish()
}

pub fn run_selfcheck(table: &BaseTable) -> SelfCheckReport {
    SelfCheckReport {
        suites: vec![oracle_equivalence(table), composition_law(), sieve_brute_force()],
    }
}
