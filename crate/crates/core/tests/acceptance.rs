//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any gating criterion fails.
//!
//! Optional long runs:
//!   COLLATZ_ACCEPT_K30=1     sieve level 30 (12,771,274 classes)
//!   COLLATZ_ACCEPT_SMOKE=1   one 10^6-digit verification

use std::time::{Duration, Instant};

use collatz_core::affine::{poly_direct, poly_direct_u64, AffineStep, BaseTable};
use collatz_core::experiment::{random_with_digits, run_experiment, sample_rng, ExperimentConfig};
use collatz_core::sieve::{sieve_counts, SieveConfig};
use collatz_core::stats::expected_steps_model;
use collatz_core::trajectory::{exact_stopping_time, hyperstep_verify, verify};
use collatz_core::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        passed: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        passed: false,
        detail: detail.into(),
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    Outcome { passed: ok, detail }
}

/// Peak resident set of this process in bytes (Linux only).
fn peak_rss() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

const PAPER_SIEVE_10: [(u32, usize); 10] =
    [(1, 1), (2, 1), (3, 2), (4, 3), (5, 4), (6, 8), (7, 13), (8, 19), (9, 38), (10, 64)];

fn criterion_1() -> Outcome {
    let cfg = SieveConfig::default();
    let t = Instant::now();
    let ten = sieve_counts(10, &cfg).expect("k=10 in range");
    let t10 = t.elapsed();
    if ten != PAPER_SIEVE_10 {
        return fail(format!("k<=10 counts {ten:?}"));
    }
    if t10 >= Duration::from_secs(1) {
        return fail(format!("k<=10 took {t10:?}"));
    }
    let t = Instant::now();
    let deep = sieve_counts(25, &cfg).expect("k=25 in range");
    let t25 = t.elapsed();
    let c25 = deep.last().unwrap().1;
    let rss = peak_rss();
    let mem_ok = rss.is_none_or(|b| b < 2 << 30);
    check(
        c25 == 573_162 && t25 < Duration::from_secs(600) && mem_ok,
        format!(
            "k<=10 table exact in {t10:.2?}; count(2^25) = {c25} (want 573162) in {t25:.2?}; peak RSS {}",
            rss.map_or("n/a".into(), |b| format!("{} MiB", b >> 20))
        ),
    )
}

fn criterion_1_k30() -> Outcome {
    let t = Instant::now();
    let counts = sieve_counts(30, &SieveConfig::default()).expect("k=30 in range");
    let want = [(25, 573_162), (26, 1_037_374), (27, 1_762_293), (28, 3_524_586), (29, 6_385_637), (30, 12_771_274)];
    let got: Vec<(u32, usize)> = counts[24..].to_vec();
    check(got == want, format!("counts 25..30 = {got:?} in {:.1?}", t.elapsed()))
}

fn criterion_2() -> Outcome {
    let printed: [(u64, u32, u64, u64); 12] = [
        (0, 2, 1, 0),
        (1, 2, 3, 1),
        (2, 2, 3, 2),
        (3, 2, 9, 5),
        (3, 5, 9, 5),
        (7, 5, 81, 73),
        (11, 5, 27, 23),
        (15, 5, 81, 65),
        (19, 5, 27, 31),
        (23, 5, 27, 19),
        (27, 5, 81, 85),
        (31, 5, 243, 211),
    ];
    let table = BaseTable::shared();
    for (r, k, a, b) in printed {
        let want = AffineStep::new(a, b, k);
        let direct = poly_direct_u64(r, k);
        let fast = table.poly_fast(&Integer::from(r), k);
        if direct != want || fast != want {
            return fail(format!("C_{{{k},{r}}}: direct {direct}, fast {fast}, want {want}"));
        }
    }
    let shallow = BaseTable::new(1).unwrap();
    let mut checked = 0u64;
    for k in 1..=12u32 {
        for r in 0..1u64 << k {
            let r = Integer::from(r);
            let direct = poly_direct(&r, k);
            if table.poly_fast(&r, k) != direct || shallow.poly_fast(&r, k) != direct {
                return fail(format!("fast != direct at k={k} r={r}"));
            }
            checked += 1;
        }
    }
    pass(format!("12 printed maps exact; fast == direct on all {checked} (k<=12, r<2^k) with depths 8 and 1"))
}

fn criterion_3() -> Outcome {
    let mut checked = 0u64;
    for k in 1..=6u32 {
        for l in 1..=6u32 {
            for r in 0..1u64 << (k + l) {
                let inner = poly_direct_u64(r, l);
                let image = inner.eval(&Integer::from(r)).unwrap();
                let outer = poly_direct(&image, k);
                if poly_direct_u64(r, k + l) != outer.compose(&inner) {
                    return fail(format!("law fails at k={k} l={l} r={r}"));
                }
                checked += 1;
            }
        }
    }
    pass(format!("composition law holds on {checked} (k, l, r) triples"))
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let table = BaseTable::shared();
    let mut max_over = 0u64;
    for i in 0..10_000 {
        let n = Integer::from(rng.gen_range(1..1u64 << 40));
        let exact = match exact_stopping_time(&n, 10_000_000) {
            Ok(s) => s,
            Err(e) => return fail(format!("oracle failed on {n}: {e}")),
        };
        let rec = match hyperstep_verify(&n, 10_000_000, table, None) {
            Ok(r) => r,
            Err(e) => return fail(format!("sample {i} ({n}): {e}")),
        };
        let bound = (n.significant_bits() as u64 - 1) / 2 + 2;
        if !rec.reached_one || rec.condensed_steps < exact || rec.condensed_steps - exact > bound {
            return fail(format!("n={n}: condensed {} vs exact {exact}, bound {bound}", rec.condensed_steps));
        }
        max_over = max_over.max(rec.condensed_steps - exact);
    }
    let dt = t.elapsed();
    check(
        dt < Duration::from_secs(60),
        format!("10000 values < 2^40 agree with the exact oracle (max overshoot {max_over}) in {dt:.2?}"),
    )
}

fn criteria_5_and_6() -> (Outcome, Outcome) {
    let cfg = ExperimentConfig {
        digits: 10_000,
        count: 1000,
        seed: 20240601,
        threads: 1,
        ..ExperimentConfig::default()
    };
    let t = Instant::now();
    let out = run_experiment(&cfg, |_| {}).expect("valid config");
    let dt = t.elapsed();
    let Some(s) = out.summary.filter(|_| out.failures.is_empty()) else {
        let f = fail(format!("{} samples failed", out.failures.len()));
        return (f, fail("no summary"));
    };
    let skew = s.skewness.unwrap_or(f64::NAN);
    let kurt = s.kurtosis.unwrap_or(f64::NAN);
    let p = s.ks_p_approx.unwrap_or(f64::NAN);
    let c5 = check(
        (159_500.0..=160_700.0).contains(&s.mean)
            && (1_200.0..=1_900.0).contains(&s.std)
            && skew.abs() <= 0.25
            && (2.6..=3.4).contains(&kurt)
            && p > 0.001
            && dt < Duration::from_secs(600),
        format!(
            "n={} mean {:.1} std {:.1} skew {skew:.4} kurt {kurt:.4} KS D {:.4} p {p:.3}; {dt:.1?} single-threaded",
            s.n,
            s.mean,
            s.std,
            s.ks_statistic.unwrap_or(f64::NAN)
        ),
    );
    let c6 = check(
        (0.995..=1.005).contains(&s.mean_over_model),
        format!("mean / model = {:.3} / {:.3} = {:.5}", s.mean, s.model_mean, s.mean_over_model),
    );
    (c5, c6)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn timed_runs(digits: u64, count: u64, seed: u64) -> Result<Vec<f64>, String> {
    (0..count)
        .map(|i| {
            let n = random_with_digits(digits, &mut sample_rng(seed, i));
            verify(&n).map(|r| r.elapsed).map_err(|e| e.to_string())
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let small = match timed_runs(10_000, 15, 7) {
        Ok(v) => median(v),
        Err(e) => return fail(e),
    };
    let large = match timed_runs(100_000, 5, 7) {
        Ok(v) => median(v),
        Err(e) => return fail(e),
    };
    let ratio = large / small;
    check(
        ratio <= 30.0 && large <= 60.0,
        format!("median 10^4 digits {small:.4}s, 10^5 digits {large:.4}s, ratio {ratio:.1} (limit 30)"),
    )
}

fn criterion_8_smoke() -> Outcome {
    let n = random_with_digits(1_000_000, &mut sample_rng(8, 0));
    match verify(&n) {
        Ok(r) => check(
            r.elapsed < 900.0,
            format!("10^6 digits: {} steps in {:.2}s (model {:.0})", r.condensed_steps, r.elapsed, expected_steps_model(1_000_000)),
        ),
        Err(e) => fail(e.to_string()),
    }
}

fn report(name: &'static str, o: Outcome, results: &mut Vec<(&'static str, Outcome)>) {
    println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    results.push((name, o));
}

fn main() {
    // cargo passes harness flags (e.g. --nocapture, filters); none apply here
    let env_on = |k: &str| std::env::var(k).is_ok_and(|v| v == "1");
    let mut results: Vec<(&'static str, Outcome)> = Vec::new();

    report("1 (sieve table)", criterion_1(), &mut results);
    if env_on("COLLATZ_ACCEPT_K30") {
        report("1b (sieve k=30, optional)", criterion_1_k30(), &mut results);
    } else {
        println!("SKIP criterion 1b (sieve k=30, optional): set COLLATZ_ACCEPT_K30=1");
    }
    report("2 (printed maps, fast == direct)", criterion_2(), &mut results);
    report("3 (composition law)", criterion_3(), &mut results);
    report("4 (oracle equivalence)", criterion_4(), &mut results);
    let (c5, c6) = criteria_5_and_6();
    report("5 (statistics at 10^4 digits)", c5, &mut results);
    report("6 (model check)", c6, &mut results);
    report("7 (scaling 10^5 / 10^4)", criterion_7(), &mut results);
    if env_on("COLLATZ_ACCEPT_SMOKE") {
        report("8 (10^6-digit smoke, non-gating)", criterion_8_smoke(), &mut results);
    } else {
        println!("SKIP criterion 8 (10^6-digit smoke, non-gating): set COLLATZ_ACCEPT_SMOKE=1");
    }

    let failed: Vec<&str> = results
        .iter()
        .filter(|(name, o)| !o.passed && !name.starts_with('8'))
        .map(|(name, _)| *name)
        .collect();
    if failed.is_empty() {
        println!("acceptance: all {} gating criteria passed", results.iter().filter(|(n, _)| !n.starts_with('8')).count());
    } else {
        println!("acceptance: FAILED {failed:?}");
        std::process::exit(1);
    }
}
