use std::fmt::Write as _;

use collatz_core::stats::ExperimentSummary;

use crate::commands::{NumberReport, Report, SelfcheckOutput, SieveReport, VerifyReport};
use crate::config::{Command, OutputFormat};
use crate::CliError;

pub fn render(report: &Report, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => render_json(report),
        OutputFormat::Csv => render_csv(report),
        OutputFormat::Text => Ok(render_text(report)),
    }
}

fn render_json(report: &Report) -> Result<String, CliError> {
    let value = match report {
        Report::Verify(r) => serde_json::to_string_pretty(r),
        Report::Number(r) => serde_json::to_string_pretty(r),
        Report::Sieve(r) => serde_json::to_string_pretty(r),
        Report::Selfcheck(r) => serde_json::to_string_pretty(r),
    };
    value.map(|s| s + "\n").map_err(|e| CliError::Output(e.to_string()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

const SUMMARY_HEADER: [&str; 9] = [
    "n",
    "mean",
    "std",
    "skewness",
    "kurtosis",
    "ks_statistic",
    "ks_p_approx",
    "model_mean",
    "mean_over_model",
];

fn summary_row(s: &ExperimentSummary) -> Vec<String> {
    vec![
        s.n.to_string(),
        s.mean.to_string(),
        s.std.to_string(),
        opt(s.skewness),
        opt(s.kurtosis),
        opt(s.ks_statistic),
        opt(s.ks_p_approx),
        s.model_mean.to_string(),
        s.mean_over_model.to_string(),
    ]
}

fn render_csv(report: &Report) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    match report {
        Report::Verify(r) if r.command == Command::Stats => {
            w.write_record(SUMMARY_HEADER).map_err(err)?;
            if let Some(s) = &r.summary {
                w.write_record(summary_row(s)).map_err(err)?;
            }
        }
        Report::Verify(r) => {
            w.write_record(["index", "start_digits", "condensed_steps", "hypersteps", "reached_one", "elapsed"])
                .map_err(err)?;
            for s in &r.records {
                let rec = &s.record;
                w.write_record([
                    s.index.to_string(),
                    rec.start_digits.to_string(),
                    rec.condensed_steps.to_string(),
                    rec.hypersteps.to_string(),
                    rec.reached_one.to_string(),
                    rec.elapsed.to_string(),
                ])
                .map_err(err)?;
            }
        }
        Report::Number(r) => {
            w.write_record(["start_digits", "condensed_steps", "hypersteps", "reached_one", "elapsed"])
                .map_err(err)?;
            let rec = &r.record;
            w.write_record([
                rec.start_digits.to_string(),
                rec.condensed_steps.to_string(),
                rec.hypersteps.to_string(),
                rec.reached_one.to_string(),
                rec.elapsed.to_string(),
            ])
            .map_err(err)?;
        }
        Report::Sieve(r) => {
            w.write_record(["k", "count"]).map_err(err)?;
            for l in &r.levels {
                w.write_record([l.k.to_string(), l.count.to_string()]).map_err(err)?;
            }
        }
        Report::Selfcheck(r) => {
            w.write_record(["suite", "passed", "checks", "detail"]).map_err(err)?;
            for s in &r.report.suites {
                w.write_record([
                    s.name.to_string(),
                    s.passed.to_string(),
                    s.checks.to_string(),
                    s.detail.clone().unwrap_or_default(),
                ])
                .map_err(err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn render_text(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Verify(r) => text_verify(&mut out, r),
        Report::Number(r) => text_number(&mut out, r),
        Report::Sieve(r) => text_sieve(&mut out, r),
        Report::Selfcheck(r) => text_selfcheck(&mut out, r),
    }
    out
}

fn text_summary(out: &mut String, s: &ExperimentSummary) {
    let undefined = |v: Option<f64>, prec: usize| v.map_or("undefined".to_string(), |x| format!("{x:.prec$}"));
    let _ = writeln!(out, "samples          {}", s.n);
    let _ = writeln!(out, "mean steps       {:.1}", s.mean);
    let _ = writeln!(out, "std deviation    {:.1}", s.std);
    let _ = writeln!(out, "skewness         {}", undefined(s.skewness, 4));
    let _ = writeln!(out, "kurtosis         {}", undefined(s.kurtosis, 4));
    let _ = writeln!(out, "KS statistic     {}", undefined(s.ks_statistic, 5));
    let _ = writeln!(out, "KS p (approx.)   {}", undefined(s.ks_p_approx, 4));
    let _ = writeln!(out, "model mean       {:.1}", s.model_mean);
    let _ = writeln!(out, "mean / model     {:.5}", s.mean_over_model);
}

fn text_verify(out: &mut String, r: &VerifyReport) {
    let c = &r.config;
    let _ = writeln!(out, "digits={} count={} seed={}", c.digits, c.count, c.seed);
    if !r.records.is_empty() {
        let _ = writeln!(out, "{:>8} {:>14} {:>10} {:>10}", "index", "steps", "blocks", "seconds");
        for s in &r.records {
            let _ = writeln!(
                out,
                "{:>8} {:>14} {:>10} {:>10.4}",
                s.index, s.record.condensed_steps, s.record.hypersteps, s.record.elapsed
            );
        }
    }
    for f in &r.failures {
        let _ = writeln!(out, "FAILED sample {} (seed {}): {}", f.index, f.seed, f.error);
    }
    match &r.summary {
        Some(s) => text_summary(out, s),
        None => {
            let _ = writeln!(out, "summary unavailable: fewer than two completed samples");
        }
    }
}

fn text_number(out: &mut String, r: &NumberReport) {
    let rec = &r.record;
    let _ = writeln!(out, "digits           {}", rec.start_digits);
    let _ = writeln!(out, "reached 1        {}", rec.reached_one);
    let _ = writeln!(out, "steps            {}", rec.condensed_steps);
    let _ = writeln!(out, "blocks           {}", rec.hypersteps);
    let _ = writeln!(out, "seconds          {:.4}", rec.elapsed);
}

fn text_sieve(out: &mut String, r: &SieveReport) {
    let _ = writeln!(out, "{:>8} {:>12}", "modulus", "survivors");
    for l in &r.levels {
        let _ = writeln!(out, "{:>8} {:>12}", format!("2^{}", l.k), l.count);
    }
    if let Some(dir) = &r.classes_dir {
        let _ = writeln!(out, "classes written to {}", dir.display());
    }
}

fn text_selfcheck(out: &mut String, r: &SelfcheckOutput) {
    for s in &r.report.suites {
        let status = if s.passed { "PASS" } else { "FAIL" };
        let _ = write!(out, "{status} {:<20} {} checks", s.name, s.checks);
        if let Some(d) = &s.detail {
            let _ = write!(out, ": {d}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "{}", if r.passed { "all suites passed" } else { "self-check FAILED" });
}
