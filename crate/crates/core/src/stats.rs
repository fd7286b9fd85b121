//! Step-count statistics over repeated experiments.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::trajectory::LN_2_OVER_SQRT3;

/// Smallest sample accepted by [`ks_normal`].
pub const KS_MIN_SAMPLES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample has zero variance")]
    ZeroVariance,
    #[error("step counts must be positive")]
    NonPositiveCount,
}

/// Step counts from repeated random experiments at one input size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSet {
    pub digits: u64,
    pub seed: u64,
    pub counts: Vec<u64>,
}

impl SampleSet {
    pub fn new(digits: u64, seed: u64, counts: Vec<u64>) -> Result<Self, StatsError> {
        if counts.contains(&0) {
            return Err(StatsError::NonPositiveCount);
        }
        Ok(SampleSet { digits, seed, counts })
    }

    fn values(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// Summary of one [`SampleSet`].
///
/// `skewness` and `kurtosis` are `None` when undefined (fewer than three
/// samples or zero variance); the KS fields are `None` below
/// [`KS_MIN_SAMPLES`] samples or at zero variance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    /// Population skewness g1.
    pub skewness: Option<f64>,
    /// Population kurtosis m4 / m2^2 (normal = 3).
    pub kurtosis: Option<f64>,
    pub ks_statistic: Option<f64>,
    /// Asymptotic Kolmogorov p-value; approximate because mean and
    /// deviation are estimated from the same sample.
    pub ks_p_approx: Option<f64>,
    pub model_mean: f64,
    pub mean_over_model: f64,
}

/// Expected number of iterations to reach 1 for a start value with
/// `digits` decimal places: `digits * ln 10 / ln(2/sqrt 3)`.
pub fn expected_steps_model(digits: u64) -> f64 {
    digits as f64 * std::f64::consts::LN_10 / LN_2_OVER_SQRT3
}

/// Central moments of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Population central moments.
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl Moments {
    /// Two passes: mean first, then central sums.
    pub fn of(xs: &[f64]) -> Moments {
        let n = xs.len();
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            s2 += d2;
            s3 += d2 * d;
            s4 += d2 * d2;
        }
        Moments {
            n,
            mean,
            m2: s2 / nf,
            m3: s3 / nf,
            m4: s4 / nf,
        }
    }

    pub fn sample_std(&self) -> f64 {
        (self.m2 * self.n as f64 / (self.n as f64 - 1.0)).sqrt()
    }

    fn degenerate(&self) -> bool {
        // spread below rounding noise of the mean counts as constant
        self.m2 <= (self.mean.abs() * 1e-12).powi(2)
    }

    pub fn skewness(&self) -> Option<f64> {
        (self.n >= 3 && !self.degenerate()).then(|| self.m3 / self.m2.powf(1.5))
    }

    pub fn kurtosis(&self) -> Option<f64> {
        (self.n >= 3 && !self.degenerate()).then(|| self.m4 / (self.m2 * self.m2))
    }
}

pub fn summary_stats(samples: &SampleSet) -> Result<ExperimentSummary, StatsError> {
    let xs = samples.values();
    summarize(&xs, samples.digits)
}

/// [`summary_stats`] on raw values.
pub fn summarize(xs: &[f64], digits: u64) -> Result<ExperimentSummary, StatsError> {
    if xs.len() < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let m = Moments::of(xs);
    let ks = if xs.len() >= KS_MIN_SAMPLES {
        ks_normal_values(xs).ok()
    } else {
        None
    };
    let model_mean = expected_steps_model(digits);
    Ok(ExperimentSummary {
        n: xs.len(),
        mean: m.mean,
        std: m.sample_std(),
        skewness: m.skewness(),
        kurtosis: m.kurtosis(),
        ks_statistic: ks.map(|k| k.statistic),
        ks_p_approx: ks.map(|k| k.p_value),
        model_mean,
        mean_over_model: m.mean / model_mean,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov-Smirnov test against a normal with the sample's own mean and
/// (n - 1) standard deviation.
pub fn ks_normal(samples: &SampleSet) -> Result<KsResult, StatsError> {
    ks_normal_values(&samples.values())
}

pub fn ks_normal_values(xs: &[f64]) -> Result<KsResult, StatsError> {
    if xs.len() < KS_MIN_SAMPLES {
        return Err(StatsError::TooFewSamples {
            needed: KS_MIN_SAMPLES,
            got: xs.len(),
        });
    }
    let statistic = ks_statistic(xs)?;
    let p_value = kolmogorov_survival((xs.len() as f64).sqrt() * statistic);
    Ok(KsResult { statistic, p_value })
}

/// Two-sided `D = sup |F_n(x) - Phi((x - mean)/std)|` over the sorted sample.
/// No minimum size; [`ks_normal`] adds that.
pub fn ks_statistic(xs: &[f64]) -> Result<f64, StatsError> {
    if xs.len() < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let m = Moments::of(xs);
    if m.degenerate() {
        return Err(StatsError::ZeroVariance);
    }
    let normal = Normal::new(m.mean, m.sample_std()).map_err(|_| StatsError::ZeroVariance)?;
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0f64, f64::max);
    Ok(d.clamp(0.0, 1.0))
}

/// `P(K > lambda)` for the limiting Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // theta-function form converges fast for small lambda
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut cdf = 0.0;
        for j in 1..=20 {
            let odd = (2 * j - 1) as f64;
            cdf += (-odd * odd * pi2 / (8.0 * lambda * lambda)).exp();
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
