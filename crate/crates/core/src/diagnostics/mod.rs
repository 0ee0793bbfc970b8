//! Empirical and closed-form moments of observed count series, plus the
//! statistical checks built on them.

mod appendix;
mod mc;
mod oracle;

use std::collections::BTreeMap;

use serde::Serialize;

pub use appendix::{appendix_checks, AppendixCheck, AppendixReport, GAP_P_THRESHOLD};
pub use mc::{
    equivalence_mc_test, simulate_observed, EquivalenceReport, SampleSize, SeedInfo,
    StatComparison, Verdict, JOINT_TV_THRESHOLD, MARGINAL_TV_THRESHOLD, MAX_ORACLE_TRUNCATION,
    MC_MAX_LAG, MIN_MC_LEN, Z_THRESHOLD,
};
pub use oracle::{joint_pmf_oracle, joint_pmf_oracle_auto, JointPmf, ORACLE_MASS_TOL};

use crate::equivalence::{canonicalize, UnderreportedModel};
use crate::error::{Error, Result};
use crate::processes::CountSeries;

/// Number of contiguous batches used for batch-means standard errors.
pub const BATCH_COUNT: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    /// Lags `1..=max_lag`; empty when the series is constant.
    pub acf: Vec<f64>,
    pub marginal_pmf: BTreeMap<u64, f64>,
    pub n: usize,
    /// Batch-means standard error of the mean; `NaN` below `2 * BATCH_COUNT`
    /// observations.
    pub se_mean: f64,
    /// Zero sample variance: the autocorrelation is undefined.
    pub degenerate: bool,
}

pub fn empirical_moments(series: &CountSeries, max_lag: usize) -> Result<MomentSummary> {
    moments_of(series.values(), max_lag)
}

pub fn moments_of(values: &[u64], max_lag: usize) -> Result<MomentSummary> {
    let n = values.len();
    let required = 10 * max_lag;
    if n <= required || n < 2 {
        return Err(Error::InsufficientData {
            required: required.max(1),
            got: n,
        });
    }
    let xs: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    let mean = mean(&xs);
    let variance = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let degenerate = variance == 0.0;
    let acf = if degenerate {
        Vec::new()
    } else {
        autocorrelations(&xs, max_lag)
    };
    Ok(MomentSummary {
        mean,
        variance,
        acf,
        marginal_pmf: marginal_pmf(values),
        n,
        se_mean: batch_means_se(&xs),
        degenerate,
    })
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample autocorrelations `r_k = c_k / c_0` for `k = 1..=max_lag`, with
/// `c_k = (1/n) Σ (x_t - x̄)(x_{t+k} - x̄)`.
pub fn autocorrelations(xs: &[f64], max_lag: usize) -> Vec<f64> {
    let m = mean(xs);
    let d: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let c0: f64 = d.iter().map(|v| v * v).sum();
    (1..=max_lag)
        .map(|k| {
            if k >= d.len() || c0 == 0.0 {
                return 0.0;
            }
            d.iter().zip(&d[k..]).map(|(a, b)| a * b).sum::<f64>() / c0
        })
        .collect()
}

pub fn marginal_pmf(values: &[u64]) -> BTreeMap<u64, f64> {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_default() += 1;
    }
    let n = values.len() as f64;
    counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect()
}

/// Split into [`BATCH_COUNT`] contiguous batches (remainder dropped) and apply
/// `stat` to each.
pub(crate) fn batch_stats<F>(xs: &[f64], stat: F) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let size = xs.len() / BATCH_COUNT;
    if size < 2 {
        return None;
    }
    Some(xs.chunks_exact(size).take(BATCH_COUNT).map(stat).collect())
}

/// Standard error of the full-sample statistic from the spread of its batch
/// values: `sd(batch values) / sqrt(batches)`.
pub(crate) fn se_from_batches(batch_values: &[f64]) -> f64 {
    let b = batch_values.len() as f64;
    let m = mean(batch_values);
    let v = batch_values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1.0);
    (v / b).sqrt()
}

pub fn batch_means_se(xs: &[f64]) -> f64 {
    batch_stats(xs, mean)
        .map(|b| se_from_batches(&b))
        .unwrap_or(f64::NAN)
}

/// Total-variation distance `½ Σ |p(k) - q(k)|` over the union of supports.
pub fn tv_distance<K: Ord + Copy>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut total = 0.0;
    for (k, pv) in p {
        total += (pv - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, qv) in q {
        if !p.contains_key(k) {
            total += qv.abs();
        }
    }
    0.5 * total
}

/// Closed-form moments of an observed process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoreticalMoments {
    pub mean: f64,
    pub variance: f64,
    pub acf: Vec<f64>,
}

/// Observed-process moments from the canonical form `q* ∘ INAR(1)(λ*, α*)`:
/// the marginal is `Poisson(q*λ*/(1-α*))` and `acf_k = q* α*^k`.
pub fn theoretical_observed_moments(
    model: &UnderreportedModel,
    max_lag: usize,
) -> Result<TheoreticalMoments> {
    let c = canonicalize(model)?;
    let mean = c.q_star * c.lambda_star / (1.0 - c.alpha_star);
    let acf = (1..=max_lag)
        .map(|k| c.q_star * c.alpha_star.powi(k as i32))
        .collect();
    Ok(TheoreticalMoments {
        mean,
        variance: mean,
        acf,
    })
}
