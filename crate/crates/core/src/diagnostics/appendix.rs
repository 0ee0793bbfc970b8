//! Statistical checks of the first-sighting / re-sighting decomposition of an
//! individual-level trace against the INAR(∞) image of `q ∘ INAR(1)`.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{batch_stats, mean, se_from_batches, Z_THRESHOLD};
use crate::equivalence::transform_a;
use crate::error::{Error, Result};
use crate::processes::{AppendixTrace, Inar1Spec};

/// Minimum p-value for the chi-square gap test (two-sided 3σ tail mass).
pub const GAP_P_THRESHOLD: f64 = 0.0027;

/// Largest first-sighting age whose rate is checked individually.
pub const MAX_CHECKED_AGE: u64 = 5;

/// Minimum expected count per chi-square bin.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixCheck {
    pub name: String,
    pub observed: f64,
    pub target: f64,
    /// z-score for moment checks, chi-square statistic for the gap test,
    /// number of violations for exact checks.
    pub statistic: f64,
    /// Chi-square p-value; absent for other checks.
    pub p_value: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixReport {
    pub lambda_y: f64,
    pub beta_y: f64,
    pub gamma_y: f64,
    pub checks: Vec<AppendixCheck>,
    pub pass: bool,
}

fn to_f64(xs: &[u64]) -> Vec<f64> {
    xs.iter().map(|&x| x as f64).collect()
}

/// z-test of a series mean against `target` with a batch-means standard
/// error. A zero standard error passes only on exact agreement.
fn mean_check(name: String, xs: &[f64], target: f64) -> AppendixCheck {
    let observed = mean(xs);
    let se = batch_stats(xs, mean)
        .map(|b| se_from_batches(&b))
        .unwrap_or(f64::NAN);
    let diff = observed - target;
    let z = if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    AppendixCheck {
        name,
        observed,
        target,
        statistic: z,
        p_value: None,
        pass: z.abs() <= Z_THRESHOLD,
    }
}

/// Chi-square goodness of fit of re-sighting gaps to `Geom(1 - γ)` on
/// `{1, 2, ...}`. Bins `1..=K` are kept while their expected count is at least
/// 5 and the tail `> K` is pooled.
fn gap_check(gaps: &[u64], gamma: f64, survival_possible: bool) -> AppendixCheck {
    let name = format!("reobservation_gaps_geom({})", 1.0 - gamma);
    if gaps.is_empty() {
        return AppendixCheck {
            name,
            observed: 0.0,
            target: 0.0,
            statistic: 0.0,
            p_value: None,
            pass: !survival_possible,
        };
    }
    if gamma == 0.0 {
        // Every alive individual is observed at every step.
        let violations = gaps.iter().filter(|&&g| g != 1).count();
        return AppendixCheck {
            name,
            observed: mean(&to_f64(gaps)),
            target: 1.0,
            statistic: violations as f64,
            p_value: None,
            pass: violations == 0,
        };
    }

    let n = gaps.len() as f64;
    let p = 1.0 - gamma;
    let mut probs = Vec::new();
    let mut tail = 1.0;
    loop {
        let k = probs.len() as i32 + 1;
        let pk = p * gamma.powi(k - 1);
        // Stop when this bin or the remaining tail would be too small.
        if n * pk < MIN_EXPECTED || n * (tail - pk) < MIN_EXPECTED {
            break;
        }
        probs.push(pk);
        tail -= pk;
    }
    let bins = probs.len();
    let mut observed = vec![0u64; bins + 1];
    for &g in gaps {
        let idx = (g as usize).saturating_sub(1).min(bins);
        observed[idx] += 1;
    }
    probs.push(tail);
    let chi2: f64 = observed
        .iter()
        .zip(&probs)
        .map(|(&o, &pk)| {
            let e = n * pk;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let df = bins as f64;
    let p_value = if df >= 1.0 {
        ChiSquared::new(df)
            .map(|d| 1.0 - d.cdf(chi2))
            .unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    AppendixCheck {
        name,
        observed: mean(&to_f64(gaps)),
        target: 1.0 / p,
        statistic: chi2,
        p_value: Some(p_value),
        pass: p_value >= GAP_P_THRESHOLD,
    }
}

/// Verify a trace from [`crate::processes::simulate_individual_level`]:
///
/// 1. the mean of `Ũ_{t,·}` equals `λ_Y = qλ / (1 - α(1-q))`;
/// 2. the mean of `Ũ_{t,i}` equals `α^i (1-q)^i q λ` for `i = 0..=5`;
/// 3. re-sighting gaps follow `Geom(1 - γ_Y)`, `γ_Y = α(1-q)`;
/// 4. `B̃_t - X̃_t β_Y/(1-γ_Y)` has mean zero, `β_Y = αq`;
/// 5. `X̃_t = Ũ_{t,·} + Ṽ_{t,·}` at every step.
///
/// Moment checks use batch-means z-scores at ±3.
pub fn appendix_checks(trace: &AppendixTrace, spec: &Inar1Spec, q: f64) -> Result<AppendixReport> {
    if trace.spec() != *spec || trace.q() != q {
        return Err(Error::Provenance(format!(
            "trace generated with (lambda={}, alpha={}, q={}), checked against (lambda={}, alpha={}, q={})",
            trace.spec().lambda,
            trace.spec().alpha,
            trace.q(),
            spec.lambda,
            spec.alpha,
            q
        )));
    }
    let required = 2 * super::BATCH_COUNT;
    if trace.len() < required {
        return Err(Error::InsufficientData {
            required,
            got: trace.len(),
        });
    }

    let image = transform_a(spec, q)?;
    let (lambda, alpha) = (spec.lambda, spec.alpha);
    let mut checks = Vec::new();

    checks.push(mean_check(
        "u_total_mean".into(),
        &to_f64(trace.u_total()),
        image.lambda,
    ));

    for i in 0..=MAX_CHECKED_AGE {
        let rate = (alpha * (1.0 - q)).powi(i as i32) * q * lambda;
        checks.push(mean_check(
            format!("u_rate_age_{i}"),
            &to_f64(&trace.u_at_age(i)),
            rate,
        ));
    }

    checks.push(gap_check(
        trace.reobservation_gaps(),
        image.gamma,
        alpha > 0.0,
    ));

    let renew = image.renewal_probability();
    let residuals: Vec<f64> = trace
        .b_tilde()
        .iter()
        .zip(trace.x_tilde())
        .map(|(&b, &x)| b as f64 - renew * x as f64)
        .collect();
    let mut b_check = mean_check("b_tilde_given_x_tilde".into(), &residuals, 0.0);
    b_check.observed = mean(&to_f64(trace.b_tilde()));
    b_check.target = renew * mean(&to_f64(trace.x_tilde()));
    checks.push(b_check);

    let violations = (0..trace.len())
        .filter(|&t| trace.x_tilde()[t] != trace.u_total()[t] + trace.v_total()[t])
        .count();
    checks.push(AppendixCheck {
        name: "pathwise_decomposition".into(),
        observed: violations as f64,
        target: 0.0,
        statistic: violations as f64,
        p_value: None,
        pass: violations == 0,
    });

    let pass = checks.iter().all(|c| c.pass);
    Ok(AppendixReport {
        lambda_y: image.lambda,
        beta_y: image.beta,
        gamma_y: image.gamma,
        checks,
        pass,
    })
}
