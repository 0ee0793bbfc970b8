//! Latent and observed count processes.
//!
//! All latent processes are Poisson-immigration INAR models:
//!
//! ```text
//! INAR(1):  X_t = α ∘ X_{t-1} + W_t
//! INAR(p):  X_t = Σ_{i=1..p} α_i ∘ X_{t-i} + W_t      (multinomial allocation)
//! INAR(∞):  same with α_i = β γ^(i-1)
//! ```
//!
//! with `W_t ~ Poisson(λ)`. The INAR(p) and INAR(∞) simulators use the
//! renewal form: at each step `B_t ~ Bin(X_t, Σα_i)` individuals are scheduled
//! to reappear after a waiting time drawn from the normalised lag weights
//! (geometric on `{1, 2, ...}` in the INAR(∞) case).

mod individual;
mod series;

use std::collections::VecDeque;

use rand::Rng;

pub use individual::{
    simulate_individual_level, simulate_individual_level_with, AppendixTrace, IndividualOptions,
    IndividualRecord, SparseCount, SparseKind,
};
pub use series::CountSeries;

use crate::error::{domain, Result};
use crate::sampling::{binomial_thin, geometric_draw, poisson_draw, RngStream};

/// Minimum number of burn-in steps for processes started from an empty past.
pub const MIN_BURN_IN: usize = 500;

/// Burn-in for a process whose autocorrelation decays like `persistence^k`:
/// `max(500, ceil(50 / (1 - persistence)))`.
pub fn default_burn_in(persistence: f64) -> usize {
    let scaled = (50.0 / (1.0 - persistence)).ceil();
    if scaled.is_finite() {
        MIN_BURN_IN.max(scaled as usize)
    } else {
        usize::MAX
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("lambda = {lambda} must be > 0")))
    }
}

/// Poisson INAR(1) parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inar1Spec {
    pub lambda: f64,
    pub alpha: f64,
}

impl Inar1Spec {
    pub fn new(lambda: f64, alpha: f64) -> Result<Self> {
        let spec = Self { lambda, alpha };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(domain(format!(
                "alpha = {} must satisfy 0 <= alpha < 1",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Mean of the stationary Poisson marginal, `λ / (1 - α)`.
    pub fn stationary_mean(&self) -> f64 {
        self.lambda / (1.0 - self.alpha)
    }
}

/// Poisson INAR(p) parameters with multinomial allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct InarPSpec {
    pub lambda: f64,
    pub alphas: Vec<f64>,
}

impl InarPSpec {
    pub fn new(lambda: f64, alphas: Vec<f64>) -> Result<Self> {
        let spec = Self { lambda, alphas };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if let Some(a) = self.alphas.iter().find(|a| !(**a >= 0.0 && **a <= 1.0)) {
            return Err(domain(format!("lag weight {a} must lie in [0, 1]")));
        }
        let total = self.total_weight();
        if total >= 1.0 {
            return Err(domain(format!("lag weights sum to {total}, must be < 1")));
        }
        Ok(())
    }

    pub fn total_weight(&self) -> f64 {
        self.alphas.iter().sum()
    }

    pub fn stationary_mean(&self) -> f64 {
        self.lambda / (1.0 - self.total_weight())
    }

    /// Truncation of a geometric-lag specification to its first `p` lags.
    pub fn truncated_geometric(spec: &GeomInarSpec, p: usize) -> Result<Self> {
        let alphas = (0..p)
            .map(|i| spec.beta * spec.gamma.powi(i as i32))
            .collect();
        Self::new(spec.lambda, alphas)
    }
}

/// Poisson INAR(∞) with geometric lag weights `α_i = β γ^(i-1)`.
///
/// Admits the boundary cases `β = 0` and `γ = 0` (i.i.d. Poisson and
/// INAR(1) respectively) alongside the interior `0 < β < 1 - γ < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomInarSpec {
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl GeomInarSpec {
    pub fn new(lambda: f64, beta: f64, gamma: f64) -> Result<Self> {
        let spec = Self {
            lambda,
            beta,
            gamma,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if self.gamma.is_nan() || self.gamma < 0.0 {
            return Err(domain(format!("gamma = {} must be >= 0", self.gamma)));
        }
        if !(self.beta >= 0.0 && self.beta < 1.0 - self.gamma) {
            return Err(domain(format!(
                "beta = {}, gamma = {} must satisfy 0 <= beta < 1 - gamma",
                self.beta, self.gamma
            )));
        }
        Ok(())
    }

    /// Probability that an individual is renewed at all, `Σα_i = β / (1 - γ)`.
    pub fn renewal_probability(&self) -> f64 {
        self.beta / (1.0 - self.gamma)
    }

    /// `λ (1 - γ) / (1 - β - γ)`.
    pub fn stationary_mean(&self) -> f64 {
        self.lambda * (1.0 - self.gamma) / (1.0 - self.beta - self.gamma)
    }

    /// Rate at which the autocorrelation decays, `β + γ`.
    pub fn persistence(&self) -> f64 {
        self.beta + self.gamma
    }
}

impl From<Inar1Spec> for GeomInarSpec {
    fn from(s: Inar1Spec) -> Self {
        Self {
            lambda: s.lambda,
            beta: s.alpha,
            gamma: 0.0,
        }
    }
}

/// Reporting mechanism: with probability `omega` the count is thinned by `q`,
/// otherwise it is reported completely. `omega = 1` is time-homogeneous
/// underreporting `X̃_t = q ∘ X_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportingSpec {
    pub q: f64,
    pub omega: f64,
}

impl ReportingSpec {
    pub fn new(q: f64, omega: f64) -> Result<Self> {
        let spec = Self { q, omega };
        spec.validate()?;
        Ok(spec)
    }

    /// Time-homogeneous underreporting with probability `q`.
    pub fn homogeneous(q: f64) -> Result<Self> {
        Self::new(q, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(domain(format!("q = {} must satisfy 0 < q <= 1", self.q)));
        }
        if !(self.omega >= 0.0 && self.omega <= 1.0) {
            return Err(domain(format!("omega = {} must lie in [0, 1]", self.omega)));
        }
        Ok(())
    }

    pub fn is_homogeneous(&self) -> bool {
        self.omega == 1.0
    }
}

fn check_len(t_len: usize) -> Result<()> {
    if t_len == 0 {
        Err(domain("series length must be >= 1"))
    } else {
        Ok(())
    }
}

/// Simulate a Poisson INAR(1) started from its stationary marginal
/// `Poisson(λ / (1 - α))`. The first `burn_in` values are discarded.
pub fn simulate_inar1(
    spec: &Inar1Spec,
    t_len: usize,
    rng: &mut RngStream,
    burn_in: usize,
) -> Result<CountSeries> {
    spec.validate()?;
    check_len(t_len)?;
    let (seed, stream) = (rng.seed(), rng.stream_id());

    let mut values = Vec::with_capacity(t_len);
    let mut x = poisson_draw(spec.stationary_mean(), rng)?;
    for step in 0..burn_in + t_len {
        if step > 0 {
            x = binomial_thin(x, spec.alpha, rng)? + poisson_draw(spec.lambda, rng)?;
        }
        if step >= burn_in {
            values.push(x);
        }
    }
    CountSeries::new(
        values,
        seed,
        stream,
        burn_in,
        format!("inar1(lambda={}, alpha={})", spec.lambda, spec.alpha),
    )
}

/// Pending renewals keyed by how many steps ahead they fire.
///
/// Front of the deque fires at the next step. Waiting times are not
/// truncated; the deque grows to the largest outstanding waiting time.
#[derive(Debug, Default)]
pub(crate) struct RenewalQueue {
    pending: VecDeque<u64>,
    scheduled: u64,
    fired: u64,
}

impl RenewalQueue {
    pub(crate) fn schedule(&mut self, wait: u64) {
        debug_assert!(wait >= 1);
        let slot = (wait - 1) as usize;
        if self.pending.len() <= slot {
            self.pending.resize(slot + 1, 0);
        }
        self.pending[slot] += 1;
        self.scheduled += 1;
    }

    /// Renewals firing at the next step.
    pub(crate) fn advance(&mut self) -> u64 {
        let due = self.pending.pop_front().unwrap_or(0);
        self.fired += due;
        due
    }

    #[cfg(test)]
    pub(crate) fn outstanding(&self) -> u64 {
        self.pending.iter().sum()
    }
}

/// Runs the renewal recursion shared by the INAR(p) and INAR(∞) simulators.
/// `wait` draws one waiting time given the random stream.
fn simulate_renewal<F>(
    lambda: f64,
    renewal_prob: f64,
    t_len: usize,
    burn_in: usize,
    rng: &mut RngStream,
    queue: &mut RenewalQueue,
    mut wait: F,
) -> Result<Vec<u64>>
where
    F: FnMut(&mut RngStream) -> Result<u64>,
{
    let mut values = Vec::with_capacity(t_len);
    for step in 0..burn_in + t_len {
        let x = queue.advance() + poisson_draw(lambda, rng)?;
        let renewed = binomial_thin(x, renewal_prob, rng)?;
        for _ in 0..renewed {
            queue.schedule(wait(rng)?);
        }
        if step >= burn_in {
            values.push(x);
        }
    }
    Ok(values)
}

/// Simulate a Poisson INAR(p) from an empty past. Each step allocates the
/// current individuals once: `B_t ~ Bin(X_t, Σα_i)` of them reappear after a
/// lag `i` drawn with probability `α_i / Σα_k`.
pub fn simulate_inar_p(
    spec: &InarPSpec,
    t_len: usize,
    rng: &mut RngStream,
    burn_in: usize,
) -> Result<CountSeries> {
    spec.validate()?;
    check_len(t_len)?;
    let (seed, stream) = (rng.seed(), rng.stream_id());
    let total = spec.total_weight();

    let mut cumulative = Vec::with_capacity(spec.alphas.len());
    let mut acc = 0.0;
    for a in &spec.alphas {
        acc += a / total;
        cumulative.push(acc);
    }
    let last_positive = spec.alphas.iter().rposition(|&a| a > 0.0).unwrap_or(0);

    let mut queue = RenewalQueue::default();
    let values = simulate_renewal(spec.lambda, total, t_len, burn_in, rng, &mut queue, |rng| {
        let u: f64 = rng.random();
        let lag = cumulative.partition_point(|&c| c <= u).min(last_positive);
        Ok(lag as u64 + 1)
    })?;
    CountSeries::new(
        values,
        seed,
        stream,
        burn_in,
        format!("inar_p(lambda={}, alphas={:?})", spec.lambda, spec.alphas),
    )
}

/// Simulate the geometric-lag INAR(∞) from an empty past with an exact
/// pending-renewal queue: `B_t ~ Bin(X_t, β/(1-γ))` renewals are scheduled
/// at `t + A` with `A ~ Geom(1 - γ)` on `{1, 2, ...}`.
pub fn simulate_inar_inf(
    spec: &GeomInarSpec,
    t_len: usize,
    rng: &mut RngStream,
    burn_in: usize,
) -> Result<CountSeries> {
    let mut queue = RenewalQueue::default();
    simulate_inar_inf_with_queue(spec, t_len, rng, burn_in, &mut queue)
}

pub(crate) fn simulate_inar_inf_with_queue(
    spec: &GeomInarSpec,
    t_len: usize,
    rng: &mut RngStream,
    burn_in: usize,
    queue: &mut RenewalQueue,
) -> Result<CountSeries> {
    spec.validate()?;
    check_len(t_len)?;
    let (seed, stream) = (rng.seed(), rng.stream_id());
    let success = 1.0 - spec.gamma;
    let values = simulate_renewal(
        spec.lambda,
        spec.renewal_probability(),
        t_len,
        burn_in,
        rng,
        queue,
        |rng| geometric_draw(success, rng),
    )?;
    CountSeries::new(
        values,
        seed,
        stream,
        burn_in,
        format!(
            "inar_inf(lambda={}, beta={}, gamma={})",
            spec.lambda, spec.beta, spec.gamma
        ),
    )
}

/// Apply the reporting mechanism independently at each step.
///
/// With `omega = 1` every count is thinned and no Bernoulli switch is drawn;
/// with `omega = 0` the series is returned unchanged.
pub fn apply_reporting(
    series: &CountSeries,
    rep: &ReportingSpec,
    rng: &mut RngStream,
) -> Result<CountSeries> {
    rep.validate()?;
    let mut values = Vec::with_capacity(series.len());
    for &x in series.values() {
        let underreported = if rep.omega == 1.0 {
            true
        } else if rep.omega == 0.0 {
            false
        } else {
            rng.random::<f64>() < rep.omega
        };
        values.push(if underreported {
            binomial_thin(x, rep.q, rng)?
        } else {
            x
        });
    }
    CountSeries::new(
        values,
        series.seed(),
        series.stream_id(),
        series.burn_in(),
        format!(
            "{} | reported(q={}, omega={})",
            series.model_tag(),
            rep.q,
            rep.omega
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: &[u64]) -> f64 {
        xs.iter().map(|&x| x as f64).sum::<f64>() / xs.len() as f64
    }

    /// Batch-means standard error with 50 batches.
    fn batch_se(xs: &[u64]) -> f64 {
        let b = xs.len() / 50;
        let means: Vec<f64> = xs.chunks_exact(b).take(50).map(mean_f).collect();
        let m = means.iter().sum::<f64>() / 50.0;
        let v = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 49.0;
        (v / 50.0).sqrt()
    }

    fn mean_f(xs: &[u64]) -> f64 {
        mean(xs)
    }

    fn lag1_acf(xs: &[u64]) -> f64 {
        let m = mean(xs);
        let d: Vec<f64> = xs.iter().map(|&x| x as f64 - m).collect();
        let c0: f64 = d.iter().map(|v| v * v).sum();
        let c1: f64 = d.windows(2).map(|w| w[0] * w[1]).sum();
        c1 / c0
    }

    #[test]
    fn spec_validation() {
        assert!(Inar1Spec::new(1.0, 0.0).is_ok());
        assert!(Inar1Spec::new(0.0, 0.5).is_err());
        assert!(Inar1Spec::new(1.0, 1.0).is_err());
        assert!(GeomInarSpec::new(1.0, 0.0, 0.0).is_ok());
        assert!(GeomInarSpec::new(1.0, 0.5, 0.5).is_err());
        assert!(GeomInarSpec::new(1.0, 0.2, -0.1).is_err());
        assert!(InarPSpec::new(1.0, vec![0.6, 0.4]).is_err());
        assert!(ReportingSpec::new(0.0, 1.0).is_err());
        assert!(ReportingSpec::new(0.5, 1.2).is_err());
    }

    #[test]
    fn burn_in_scales_with_persistence() {
        assert_eq!(default_burn_in(0.0), 500);
        assert_eq!(default_burn_in(0.52), 500);
        assert_eq!(default_burn_in(0.95), 1000);
    }

    #[test]
    fn zero_length_rejected() {
        let mut rng = RngStream::new(0, 0);
        let spec = Inar1Spec::new(1.0, 0.5).unwrap();
        assert!(simulate_inar1(&spec, 0, &mut rng, 0).is_err());
    }

    #[test]
    fn inar1_stationary_mean_and_acf() {
        let spec = Inar1Spec::new(1.62, 0.52).unwrap();
        let mut rng = RngStream::new(2024, 0);
        let s = simulate_inar1(&spec, 200_000, &mut rng, 0).unwrap();
        let m = mean(s.values());
        assert!((m - 3.375).abs() < 3.0 * batch_se(s.values()), "mean {m}");
        // Var(r_1) ≈ (1 - α²) / n for an AR(1)-type autocorrelation.
        let r1 = lag1_acf(s.values());
        let se = ((1.0 - 0.52f64.powi(2)) / 200_000.0).sqrt();
        assert!((r1 - 0.52).abs() < 3.0 * se, "acf {r1}");
    }

    #[test]
    fn alpha_zero_is_iid_poisson() {
        let spec = Inar1Spec::new(1.62, 0.0).unwrap();
        let mut rng = RngStream::new(8, 0);
        let s = simulate_inar1(&spec, 100_000, &mut rng, 0).unwrap();
        let m = mean(s.values());
        assert!((m - 1.62).abs() < 3.0 * (1.62 / 1e5f64).sqrt());
        assert!(lag1_acf(s.values()).abs() < 3.0 / 1e5f64.sqrt());
    }

    #[test]
    fn inar_p_mean() {
        let spec = InarPSpec::new(1.0, vec![0.3, 0.2]).unwrap();
        let mut rng = RngStream::new(77, 0);
        let s = simulate_inar_p(&spec, 200_000, &mut rng, default_burn_in(0.5)).unwrap();
        let m = mean(s.values());
        assert!((m - 2.0).abs() < 3.0 * batch_se(s.values()), "mean {m}");
    }

    #[test]
    fn inar_p_without_lags_is_iid() {
        let spec = InarPSpec::new(2.0, vec![]).unwrap();
        let mut rng = RngStream::new(4, 0);
        let s = simulate_inar_p(&spec, 50_000, &mut rng, 0).unwrap();
        assert!((mean(s.values()) - 2.0).abs() < 3.0 * (2.0 / 5e4f64).sqrt());
        assert!(lag1_acf(s.values()).abs() < 3.0 / 5e4f64.sqrt());
    }

    #[test]
    fn inar_inf_queue_conserves_renewals() {
        let spec = GeomInarSpec::new(0.8204, 0.1716, 0.3484).unwrap();
        let mut rng = RngStream::new(5, 0);
        let mut queue = RenewalQueue::default();
        simulate_inar_inf_with_queue(&spec, 10_000, &mut rng, 500, &mut queue).unwrap();
        assert_eq!(queue.scheduled, queue.fired + queue.outstanding());
        // Drain: everything scheduled fires exactly once.
        while !queue.pending.is_empty() {
            queue.advance();
        }
        assert_eq!(queue.scheduled, queue.fired);
    }

    #[test]
    fn inar_inf_boundary_is_iid() {
        let spec = GeomInarSpec::new(1.3, 0.0, 0.0).unwrap();
        let mut rng = RngStream::new(6, 0);
        let s = simulate_inar_inf(&spec, 50_000, &mut rng, 0).unwrap();
        assert!((mean(s.values()) - 1.3).abs() < 3.0 * (1.3 / 5e4f64).sqrt());
    }

    #[test]
    fn reporting_identities() {
        let spec = Inar1Spec::new(1.62, 0.52).unwrap();
        let s = simulate_inar1(&spec, 1000, &mut RngStream::new(1, 0), 0).unwrap();
        let mut rng = RngStream::new(1, 1);
        let full = ReportingSpec::new(1.0, 1.0).unwrap();
        assert_eq!(
            apply_reporting(&s, &full, &mut rng).unwrap().values(),
            s.values()
        );
        let never = ReportingSpec::new(0.2, 0.0).unwrap();
        assert_eq!(
            apply_reporting(&s, &never, &mut rng).unwrap().values(),
            s.values()
        );
        let partial = ReportingSpec::new(0.3, 0.5).unwrap();
        let r = apply_reporting(&s, &partial, &mut rng).unwrap();
        assert!(r.values().iter().zip(s.values()).all(|(a, b)| a <= b));
    }

    #[test]
    fn thinned_inar1_mean() {
        let spec = Inar1Spec::new(1.62, 0.52).unwrap();
        let s = simulate_inar1(&spec, 200_000, &mut RngStream::new(31, 0), 0).unwrap();
        let rep = ReportingSpec::homogeneous(0.33).unwrap();
        let r = apply_reporting(&s, &rep, &mut RngStream::new(31, 1)).unwrap();
        let m = mean(r.values());
        assert!((m - 1.11375).abs() < 3.0 * batch_se(r.values()), "mean {m}");
    }

    #[test]
    fn same_seed_same_series() {
        let spec = GeomInarSpec::new(0.8204, 0.1716, 0.3484).unwrap();
        let a = simulate_inar_inf(&spec, 5000, &mut RngStream::new(9, 2), 100).unwrap();
        let b = simulate_inar_inf(&spec, 5000, &mut RngStream::new(9, 2), 100).unwrap();
        assert_eq!(a, b);
    }
}
