//! Exact stationary law of `(X̃_t, X̃_{t+1})` for `q ∘ INAR(1)` by enumeration.

use std::collections::BTreeMap;

use statrs::distribution::{Binomial, Discrete, Poisson};

use crate::equivalence::UnderreportedModel;
use crate::error::{domain, Error, Result};

/// Probability mass the enumeration may lose to truncation.
pub const ORACLE_MASS_TOL: f64 = 1e-8;

/// Joint pmf on `{0..=cap}²`, row-major in `(a, b)`.
#[derive(Debug, Clone)]
pub struct JointPmf {
    cap: usize,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        if a > self.cap || b > self.cap {
            0.0
        } else {
            self.probs[a * (self.cap + 1) + b]
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `Σ_b P(a, b)`.
    pub fn marginal_first(&self, a: usize) -> f64 {
        (0..=self.cap).map(|b| self.get(a, b)).sum()
    }

    /// `Σ_a P(a, b)`.
    pub fn marginal_second(&self, b: usize) -> f64 {
        (0..=self.cap).map(|a| self.get(a, b)).sum()
    }

    pub fn to_map(&self) -> BTreeMap<(u64, u64), f64> {
        let side = self.cap + 1;
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, &p)| (((k / side) as u64, (k % side) as u64), p))
            .collect()
    }
}

fn poisson_pmf(mean: f64, k: usize) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    Poisson::new(mean).map(|d| d.pmf(k as u64)).unwrap_or(0.0)
}

fn binomial_pmf(n: usize, p: f64, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    Binomial::new(p, n as u64)
        .map(|d| d.pmf(k as u64))
        .unwrap_or(0.0)
}

/// Stationary joint pmf of two consecutive observations of `q ∘ INAR(1)`:
///
/// ```text
/// P(a, b) = Σ_{x1, x2 ≤ N} Pois(x1; λ/(1-α)) · P(x2 | x1) · Bin(a; x1, q) · Bin(b; x2, q)
/// P(x2 | x1) = Σ_k Bin(k; x1, α) · Pois(x2 - k; λ)
/// ```
///
/// with latent counts truncated at `N = truncation` and observed counts kept
/// up to `support_cap`. Fails if more than [`ORACLE_MASS_TOL`] is lost.
pub fn joint_pmf_oracle(
    model: &UnderreportedModel,
    support_cap: usize,
    truncation: usize,
) -> Result<JointPmf> {
    model.validate()?;
    let latent = model.as_inar1().ok_or_else(|| {
        domain(format!(
            "joint pmf oracle needs an INAR(1) latent process, got gamma = {}",
            model.latent.gamma
        ))
    })?;
    let (lambda, alpha, q) = (latent.lambda, latent.alpha, model.q);
    let n = truncation;

    let stationary: Vec<f64> = (0..=n)
        .map(|x| poisson_pmf(latent.stationary_mean(), x))
        .collect();
    let immigration: Vec<f64> = (0..=n).map(|k| poisson_pmf(lambda, k)).collect();

    // Latent joint M[x1][x2] = π(x1) P(x2 | x1).
    let mut latent_joint = vec![0.0; (n + 1) * (n + 1)];
    for x1 in 0..=n {
        let survivors: Vec<f64> = (0..=x1).map(|k| binomial_pmf(x1, alpha, k)).collect();
        for x2 in 0..=n {
            let p: f64 = (0..=x1.min(x2))
                .map(|k| survivors[k] * immigration[x2 - k])
                .sum();
            latent_joint[x1 * (n + 1) + x2] = stationary[x1] * p;
        }
    }

    // Thinning kernel R[x][a] = Bin(a; x, q).
    let cap = support_cap;
    let mut thin = vec![0.0; (n + 1) * (cap + 1)];
    for x in 0..=n {
        for a in 0..=cap.min(x) {
            thin[x * (cap + 1) + a] = binomial_pmf(x, q, a);
        }
    }

    // P = Rᵀ M R, via the intermediate H = M R.
    let mut h = vec![0.0; (n + 1) * (cap + 1)];
    for x1 in 0..=n {
        for x2 in 0..=n {
            let m = latent_joint[x1 * (n + 1) + x2];
            if m == 0.0 {
                continue;
            }
            for b in 0..=cap.min(x2) {
                h[x1 * (cap + 1) + b] += m * thin[x2 * (cap + 1) + b];
            }
        }
    }
    let mut probs = vec![0.0; (cap + 1) * (cap + 1)];
    for x1 in 0..=n {
        for a in 0..=cap.min(x1) {
            let r = thin[x1 * (cap + 1) + a];
            if r == 0.0 {
                continue;
            }
            for b in 0..=cap {
                probs[a * (cap + 1) + b] += r * h[x1 * (cap + 1) + b];
            }
        }
    }

    let pmf = JointPmf { cap, probs };
    let mass = pmf.total_mass();
    if mass < 1.0 - ORACLE_MASS_TOL {
        return Err(Error::TruncationTooSmall {
            mass,
            tolerance: ORACLE_MASS_TOL,
        });
    }
    Ok(pmf)
}

/// [`joint_pmf_oracle`] with the latent truncation chosen from the stationary
/// mean `μ` as `ceil(μ + 12 sqrt(μ) + 20)` and the observed cap equal to it.
pub fn joint_pmf_oracle_auto(model: &UnderreportedModel) -> Result<JointPmf> {
    let n = oracle_truncation(model);
    joint_pmf_oracle(model, n, n)
}

pub(crate) fn oracle_truncation(model: &UnderreportedModel) -> usize {
    let mu = model.latent.stationary_mean();
    (mu + 12.0 * mu.sqrt() + 20.0).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{GeomInarSpec, Inar1Spec};

    fn hpv() -> UnderreportedModel {
        UnderreportedModel::from_inar1(Inar1Spec::new(1.62, 0.52).unwrap(), 0.33).unwrap()
    }

    #[test]
    fn independence_without_thinning_or_memory() {
        let m = UnderreportedModel::from_inar1(Inar1Spec::new(1.3, 0.0).unwrap(), 1.0).unwrap();
        let pmf = joint_pmf_oracle(&m, 25, 25).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                let want = poisson_pmf(1.3, a) * poisson_pmf(1.3, b);
                assert!((pmf.get(a, b) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn marginals_are_thinned_poisson() {
        let pmf = joint_pmf_oracle_auto(&hpv()).unwrap();
        assert!((pmf.total_mass() - 1.0).abs() < 1e-8);
        for a in 0..20 {
            let want = poisson_pmf(0.33 * 1.62 / 0.48, a);
            assert!((pmf.marginal_first(a) - want).abs() < 1e-8);
            assert!((pmf.marginal_second(a) - want).abs() < 1e-8);
        }
    }

    #[test]
    fn lag_one_covariance_matches_theory() {
        // Cov(X̃_t, X̃_{t+1}) = q² α μ for the thinned INAR(1).
        let pmf = joint_pmf_oracle_auto(&hpv()).unwrap();
        let mu = 1.62 / 0.48;
        let mean = 0.33 * mu;
        let mut e_ab = 0.0;
        for a in 0..=pmf.cap() {
            for b in 0..=pmf.cap() {
                e_ab += (a * b) as f64 * pmf.get(a, b);
            }
        }
        let cov = e_ab - mean * mean;
        assert!((cov - 0.33 * 0.33 * 0.52 * mu).abs() < 1e-8);
    }

    #[test]
    fn truncation_and_domain_errors() {
        assert!(matches!(
            joint_pmf_oracle(&hpv(), 3, 3),
            Err(Error::TruncationTooSmall { .. })
        ));
        let inf =
            UnderreportedModel::new(GeomInarSpec::new(0.82, 0.17, 0.35).unwrap(), 1.0).unwrap();
        assert!(joint_pmf_oracle(&inf, 30, 30).is_err());
    }
}
