//! Closed-form maps between underreported Poisson INAR representations.
//!
//! An [`UnderreportedModel`] is a geometric-lag INAR(∞) latent process
//! `(λ, β, γ)` observed through `q ∘ X_t`. Models related by the maps below
//! produce the same observed process:
//!
//! * [`transform_a`]: `q ∘ INAR(1)(λ, α)` ≡ fully observed INAR(∞) with
//!   `λ_Y = λq / (1 - α(1-q))`, `β_Y = αq`, `γ_Y = α(1-q)`.
//! * [`transform_b`]: fully observed INAR(∞)(λ, β, γ) ≡ `q_Y ∘ INAR(1)` with
//!   `α_Y = β + γ`, `q_Y = β / (β + γ)`, `λ_Y = λ(β+γ)(1-γ)/β`.
//! * [`transform_c`]: move an underreported INAR(∞) to any reporting
//!   probability in `[qβ/(β+γ), 1]`.
//!
//! Every class with `β > 0` has a unique member with `γ = 0`, returned by
//! [`canonicalize`]; equivalence is tested by comparing canonical forms.

use std::io::Write;

use crate::error::{domain, Error, Result};
use crate::fmt::format_sig;
use crate::processes::{GeomInarSpec, Inar1Spec};

/// Absolute tolerance on probabilities (relative on `λ`) when comparing
/// canonical forms.
pub const PARAM_TOL: f64 = 1e-12;

/// Default cut-off for [`expand_lags`].
pub const DEFAULT_LAG_CUTOFF: f64 = 0.005;

/// A latent geometric-lag process observed through binomial thinning with `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnderreportedModel {
    pub latent: GeomInarSpec,
    pub q: f64,
}

impl UnderreportedModel {
    pub fn new(latent: GeomInarSpec, q: f64) -> Result<Self> {
        let m = Self { latent, q };
        m.validate()?;
        Ok(m)
    }

    /// `q ∘ INAR(1)(λ, α)`.
    pub fn from_inar1(spec: Inar1Spec, q: f64) -> Result<Self> {
        spec.validate()?;
        Self::new(spec.into(), q)
    }

    pub fn validate(&self) -> Result<()> {
        self.latent.validate()?;
        check_q(self.q)
    }

    /// Lower end of the admissible reporting interval, `qβ / (β + γ)`.
    /// Zero when the lag weights vanish entirely.
    pub fn min_reporting(&self) -> f64 {
        let s = self.latent.beta + self.latent.gamma;
        if s == 0.0 {
            0.0
        } else if self.latent.gamma == 0.0 {
            self.q
        } else {
            self.q * self.latent.beta / s
        }
    }

    /// Stationary mean of the observed process, `qλ(1-γ)/(1-β-γ)`.
    pub fn observed_mean(&self) -> f64 {
        self.q * self.latent.stationary_mean()
    }

    /// The latent process as an INAR(1) when `γ = 0`.
    pub fn as_inar1(&self) -> Option<Inar1Spec> {
        (self.latent.gamma == 0.0).then_some(Inar1Spec {
            lambda: self.latent.lambda,
            alpha: self.latent.beta,
        })
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("q = {q} must satisfy 0 < q <= 1")))
    }
}

/// The underreported-INAR(1) representative `(λ*, α*, q*)` of a class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalForm {
    pub lambda_star: f64,
    pub alpha_star: f64,
    pub q_star: f64,
}

impl CanonicalForm {
    pub fn model(&self) -> UnderreportedModel {
        UnderreportedModel {
            latent: GeomInarSpec {
                lambda: self.lambda_star,
                beta: self.alpha_star,
                gamma: 0.0,
            },
            q: self.q_star,
        }
    }

    pub fn inar1(&self) -> Inar1Spec {
        Inar1Spec {
            lambda: self.lambda_star,
            alpha: self.alpha_star,
        }
    }

    /// Componentwise `self - other`.
    pub fn delta(&self, other: &CanonicalForm) -> CanonicalForm {
        CanonicalForm {
            lambda_star: self.lambda_star - other.lambda_star,
            alpha_star: self.alpha_star - other.alpha_star,
            q_star: self.q_star - other.q_star,
        }
    }

    /// Equality within [`PARAM_TOL`]: absolute on `α*` and `q*`, relative on `λ*`.
    pub fn approx_eq(&self, other: &CanonicalForm) -> bool {
        let rel = (self.lambda_star - other.lambda_star).abs()
            / self.lambda_star.abs().max(other.lambda_star.abs()).max(1.0);
        rel <= PARAM_TOL
            && (self.alpha_star - other.alpha_star).abs() <= PARAM_TOL
            && (self.q_star - other.q_star).abs() <= PARAM_TOL
    }
}

/// Underreported INAR(1) to a fully observed INAR(∞).
pub fn transform_a(inar1: &Inar1Spec, q: f64) -> Result<GeomInarSpec> {
    inar1.validate()?;
    check_q(q)?;
    let Inar1Spec { lambda, alpha } = *inar1;
    let gamma = alpha * (1.0 - q);
    GeomInarSpec::new(lambda * q / (1.0 - gamma), alpha * q, gamma)
}

/// Fully observed INAR(∞) to an underreported INAR(1).
///
/// With `γ = 0` the input already is an INAR(1) and is returned with `q* = 1`.
pub fn transform_b(inf: &GeomInarSpec) -> Result<CanonicalForm> {
    inf.validate()?;
    let GeomInarSpec {
        lambda,
        beta,
        gamma,
    } = *inf;
    if gamma == 0.0 {
        return Ok(CanonicalForm {
            lambda_star: lambda,
            alpha_star: beta,
            q_star: 1.0,
        });
    }
    if beta == 0.0 {
        return Err(Error::DegenerateClass(format!(
            "beta = 0 with gamma = {gamma} has no INAR(1) representative"
        )));
    }
    let s = beta + gamma;
    Ok(CanonicalForm {
        lambda_star: lambda * s * (1.0 - gamma) / beta,
        alpha_star: s,
        q_star: beta / s,
    })
}

/// Re-express `model` with reporting probability `q_target`.
///
/// Admissible targets are `[qβ/(β+γ), 1]`; the lower end is the canonical
/// INAR(1) representative (`γ_Y = 0`) and the upper end is the fully observed
/// INAR(∞).
pub fn transform_c(model: &UnderreportedModel, q_target: f64) -> Result<UnderreportedModel> {
    model.validate()?;
    let lower = model.min_reporting();
    if !(q_target >= lower && q_target <= 1.0 && q_target > 0.0) {
        return Err(Error::OutOfRange {
            value: q_target,
            lower,
            upper: 1.0,
        });
    }
    if q_target == model.q {
        return Ok(*model);
    }
    if q_target == lower {
        return Ok(canonicalize(model)?.model());
    }
    let GeomInarSpec {
        lambda,
        beta,
        gamma,
    } = model.latent;
    let ratio = model.q / q_target;
    let shift = (1.0 - ratio) * beta;
    let mut latent = GeomInarSpec {
        lambda: lambda * (1.0 - gamma) * ratio / (1.0 - gamma - shift),
        beta: beta * ratio,
        gamma: gamma + shift,
    };
    // Rounding just above the lower end can push gamma an ulp below zero.
    if latent.gamma < 0.0 && latent.gamma > -PARAM_TOL {
        latent.gamma = 0.0;
    }
    latent.validate()?;
    Ok(UnderreportedModel {
        latent,
        q: q_target,
    })
}

/// The class representative with INAR(1) latent structure.
///
/// Classes without lag weights (`β = γ = 0`) are i.i.d. `Poisson(qλ)`; their
/// representative is `(qλ, 0, 1)` since thinning an i.i.d. Poisson series
/// only rescales its rate.
pub fn canonicalize(model: &UnderreportedModel) -> Result<CanonicalForm> {
    model.validate()?;
    let b = transform_b(&model.latent)?;
    if b.alpha_star == 0.0 {
        return Ok(CanonicalForm {
            lambda_star: model.q * b.lambda_star,
            alpha_star: 0.0,
            q_star: 1.0,
        });
    }
    Ok(CanonicalForm {
        q_star: model.q * b.q_star,
        ..b
    })
}

pub fn equivalent(m1: &UnderreportedModel, m2: &UnderreportedModel) -> Result<bool> {
    Ok(canonicalize(m1)?.approx_eq(&canonicalize(m2)?))
}

/// Lag weights `α_i = βγ^(i-1)` for `i = 1, 2, ...` while `α_i >= cutoff`.
///
/// With `γ = 0` only the first lag is non-zero and at most one row is
/// returned.
pub fn expand_lags(spec: &GeomInarSpec, cutoff: f64) -> Result<Vec<(usize, f64)>> {
    spec.validate()?;
    if !(cutoff.is_finite() && cutoff >= 0.0) {
        return Err(domain(format!("cutoff = {cutoff} must be >= 0")));
    }
    if cutoff == 0.0 && spec.gamma > 0.0 {
        return Err(Error::NonTerminating(
            "cutoff 0 with gamma > 0 requests infinitely many lags".into(),
        ));
    }
    if spec.gamma == 0.0 {
        return Ok(if spec.beta >= cutoff {
            vec![(1, spec.beta)]
        } else {
            Vec::new()
        });
    }
    let mut out = Vec::new();
    let mut weight = spec.beta;
    let mut i = 1;
    while weight >= cutoff {
        out.push((i, weight));
        weight *= spec.gamma;
        i += 1;
    }
    Ok(out)
}

/// `Σ_i α_i = β / (1 - γ)` in closed form.
pub fn lag_sum(spec: &GeomInarSpec) -> f64 {
    spec.renewal_probability()
}

/// One point of the family of equivalent parameterisations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub q: f64,
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Parameters of all equivalent models on an evenly spaced grid of reporting
/// probabilities over `[qβ/(β+γ), 1]`, endpoints included.
pub fn figure1_curve(model: &UnderreportedModel, grid_size: usize) -> Result<Vec<CurveRow>> {
    model.validate()?;
    if grid_size < 2 {
        return Err(domain(format!("grid size = {grid_size} must be >= 2")));
    }
    let lower = model.min_reporting();
    if lower <= 0.0 {
        return Err(Error::DegenerateClass(
            "beta = 0: the admissible reporting interval is not closed".into(),
        ));
    }
    let step = (1.0 - lower) / (grid_size - 1) as f64;
    (0..grid_size)
        .map(|k| {
            let q = if k == grid_size - 1 {
                1.0
            } else {
                lower + step * k as f64
            };
            let m = transform_c(model, q)?;
            Ok(CurveRow {
                q,
                lambda: m.latent.lambda,
                beta: m.latent.beta,
                gamma: m.latent.gamma,
            })
        })
        .collect()
}

/// CSV `q_Y,lambda_Y,beta_Y,gamma_Y` with 6 significant digits.
pub fn write_curve_csv<W: Write>(rows: &[CurveRow], mut out: W) -> std::io::Result<()> {
    out.write_all(b"q_Y,lambda_Y,beta_Y,gamma_Y\n")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            format_sig(r.q, 6),
            format_sig(r.lambda, 6),
            format_sig(r.beta, 6),
            format_sig(r.gamma, 6)
        )?;
    }
    out.flush()
}
