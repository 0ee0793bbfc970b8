//! JSON model specification:
//!
//! ```json
//! {"latent": {"kind": "inar1", "lambda": 1.62, "alpha": 0.52},
//!  "reporting": {"q": 0.33, "omega": 1.0}}
//! ```
//!
//! `kind` is `"inar1"` (requires `alpha`, forbids `beta`/`gamma`) or
//! `"geom_inf"` (requires `beta` and `gamma`, forbids `alpha`). `omega`
//! defaults to 1 and a missing `reporting` block means complete reporting.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::equivalence::{CanonicalForm, UnderreportedModel};
use crate::error::{Error, Result};
use crate::fmt::round_sig;
use crate::processes::{GeomInarSpec, Inar1Spec, ReportingSpec};

/// Significant digits of parameters written back to JSON.
pub const OUTPUT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentKind {
    Inar1,
    GeomInf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatentFile {
    pub kind: LatentKind,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportingFile {
    pub q: f64,
    #[serde(default = "one")]
    pub omega: f64,
}

/// The on-disk document, before invariant checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpecFile {
    pub latent: LatentFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reporting: Option<ReportingFile>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Latent {
    Inar1(Inar1Spec),
    GeomInf(GeomInarSpec),
}

impl Latent {
    pub fn as_geom(&self) -> GeomInarSpec {
        match *self {
            Latent::Inar1(s) => s.into(),
            Latent::GeomInf(s) => s,
        }
    }
}

/// A validated model specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub latent: Latent,
    pub reporting: ReportingSpec,
}

fn spec_err(msg: impl Into<String>) -> Error {
    Error::SpecFile(msg.into())
}

impl ModelSpecFile {
    pub fn validate(&self) -> Result<ModelSpec> {
        let l = &self.latent;
        let latent = match l.kind {
            LatentKind::Inar1 => {
                if l.beta.is_some() || l.gamma.is_some() {
                    return Err(spec_err("kind \"inar1\" forbids \"beta\" and \"gamma\""));
                }
                let alpha = l
                    .alpha
                    .ok_or_else(|| spec_err("kind \"inar1\" requires \"alpha\""))?;
                Latent::Inar1(Inar1Spec::new(l.lambda, alpha)?)
            }
            LatentKind::GeomInf => {
                if l.alpha.is_some() {
                    return Err(spec_err("kind \"geom_inf\" forbids \"alpha\""));
                }
                let (beta, gamma) = match (l.beta, l.gamma) {
                    (Some(b), Some(g)) => (b, g),
                    _ => {
                        return Err(spec_err(
                            "kind \"geom_inf\" requires \"beta\" and \"gamma\"",
                        ))
                    }
                };
                Latent::GeomInf(GeomInarSpec::new(l.lambda, beta, gamma)?)
            }
        };
        let reporting = match &self.reporting {
            Some(r) => ReportingSpec::new(r.q, r.omega)?,
            None => ReportingSpec::new(1.0, 1.0)?,
        };
        Ok(ModelSpec { latent, reporting })
    }
}

impl ModelSpec {
    pub fn parse(json: &str) -> Result<Self> {
        let file: ModelSpecFile =
            serde_json::from_str(json).map_err(|e| spec_err(format!("malformed JSON: {e}")))?;
        file.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// The model as `q ∘ X_t`; fails unless `omega = 1`.
    pub fn underreported(&self) -> Result<UnderreportedModel> {
        if !self.reporting.is_homogeneous() {
            return Err(Error::Unsupported(format!(
                "equivalence transforms require omega = 1, got {}",
                self.reporting.omega
            )));
        }
        UnderreportedModel::new(self.latent.as_geom(), self.reporting.q)
    }

    /// Spec file for an underreported model; `γ = 0` is written as `inar1`.
    pub fn from_model(model: &UnderreportedModel) -> Self {
        let latent = match model.as_inar1() {
            Some(s) => Latent::Inar1(s),
            None => Latent::GeomInf(model.latent),
        };
        Self {
            latent,
            reporting: ReportingSpec {
                q: model.q,
                omega: 1.0,
            },
        }
    }

    pub fn from_canonical(c: &CanonicalForm) -> Self {
        Self::from_model(&c.model())
    }

    /// Document form with every parameter rounded to 12 significant digits.
    pub fn to_file(&self) -> ModelSpecFile {
        let r = |x: f64| round_sig(x, OUTPUT_DIGITS);
        let latent = match self.latent {
            Latent::Inar1(s) => LatentFile {
                kind: LatentKind::Inar1,
                lambda: r(s.lambda),
                alpha: Some(r(s.alpha)),
                beta: None,
                gamma: None,
            },
            Latent::GeomInf(s) => LatentFile {
                kind: LatentKind::GeomInf,
                lambda: r(s.lambda),
                alpha: None,
                beta: Some(r(s.beta)),
                gamma: Some(r(s.gamma)),
            },
        };
        ModelSpecFile {
            latent,
            reporting: Some(ReportingFile {
                q: r(self.reporting.q),
                omega: r(self.reporting.omega),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("spec serialises")
    }
}
