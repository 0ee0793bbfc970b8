//! Simulation of underreported Poisson INAR count processes and exact
//! equivalence transforms between their parameterisations.
//!
//! A Poisson INAR(1) observed through binomial thinning with reporting
//! probability `q` has the same law as a fully observed INAR(∞) with
//! geometric lag weights. Consequently `q` is not identifiable unless the
//! lag structure of the latent process is fixed. This crate provides:
//!
//! * [`sampling`]: seeded, substream-splittable random primitives;
//! * [`processes`]: INAR(1), INAR(p), geometric INAR(∞), reporting, and the
//!   individual-level population model;
//! * [`equivalence`]: the closed-form transforms, canonical forms and lag
//!   expansions;
//! * [`diagnostics`]: moments, the exact joint-pmf oracle, Monte-Carlo
//!   equivalence testing and checks of the individual-level decomposition;
//! * [`spec_file`]: the JSON model specification read by the `inar` CLI.

pub mod diagnostics;
pub mod equivalence;
pub mod error;
pub mod fmt;
pub mod processes;
pub mod sampling;
pub mod spec_file;

pub use error::{Error, Result};
