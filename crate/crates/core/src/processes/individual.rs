//! Individual-level population process behind an underreported INAR(1).
//!
//! Each step: every alive individual survives with probability `α`, then
//! `Poisson(λ)` individuals are born, then every alive individual is observed
//! independently with probability `q`. The alive count follows the INAR(1)
//! recursion and the observed count is `q ∘ X_t`.
//!
//! Observations are classified as first sightings (`u`, indexed by age
//! `i = t - birth`) or re-sightings (`v`, indexed by the gap `i` since the
//! previous sighting).

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rand::Rng;

use super::{default_burn_in, Inar1Spec, ReportingSpec};
use crate::error::{domain, Error, Result};
use crate::sampling::{poisson_draw, RngStream};

/// Individual history, kept only when [`IndividualOptions::keep_records`] is set.
/// `death` is the first step at which the individual is no longer alive;
/// `None` if it outlived the simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndividualRecord {
    pub birth: i64,
    pub death: Option<i64>,
    pub observations: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SparseKind {
    /// First observed at `t`, born at `t - i`.
    U,
    /// Observed at `t`, previously observed at `t - i`.
    V,
}

impl fmt::Display for SparseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SparseKind::U => "u",
            SparseKind::V => "v",
        })
    }
}

/// One non-zero cell of the `Ũ_{t,i}` / `Ṽ_{t,i}` decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparseCount {
    pub t: usize,
    pub i: u64,
    pub kind: SparseKind,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IndividualOptions {
    /// Steps simulated before `t = 0`, starting from an empty population.
    /// Defaults to `max(500, ceil(50 / (1 - α)))`.
    pub burn_in: Option<usize>,
    /// Steps simulated after the window to resolve whether the last
    /// observations in the window are ever repeated. Defaults to the number
    /// of steps after which a re-sighting has probability below 1e-12.
    pub lookahead: Option<usize>,
    pub keep_records: bool,
}

/// Aggregated individual-level history over the window `t = 0..t_len`.
#[derive(Debug, Clone)]
pub struct AppendixTrace {
    spec: Inar1Spec,
    q: f64,
    seed: u64,
    stream_id: u64,
    x: Vec<u64>,
    x_tilde: Vec<u64>,
    u_total: Vec<u64>,
    v_total: Vec<u64>,
    b_tilde: Vec<u64>,
    sparse: Vec<SparseCount>,
    gaps: Vec<u64>,
    records: Option<Vec<IndividualRecord>>,
}

impl AppendixTrace {
    pub fn spec(&self) -> Inar1Spec {
        self.spec
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Alive population `X_t`.
    pub fn x(&self) -> &[u64] {
        &self.x
    }

    /// Observed count `X̃_t`.
    pub fn x_tilde(&self) -> &[u64] {
        &self.x_tilde
    }

    /// `Ũ_{t,·}`: individuals observed for the first time at `t`.
    pub fn u_total(&self) -> &[u64] {
        &self.u_total
    }

    /// `Ṽ_{t,·}`: individuals observed at `t` that had been observed before.
    pub fn v_total(&self) -> &[u64] {
        &self.v_total
    }

    /// `B̃_t`: individuals observed at `t` that are observed again later.
    pub fn b_tilde(&self) -> &[u64] {
        &self.b_tilde
    }

    /// Non-zero `Ũ_{t,i}` and `Ṽ_{t,i}` cells, ordered by `(t, kind, i)`.
    pub fn sparse(&self) -> &[SparseCount] {
        &self.sparse
    }

    /// Realised waiting times between an observation in the window and the
    /// next observation of the same individual.
    pub fn reobservation_gaps(&self) -> &[u64] {
        &self.gaps
    }

    pub fn records(&self) -> Option<&[IndividualRecord]> {
        self.records.as_deref()
    }

    /// Per-step series of `Ũ_{t,i}` for a fixed age `i`, zeros included.
    pub fn u_at_age(&self, i: u64) -> Vec<u64> {
        let mut out = vec![0; self.len()];
        for c in &self.sparse {
            if c.kind == SparseKind::U && c.i == i {
                out[c.t] = c.count;
            }
        }
        out
    }

    /// CSV `t,x,x_tilde,u_total,v_total`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"t,x,x_tilde,u_total,v_total\n")?;
        for t in 0..self.len() {
            writeln!(
                out,
                "{t},{},{},{},{}",
                self.x[t], self.x_tilde[t], self.u_total[t], self.v_total[t]
            )?;
        }
        out.flush()
    }

    /// Long-format CSV `t,i,kind,count` of the non-zero decomposition cells.
    pub fn write_sparse_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"t,i,kind,count\n")?;
        for c in &self.sparse {
            writeln!(out, "{},{},{},{}", c.t, c.i, c.kind, c.count)?;
        }
        out.flush()
    }
}

struct Alive {
    birth: i64,
    last_seen: Option<i64>,
    record: usize,
}

/// [`simulate_individual_level_with`] using default options.
pub fn simulate_individual_level(
    spec: &Inar1Spec,
    rep: &ReportingSpec,
    t_len: usize,
    rng: &mut RngStream,
) -> Result<AppendixTrace> {
    simulate_individual_level_with(spec, rep, t_len, rng, IndividualOptions::default())
}

pub fn simulate_individual_level_with(
    spec: &Inar1Spec,
    rep: &ReportingSpec,
    t_len: usize,
    rng: &mut RngStream,
    options: IndividualOptions,
) -> Result<AppendixTrace> {
    spec.validate()?;
    rep.validate()?;
    if !rep.is_homogeneous() {
        return Err(Error::Unsupported(format!(
            "individual-level simulation requires omega = 1, got {}",
            rep.omega
        )));
    }
    if t_len == 0 {
        return Err(domain("series length must be >= 1"));
    }

    let (alpha, q) = (spec.alpha, rep.q);
    let gamma_y = alpha * (1.0 - q);
    let burn_in = options.burn_in.unwrap_or_else(|| default_burn_in(alpha));
    let lookahead = options.lookahead.unwrap_or_else(|| {
        if gamma_y == 0.0 {
            1
        } else {
            ((1e-12f64).ln() / gamma_y.ln()).ceil().max(1.0) as usize
        }
    });

    let window = t_len as i64;
    let mut x = vec![0; t_len];
    let mut x_tilde = vec![0; t_len];
    let mut u_total = vec![0; t_len];
    let mut v_total = vec![0; t_len];
    let mut b_tilde = vec![0; t_len];
    let mut sparse = Vec::new();
    let mut gaps = Vec::new();
    let mut records: Vec<IndividualRecord> = Vec::new();
    let keep = options.keep_records;

    let mut alive: Vec<Alive> = Vec::new();
    let mut u_cells: BTreeMap<u64, u64> = BTreeMap::new();
    let mut v_cells: BTreeMap<u64, u64> = BTreeMap::new();

    let first = -(burn_in as i64);
    let last = window + lookahead as i64;
    for t in first..last {
        alive.retain(|ind| {
            let survives = rng.random::<f64>() < alpha;
            if !survives && keep {
                records[ind.record].death = Some(t);
            }
            survives
        });

        let births = poisson_draw(spec.lambda, rng)?;
        for _ in 0..births {
            let record = if keep {
                records.push(IndividualRecord {
                    birth: t,
                    death: None,
                    observations: Vec::new(),
                });
                records.len() - 1
            } else {
                usize::MAX
            };
            alive.push(Alive {
                birth: t,
                last_seen: None,
                record,
            });
        }

        let in_window = (0..window).contains(&t);
        let mut observed = 0;
        for ind in alive.iter_mut() {
            if rng.random::<f64>() >= q {
                continue;
            }
            observed += 1;
            if keep {
                records[ind.record].observations.push(t);
            }
            match ind.last_seen {
                None => {
                    if in_window {
                        *u_cells.entry((t - ind.birth) as u64).or_default() += 1;
                    }
                }
                Some(s) => {
                    let gap = (t - s) as u64;
                    if in_window {
                        *v_cells.entry(gap).or_default() += 1;
                    }
                    if (0..window).contains(&s) {
                        b_tilde[s as usize] += 1;
                        gaps.push(gap);
                    }
                }
            }
            ind.last_seen = Some(t);
        }

        if in_window {
            let ti = t as usize;
            x[ti] = alive.len() as u64;
            x_tilde[ti] = observed;
            u_total[ti] = u_cells.values().sum();
            v_total[ti] = v_cells.values().sum();
            for (kind, cells) in [(SparseKind::U, &mut u_cells), (SparseKind::V, &mut v_cells)] {
                sparse.extend(cells.iter().map(|(&i, &count)| SparseCount {
                    t: ti,
                    i,
                    kind,
                    count,
                }));
                cells.clear();
            }
        }
    }

    Ok(AppendixTrace {
        spec: *spec,
        q,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
        x,
        x_tilde,
        u_total,
        v_total,
        b_tilde,
        sparse,
        gaps,
        records: keep.then_some(records),
    })
}
