//! Seeded random primitives used by every simulator.
//!
//! [`RngStream`] wraps a ChaCha8 generator, which is counter based: the
//! 64-bit seed selects the key and the 64-bit stream id selects an
//! independent keystream. Substreams are derived by hashing, never by
//! drawing from the parent, so replicate `k` sees the same numbers no matter
//! how many other replicates ran before it or on which thread.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::error::{domain, Result};

/// Tolerance on multinomial probability sums.
pub const PROB_SUM_EPS: f64 = 1e-12;

/// A reproducible random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Fresh stream for `label`, a pure function of `(seed, stream_id, label)`.
    /// The parent's position is neither read nor advanced.
    pub fn substream(&self, label: u64) -> Self {
        let id = splitmix64(self.stream_id ^ splitmix64(label.wrapping_add(0x9E37_79B9_7F4A_7C15)));
        Self::new(self.seed, id)
    }

    /// Uniform draw on `(0, 1]`.
    fn open_unit(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(format!("{what} = {p} must lie in [0, 1]")))
    }
}

/// Binomial thinning `p ∘ n`: the number of successes among `n` independent
/// Bernoulli(`p`) trials. Exact sampling (BTPE for large `n·p`).
pub fn binomial_thin(n: u64, p: f64, rng: &mut RngStream) -> Result<u64> {
    check_probability(p, "thinning probability")?;
    if n == 0 || p == 0.0 {
        return Ok(0);
    }
    if p == 1.0 {
        return Ok(n);
    }
    let dist = Binomial::new(n, p).map_err(|e| domain(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Poisson draw with the given mean; `rate = 0` returns 0.
pub fn poisson_draw(rate: f64, rng: &mut RngStream) -> Result<u64> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(domain(format!(
            "Poisson rate = {rate} must be finite and >= 0"
        )));
    }
    if rate == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(rate).map_err(|e| domain(e.to_string()))?;
    Ok(dist.sample(rng) as u64)
}

/// Multinomial allocation of `x` items over `probs` plus an implicit residual
/// category holding the mass `1 - Σprobs`. Returns one count per entry of
/// `probs`; the residual count is `x - Σcounts`.
///
/// Sampled by sequential conditional binomials, which is exact.
pub fn multinomial_allocate(x: u64, probs: &[f64], rng: &mut RngStream) -> Result<Vec<u64>> {
    let mut total = 0.0;
    for &p in probs {
        check_probability(p, "category probability")?;
        total += p;
    }
    if total > 1.0 + PROB_SUM_EPS {
        return Err(domain(format!(
            "category probabilities sum to {total}, which exceeds 1"
        )));
    }

    let mut counts = Vec::with_capacity(probs.len());
    let mut remaining = x;
    let mut mass_left = 1.0_f64;
    for &p in probs {
        let c = if remaining == 0 || p == 0.0 {
            0
        } else if mass_left <= p {
            remaining
        } else {
            binomial_thin(remaining, (p / mass_left).min(1.0), rng)?
        };
        counts.push(c);
        remaining -= c;
        mass_left -= p;
    }
    Ok(counts)
}

/// Geometric draw on `{1, 2, ...}` with `P(k) = p (1-p)^(k-1)`, by inversion.
pub fn geometric_draw(success_prob: f64, rng: &mut RngStream) -> Result<u64> {
    if !(success_prob > 0.0 && success_prob <= 1.0) {
        return Err(domain(format!(
            "geometric success probability = {success_prob} must lie in (0, 1]"
        )));
    }
    if success_prob == 1.0 {
        return Ok(1);
    }
    let u = rng.open_unit();
    let k = (u.ln() / (-success_prob).ln_1p()).floor();
    Ok(k as u64 + 1)
}
