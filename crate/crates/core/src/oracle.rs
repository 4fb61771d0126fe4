//! Monte Carlo pricing by inverse-CDF sampling, used to cross-check the
//! quadrature engine.
//!
//! Sample `i` of a run belongs to chunk `i / batch`; chunk `k` draws from a
//! ChaCha8 generator seeded with `seed` on stream `k`. Chunks are simulated in
//! parallel and merged in chunk order, so an estimate depends only on
//! `(seed, samples, batch)` and never on the number of threads.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{StudentT, TParams};
use crate::error::{Error, Result};
use crate::martingale::{check_policy, martingale_scale, ResolvedPolicy, TailMode};
use crate::numerics::CompensatedSum;
use crate::pricing::{MarketParams, OptionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Samples per chunk; the unit of parallel work and of stream splitting.
    pub batch: u64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            batch: 1 << 16,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::domain("samples", 0.0, "at least 1"));
        }
        if self.batch == 0 {
            return Err(Error::domain("batch", 0.0, "at least 1"));
        }
        Ok(())
    }

    fn chunks(&self) -> u64 {
        self.samples.div_ceil(self.batch)
    }

    fn chunk_len(&self, k: u64) -> u64 {
        (self.samples - k * self.batch).min(self.batch)
    }
}

impl Default for McConfig {
    fn default() -> Self {
        Self::new(1_000_000, 0x5eed_0001)
    }
}

/// Sample mean with `std_error = sample_std / sqrt(samples)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Uniform on the open interval (0, 1) with 53 random bits.
fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Maps a uniform draw to `xi` under the policy. A capped draw above `p` is
/// exactly the clamped value `x_c`, which is what clamping the unconditioned
/// quantile would give.
fn draw(dist: &StudentT, policy: &ResolvedPolicy, u: f64) -> f64 {
    let q = match policy.mode {
        TailMode::Capped if u > policy.p => return policy.x_c,
        TailMode::Capped => dist.quantile(u),
        TailMode::Truncated => dist.quantile(u * policy.p),
    };
    // u lies strictly inside (0, 1), where the quantile is always defined.
    q.map_or(f64::NAN, |x| x.min(policy.x_c))
}

/// The sequence of `xi` draws for a run, in sample order.
pub struct XiSamples {
    dist: StudentT,
    policy: ResolvedPolicy,
    config: McConfig,
    chunk: u64,
    left_in_chunk: u64,
    rng: ChaCha8Rng,
}

impl Iterator for XiSamples {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.left_in_chunk == 0 {
            self.chunk += 1;
            if self.chunk >= self.config.chunks() {
                return None;
            }
            self.rng = chunk_rng(self.config.seed, self.chunk);
            self.left_in_chunk = self.config.chunk_len(self.chunk);
        }
        self.left_in_chunk -= 1;
        let u = open_uniform(&mut self.rng);
        Some(draw(&self.dist, &self.policy, u))
    }
}

pub fn sample_xi(nu: f64, policy: &ResolvedPolicy, config: McConfig) -> Result<XiSamples> {
    config.validate()?;
    check_policy(policy, nu)?;
    Ok(XiSamples {
        dist: StudentT::new(nu)?,
        policy: *policy,
        config,
        chunk: 0,
        left_in_chunk: config.chunk_len(0),
        rng: chunk_rng(config.seed, 0),
    })
}

/// `n` independent draws from the location-scale t (normal when `nu` is
/// infinite), by inverse CDF. Used to build synthetic return series.
pub fn sample_t(params: &TParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    let dist = StudentT::new(params.nu)?;
    let config = McConfig::new(n.max(1) as u64, seed);
    let chunks: Vec<Vec<f64>> = (0..config.chunks())
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            (0..config.chunk_len(k))
                .map(|_| {
                    let xi = dist.quantile(open_uniform(&mut rng)).unwrap_or(f64::NAN);
                    params.mu + params.sigma * xi
                })
                .collect()
        })
        .collect();
    let mut out: Vec<f64> = chunks.into_iter().flatten().collect();
    out.truncate(n);
    Ok(out)
}

/// Per-chunk moments: count, compensated sum, and sum of squared deviations
/// from the chunk mean.
struct Moments {
    n: f64,
    sum: CompensatedSum,
    m2: f64,
}

fn chunk_moments<F: Fn(f64) -> f64>(
    dist: &StudentT,
    policy: &ResolvedPolicy,
    config: &McConfig,
    k: u64,
    payoff: &F,
) -> Moments {
    let mut rng = chunk_rng(config.seed, k);
    let values: Vec<f64> = (0..config.chunk_len(k))
        .map(|_| payoff(draw(dist, policy, open_uniform(&mut rng))))
        .collect();
    let mut sum = CompensatedSum::new();
    values.iter().for_each(|&v| sum.add(v));
    let n = values.len() as f64;
    let mean = sum.value() / n;
    let mut m2 = CompensatedSum::new();
    values.iter().for_each(|&v| m2.add((v - mean) * (v - mean)));
    Moments {
        n,
        sum,
        m2: m2.value(),
    }
}

fn estimate<F>(nu: f64, policy: &ResolvedPolicy, config: McConfig, payoff: F) -> Result<McEstimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    config.validate()?;
    check_policy(policy, nu)?;
    let dist = StudentT::new(nu)?;
    let parts: Vec<Moments> = (0..config.chunks())
        .into_par_iter()
        .map(|k| chunk_moments(&dist, policy, &config, k, &payoff))
        .collect();

    // Chan et al. pairwise update, applied left to right in chunk order.
    let mut n = 0.0;
    let mut sum = CompensatedSum::new();
    let mut m2 = 0.0;
    for part in &parts {
        if n > 0.0 {
            let delta = part.sum.value() / part.n - sum.value() / n;
            m2 += part.m2 + delta * delta * n * part.n / (n + part.n);
        } else {
            m2 = part.m2;
        }
        n += part.n;
        sum.merge(&part.sum);
    }
    let mean = sum.value() / n;
    let variance = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
    if !(mean.is_finite() && variance.is_finite()) {
        return Err(Error::NonFiniteIntegrand {
            at: f64::NAN,
            value: mean,
        });
    }
    Ok(McEstimate {
        mean,
        std_error: (variance / n).sqrt(),
        samples: config.samples,
    })
}

/// Discounted Monte Carlo price using the quadrature engine's `A_T`.
pub fn mc_price(
    market: &MarketParams,
    nu: f64,
    policy: &ResolvedPolicy,
    kind: OptionKind,
    config: McConfig,
) -> Result<McEstimate> {
    market.validate()?;
    let scale = martingale_scale(market, nu, policy)?;
    let (a_t, sigma_t, strike) = (scale.a_t, market.sigma_t(), market.strike);
    let df = market.discount_factor();
    estimate(nu, policy, config, move |xi| {
        let s = a_t * (sigma_t * xi).exp();
        df * match kind {
            OptionKind::Call => (s - strike).max(0.0),
            OptionKind::Put => (strike - s).max(0.0),
        }
    })
}

/// Sample mean of `S_T = A_T exp(sigma_T xi)`; should match `S_0 e^{rT}`.
pub fn mc_expected_asset(
    market: &MarketParams,
    nu: f64,
    policy: &ResolvedPolicy,
    config: McConfig,
) -> Result<McEstimate> {
    market.validate()?;
    let scale = martingale_scale(market, nu, policy)?;
    let (a_t, sigma_t) = (scale.a_t, market.sigma_t());
    estimate(nu, policy, config, move |xi| a_t * (sigma_t * xi).exp())
}
