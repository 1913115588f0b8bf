//! Monte Carlo applications: estimating pi and pricing a European call under
//! Black-Scholes.
//!
//! Work is split into contiguous blocks, one per stream, and per-stream
//! partial results are combined in stream-index order, so results depend only
//! on the generator configuration and the stream count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::{u32_to_unit, StreamSource};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiEstimate {
    pub draws: u64,
    pub hits: u64,
    pub estimate: f64,
    pub standard_error: f64,
}

/// Sizes of `streams` contiguous blocks covering `total` items; the first
/// `total % streams` blocks get one extra.
pub fn partition(total: u64, streams: usize) -> Vec<u64> {
    let k = streams as u64;
    (0..k)
        .map(|i| total / k + u64::from(i < total % k))
        .collect()
}

fn check_streams<S: StreamSource + ?Sized>(source: &S, streams: usize) -> Result<()> {
    if streams == 0 {
        return Err(Error::EmptyStreamSet);
    }
    if streams > source.stream_count() {
        return Err(Error::StreamOutOfRange {
            index: streams - 1,
            count: source.stream_count(),
        });
    }
    Ok(())
}

/// Throws `draws` points into the unit square using streams `0..streams`;
/// a point hits when `x^2 + y^2 <= 1`.
pub fn estimate_pi<S: StreamSource + ?Sized>(
    source: &mut S,
    draws: u64,
    streams: usize,
) -> Result<PiEstimate> {
    if draws == 0 {
        return Err(Error::ZeroDraws);
    }
    check_streams(source, streams)?;
    let mut hits = 0u64;
    for (stream, block) in partition(draws, streams).into_iter().enumerate() {
        for _ in 0..block {
            let x = source.next_f64(stream)?;
            let y = source.next_f64(stream)?;
            if x * x + y * y <= 1.0 {
                hits += 1;
            }
        }
    }
    let p = hits as f64 / draws as f64;
    Ok(PiEstimate {
        draws,
        hits,
        estimate: 4.0 * p,
        standard_error: 4.0 * (p * (1.0 - p) / draws as f64).sqrt(),
    })
}

/// Smallest uniform handed to the logarithm.
pub const MIN_UNIFORM: f64 = 1.0 / 4_294_967_296.0;

/// Box-Muller on two uniforms. A zero first uniform is replaced by `2^-32`.
pub fn gaussian_pair<S: StreamSource + ?Sized>(
    source: &mut S,
    stream: usize,
) -> Result<(f64, f64)> {
    let u1 = source.next_u32(stream)?;
    let u2 = source.next_u32(stream)?;
    Ok(box_muller(
        u32_to_unit(u1).max(MIN_UNIFORM),
        u32_to_unit(u2),
    ))
}

pub fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub volatility: f64,
    pub maturity: f64,
    pub paths: u64,
}

impl OptionSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidOption(what.to_string()));
        if !(self.spot > 0.0 && self.spot.is_finite()) {
            return bad("spot must be positive");
        }
        // zero strike is the forward; allowed
        if !(self.strike >= 0.0 && self.strike.is_finite()) {
            return bad("strike must be non-negative");
        }
        if !self.rate.is_finite() {
            return bad("rate must be finite");
        }
        if !(self.volatility >= 0.0 && self.volatility.is_finite()) {
            return bad("volatility must be non-negative");
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return bad("maturity must be positive");
        }
        if self.paths == 0 {
            return bad("path count must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionPrice {
    pub price: f64,
    pub standard_error: f64,
    pub paths: u64,
}

/// Running mean and sum of squared deviations (Welford), mergeable.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64),
        }
    }
}

/// Discounted mean call payoff over `opt.paths` terminal prices
/// `S_T = S0 exp((r - sigma^2 / 2) T + sigma sqrt(T) Z)`, using every stream
/// of `source`. Each stream draws Box-Muller pairs and uses both variates.
pub fn mc_option_price<S: StreamSource + ?Sized>(
    source: &mut S,
    opt: &OptionSpec,
) -> Result<OptionPrice> {
    opt.validate()?;
    let streams = source.stream_count();
    check_streams(source, streams)?;
    let drift = (opt.rate - 0.5 * opt.volatility * opt.volatility) * opt.maturity;
    let diffusion = opt.volatility * opt.maturity.sqrt();
    let discount = (-opt.rate * opt.maturity).exp();
    let payoff =
        |z: f64| discount * (opt.spot * (drift + diffusion * z).exp() - opt.strike).max(0.0);

    let mut blocks = Vec::with_capacity(streams);
    for (stream, block) in partition(opt.paths, streams).into_iter().enumerate() {
        let mut m = Moments::default();
        let mut left = block;
        while left > 0 {
            let (z0, z1) = gaussian_pair(source, stream)?;
            m.push(payoff(z0));
            left -= 1;
            if left > 0 {
                m.push(payoff(z1));
                left -= 1;
            }
        }
        blocks.push(m);
    }
    let total = pairwise_merge(&blocks);
    let variance = if total.n > 1 {
        total.m2 / (total.n - 1) as f64
    } else {
        0.0
    };
    Ok(OptionPrice {
        price: total.mean,
        standard_error: (variance / total.n as f64).sqrt(),
        paths: total.n,
    })
}

fn pairwise_merge(parts: &[Moments]) -> Moments {
    match parts.len() {
        0 => Moments::default(),
        1 => parts[0],
        n => {
            let (l, r) = parts.split_at(n / 2);
            pairwise_merge(l).merge(pairwise_merge(r))
        }
    }
}
