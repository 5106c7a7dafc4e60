//! Fixed-rate buffered relaying: link outage probabilities, the relay
//! queue as a birth-death chain, and delivered throughput.
//!
//! Outages are evaluated in the large-block slow-RSI regime, where the
//! full-duplex source-relay rate equals the interference-free rate, so the
//! two hops are independent.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{gram, hermitian_eigen};
use crate::montecarlo::collect;
use crate::precoders::waterfill;
use crate::randgen::{draw_channel, RngStream};
use crate::rates::{rate_hd_sr, rate_rd_eigenmodes, AllocationMode, SystemParams};

/// Success probabilities of each hop at transmission rate `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkProbs {
    pub p_sr_hd: f64,
    pub p_sr_fd: f64,
    pub p_rd: f64,
    /// Number of channel draws behind the estimates; 0 for exact values.
    pub trials: usize,
    pub rate: f64,
}

impl LinkProbs {
    pub fn new(p_sr_hd: f64, p_sr_fd: f64, p_rd: f64, trials: usize, rate: f64) -> Result<Self> {
        for (name, p) in [("p_sr_hd", p_sr_hd), ("p_sr_fd", p_sr_fd), ("p_rd", p_rd)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(Self {
            p_sr_hd,
            p_sr_fd,
            p_rd,
            trials,
            rate,
        })
    }

    /// Exact probabilities with no sampling error attached.
    pub fn exact(p_sr: f64, p_rd: f64) -> Result<Self> {
        Self::new(p_sr, p_sr, p_rd, 0, 1.0)
    }
}

/// Per-draw link rates, reusable across transmission rates and buffer sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRateSamples {
    /// Source-relay rate; the same for half- and full-duplex in this regime.
    pub sr: Vec<f64>,
    pub rd: Vec<f64>,
    /// Source-relay rate with the RSI treated as extra white noise.
    pub sr_conv: Vec<f64>,
}

fn frequency(hits: usize, n: usize) -> f64 {
    hits as f64 / n as f64
}

impl LinkRateSamples {
    pub fn trials(&self) -> usize {
        self.sr.len()
    }

    pub fn probs(&self, rate: f64) -> LinkProbs {
        let n = self.trials();
        let p_sr = frequency(self.sr.iter().filter(|&&r| r >= rate).count(), n);
        let p_rd = frequency(self.rd.iter().filter(|&&r| r >= rate).count(), n);
        LinkProbs {
            p_sr_hd: p_sr,
            p_sr_fd: p_sr,
            p_rd,
            trials: n,
            rate,
        }
    }

    /// Fraction of draws in which both the noise-treated source-relay link
    /// and the relay-destination link support `rate`.
    pub fn conventional_success(&self, rate: f64) -> ThroughputReport {
        let n = self.trials();
        let hits = self
            .sr_conv
            .iter()
            .zip(&self.rd)
            .filter(|(&s, &d)| s >= rate && d >= rate)
            .count();
        let p = frequency(hits, n);
        ThroughputReport::new(p, rate, Scheme::ConventionalFd, binomial_se(p, n))
    }
}

fn binomial_se(p: f64, n: usize) -> Option<f64> {
    (n > 0).then(|| (p * (1.0 - p) / n as f64).sqrt())
}

/// Draws `trials` independent channel pairs and evaluates each hop's rate.
pub fn sample_link_rates(
    params: &SystemParams,
    trials: usize,
    stream: &RngStream,
) -> Result<LinkRateSamples> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let m = params.m;
    let snr_rd = params.p_r / params.kappa_d;
    let conv_noise = params.kappa_r + params.sigma2_rr * params.p_r;
    let draws = collect(trials, stream, |rng| -> Result<(f64, f64, f64)> {
        let ch = draw_channel(m, params.channel_variance, rng)?;
        let sr = rate_hd_sr(&ch, params).value;
        let lambda = hermitian_eigen(&gram(&ch.h_rd))?.values;
        let alloc = match params.allocation {
            AllocationMode::Equal => vec![1.0; m],
            AllocationMode::Waterfill => waterfill(&lambda, snr_rd, m as f64),
        };
        let rd = rate_rd_eigenmodes(&lambda, &alloc, params).value;
        let conv = ch
            .eta
            .iter()
            .map(|&e| (params.p_s_tilde() * e / conv_noise).ln_1p())
            .sum::<f64>()
            / std::f64::consts::LN_2;
        Ok((sr, rd, conv))
    });
    let mut out = LinkRateSamples {
        sr: Vec::with_capacity(trials),
        rd: Vec::with_capacity(trials),
        sr_conv: Vec::with_capacity(trials),
    };
    for d in draws {
        let (sr, rd, conv) = d?;
        out.sr.push(sr);
        out.rd.push(rd);
        out.sr_conv.push(conv);
    }
    Ok(out)
}

pub fn estimate_link_probs(
    params: &SystemParams,
    rate: f64,
    trials: usize,
    stream: &RngStream,
) -> Result<LinkProbs> {
    Ok(sample_link_rates(params, trials, stream)?.probs(rate))
}

/// Birth-death chain of the relay buffer occupancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueChain {
    /// `0 -> 1`.
    pub a0: f64,
    /// `l -> l+1` for `0 < l < q_max`.
    pub a: f64,
    /// `l -> l-1` for `0 < l < q_max`.
    pub b: f64,
    /// `q_max -> q_max-1`.
    pub b_q: f64,
    pub q_max: usize,
}

impl QueueChain {
    pub fn new(a0: f64, a: f64, b: f64, b_q: f64, q_max: usize) -> Result<Self> {
        if q_max == 0 {
            return Err(Error::invalid("buffer size must be at least 1"));
        }
        for (name, p) in [("a0", a0), ("a", a), ("b", b), ("b_q", b_q)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} is not a probability")));
            }
        }
        if a + b > 1.0 + 1e-12 {
            return Err(Error::invalid(format!("a + b = {} exceeds 1", a + b)));
        }
        Ok(Self {
            a0,
            a,
            b,
            b_q,
            q_max,
        })
    }

    /// Probability of moving up from state `nu`.
    pub fn up(&self, nu: usize) -> f64 {
        match nu {
            0 => self.a0,
            n if n < self.q_max => self.a,
            _ => 0.0,
        }
    }

    /// Probability of moving down from state `nu`.
    pub fn down(&self, nu: usize) -> f64 {
        match nu {
            0 => 0.0,
            n if n < self.q_max => self.b,
            _ => self.b_q,
        }
    }
}

pub fn build_chain(probs: &LinkProbs, q_max: usize) -> Result<QueueChain> {
    QueueChain::new(
        probs.p_sr_hd,
        probs.p_sr_fd * (1.0 - probs.p_rd),
        probs.p_rd * (1.0 - probs.p_sr_fd),
        probs.p_rd,
        q_max,
    )
}

/// Occupancy distribution `beta_0 .. beta_qmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDist {
    pub beta: Vec<f64>,
}

impl StationaryDist {
    pub fn beta0(&self) -> f64 {
        self.beta[0]
    }

    /// Largest `|beta_nu up_nu - beta_{nu+1} down_{nu+1}|`.
    pub fn balance_residual(&self, chain: &QueueChain) -> f64 {
        (0..chain.q_max)
            .map(|nu| (self.beta[nu] * chain.up(nu) - self.beta[nu + 1] * chain.down(nu + 1)).abs())
            .fold(0.0, f64::max)
    }

    pub fn total_variation(&self, other: &[f64]) -> f64 {
        0.5 * self
            .beta
            .iter()
            .zip(other)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
    }
}

/// Stationary distribution by the product form of the local balance
/// equations, accumulated in the log domain.
///
/// When some transition probability is zero the chain is reducible; the
/// result is then the limit reached from an empty buffer: the closed class
/// `[j, k]` bounded by the first blocked upward move `k` and the last
/// blocked downward move `j <= k`.
pub fn stationary(chain: &QueueChain) -> StationaryDist {
    let q = chain.q_max;
    let mut beta = vec![0.0; q + 1];
    let k = (0..q).find(|&nu| chain.up(nu) == 0.0).unwrap_or(q);
    let j = (1..=k).rev().find(|&nu| chain.down(nu) == 0.0).unwrap_or(0);
    let mut logw = Vec::with_capacity(k - j + 1);
    logw.push(0.0);
    for nu in j..k {
        let last = *logw.last().expect("nonempty");
        logw.push(last + chain.up(nu).ln() - chain.down(nu + 1).ln());
    }
    let peak = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = logw.iter().map(|w| (w - peak).exp()).sum();
    for (i, w) in logw.iter().enumerate() {
        beta[j + i] = (w - peak).exp() / norm;
    }
    StationaryDist { beta }
}

/// Empty-buffer probability from the geometric-sum closed form.
///
/// The ratio-one case `a = b` uses the removable-singularity limit in which
/// the geometric sum becomes `q_max - 1`.
pub fn empty_probability_closed_form(chain: &QueueChain) -> Result<f64> {
    let QueueChain {
        a0,
        a,
        b,
        b_q,
        q_max,
    } = *chain;
    if b == 0.0 || b_q == 0.0 {
        return Err(Error::invalid(
            "closed form needs positive downward probabilities",
        ));
    }
    let r = a / b;
    let steps = (q_max - 1) as i32;
    let geometric = if (r - 1.0).abs() < 1e-12 {
        f64::from(steps)
    } else {
        (1.0 - r.powi(steps)) / (1.0 - r)
    };
    // a0 b/(a b_q) (a/b)^q written without dividing by a
    let top = a0 * r.powi(steps) / b_q;
    Ok(1.0 / (1.0 + a0 / b * geometric + top))
}

/// Empty-buffer probability of an unlimited buffer, `(b - a)/(b - a + a0)`.
pub fn stationary_beta0_infinite(chain: &QueueChain) -> Result<f64> {
    if chain.a >= chain.b {
        return Err(Error::Unstable {
            a: chain.a,
            b: chain.b,
        });
    }
    Ok((chain.b - chain.a) / (chain.b - chain.a + chain.a0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    BufferedFd,
    ConventionalFd,
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputReport {
    /// Packets per slot.
    pub mu_d: f64,
    /// Bits/sec/Hz, `mu_d * R`.
    pub mu_bits: f64,
    pub scheme: Scheme,
    pub std_error: Option<f64>,
}

impl ThroughputReport {
    fn new(mu_d: f64, rate: f64, scheme: Scheme, std_error: Option<f64>) -> Self {
        Self {
            mu_d,
            mu_bits: mu_d * rate,
            scheme,
            std_error,
        }
    }
}

/// `mu_d = (1 - beta_0) p_rd`.
pub fn throughput(dist: &StationaryDist, probs: &LinkProbs) -> ThroughputReport {
    ThroughputReport::new(
        (1.0 - dist.beta0()) * probs.p_rd,
        probs.rate,
        Scheme::BufferedFd,
        None,
    )
}

fn buffered_mu(p_sr_hd: f64, p_sr_fd: f64, p_rd: f64, q_max: usize) -> Result<f64> {
    let probs = LinkProbs::new(p_sr_hd, p_sr_fd, p_rd, 0, 1.0)?;
    let chain = build_chain(&probs, q_max)?;
    Ok(throughput(&stationary(&chain), &probs).mu_d)
}

/// Central difference of `f` at `p`, one-sided at the ends of `[0, 1]`.
fn slope(p: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    const H: f64 = 1e-6;
    let lo = (p - H).max(0.0);
    let hi = (p + H).min(1.0);
    Ok((f(hi)? - f(lo)?) / (hi - lo))
}

/// Buffered full-duplex throughput; when the probabilities are estimates,
/// the standard error follows from the delta method with binomial variances.
pub fn buffered_throughput(probs: &LinkProbs, q_max: usize) -> Result<ThroughputReport> {
    let chain = build_chain(probs, q_max)?;
    let mut report = throughput(&stationary(&chain), probs);
    if probs.trials > 0 {
        let n = probs.trials as f64;
        let var = |p: f64| p * (1.0 - p) / n;
        let LinkProbs {
            p_sr_hd,
            p_sr_fd,
            p_rd,
            ..
        } = *probs;
        let d_rd = slope(p_rd, |x| buffered_mu(p_sr_hd, p_sr_fd, x, q_max))?;
        let mut variance = d_rd * d_rd * var(p_rd);
        if p_sr_hd == p_sr_fd {
            let d_sr = slope(p_sr_fd, |x| buffered_mu(x, x, p_rd, q_max))?;
            variance += d_sr * d_sr * var(p_sr_fd);
        } else {
            let d_hd = slope(p_sr_hd, |x| buffered_mu(x, p_sr_fd, p_rd, q_max))?;
            let d_fd = slope(p_sr_fd, |x| buffered_mu(p_sr_hd, x, p_rd, q_max))?;
            variance += d_hd * d_hd * var(p_sr_hd) + d_fd * d_fd * var(p_sr_fd);
        }
        report.std_error = Some(variance.sqrt());
    }
    Ok(report)
}

/// The relay always has a packet to send: `mu_d = p_rd`.
pub fn upper_bound_throughput(probs: &LinkProbs) -> ThroughputReport {
    ThroughputReport::new(
        probs.p_rd,
        probs.rate,
        Scheme::UpperBound,
        binomial_se(probs.p_rd, probs.trials),
    )
}

/// Unbuffered full-duplex relaying with the RSI treated as noise: a packet
/// gets through only when both hops support `rate` in the same slot.
pub fn conventional_fd_throughput(
    params: &SystemParams,
    rate: f64,
    trials: usize,
    stream: &RngStream,
) -> Result<ThroughputReport> {
    Ok(sample_link_rates(params, trials, stream)?.conventional_success(rate))
}

/// Outcome of a slot-by-slot queue simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueSimulation {
    /// Fraction of slots that started with `nu` packets buffered.
    pub occupancy: Vec<f64>,
    /// Packets delivered to the destination per slot.
    pub delivered_rate: f64,
    pub slots: usize,
}

/// Simulates the relay buffer from empty for `slots` slots.
///
/// An empty relay only listens (success with `p_sr_hd`). A full relay only
/// transmits. Otherwise both hops run at once and the buffer moves by
/// `+1` for a source success and `-1` for a relay success.
pub fn simulate_queue(
    probs: &LinkProbs,
    q_max: usize,
    slots: usize,
    stream: &RngStream,
) -> Result<QueueSimulation> {
    if q_max == 0 || slots == 0 {
        return Err(Error::invalid("need a positive buffer size and slot count"));
    }
    let mut rng = stream.rng();
    let mut counts = vec![0usize; q_max + 1];
    let mut q = 0usize;
    let mut delivered = 0usize;
    for _ in 0..slots {
        counts[q] += 1;
        if q == 0 {
            if rng.random::<f64>() < probs.p_sr_hd {
                q = 1;
            }
            continue;
        }
        let sr = rng.random::<f64>() < probs.p_sr_fd;
        let rd = rng.random::<f64>() < probs.p_rd;
        if rd {
            delivered += 1;
            q -= 1;
        }
        if sr && q + usize::from(rd) < q_max {
            q += 1;
        }
    }
    Ok(QueueSimulation {
        occupancy: counts.iter().map(|&c| frequency(c, slots)).collect(),
        delivered_rate: frequency(delivered, slots),
        slots,
    })
}
