//! Fast RSI: an independent interference draw for every symbol.

use std::f64::consts::LN_2;

use super::{no_interference_rate, ClosedFormScaling, RateRegime, RateReport, SystemParams};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::montecarlo::estimate;
use crate::precoders::Precoder;
use crate::randgen::{complex_gaussian, ChannelRealization, CodewordMatrix, RngStream};

/// Per-symbol penalty `sum_v [log2(1 + sigma^2 g/(kappa + P eta_v)) - log2(1 + sigma^2 g/kappa)]`
/// for an interference gain `g`.
fn symbol_penalty(g: f64, eta: &[f64], params: &SystemParams) -> f64 {
    let base = (params.sigma2_rr * g / params.kappa_r).ln_1p();
    eta.iter()
        .map(|&e| {
            let s = params.sigma2_rr / (params.kappa_r + params.p_s_tilde() * e);
            (s * g).ln_1p() - base
        })
        .sum::<f64>()
        / LN_2
}

/// Fast-RSI source-relay rate averaged over the symbols of one relay codeword.
///
/// Symbol `j` sees interference gain `g_j = X_R(j) Phi Phi^H X_R(j)^H`.
pub fn rate_fast_general(
    channel: &ChannelRealization,
    x_r: &CodewordMatrix,
    phi: &Precoder,
    params: &SystemParams,
) -> Result<RateReport> {
    let m = channel.antennas();
    if x_r.streams() != m || phi.antennas() != m {
        return Err(Error::invalid(format!(
            "shape mismatch: channel M = {m}, codeword has {} streams, precoder is {}x{}",
            x_r.streams(),
            phi.antennas(),
            phi.antennas()
        )));
    }
    let no_int = no_interference_rate(&channel.eta, params);
    if params.sigma2_rr == 0.0 {
        return Ok(RateReport::split(no_int, 0.0, RateRegime::FastFd));
    }
    let mut total = 0.0;
    for j in 0..x_r.len() {
        let row = x_r.x.row(j);
        let g: f64 = (0..m)
            .map(|c| {
                (0..m)
                    .map(|r| row[r] * phi.psi[(r, c)])
                    .sum::<C64>()
                    .norm_sqr()
            })
            .sum();
        total += symbol_penalty(g, &channel.eta, params);
    }
    Ok(RateReport::split(
        no_int,
        total / x_r.len() as f64,
        RateRegime::FastFd,
    ))
}

/// Weights `w_i` in `g = sum_i |X_{R,i}|^2 w_i` for an eigenbasis precoder
/// with stream fractions `allocation` (summing to `M`).
pub fn relay_interference_weights(allocation: &[f64], params: &SystemParams) -> Vec<f64> {
    let m = allocation.len() as f64;
    match params.closed_form {
        ClosedFormScaling::TraceNormalized => allocation.to_vec(),
        ClosedFormScaling::Literal => allocation.iter().map(|a| a / m).collect(),
    }
}

fn monte_carlo_report(
    channel: &ChannelRealization,
    params: &SystemParams,
    trials: usize,
    stream: &RngStream,
    draw: impl Fn(&mut crate::randgen::StreamRng) -> f64 + Sync,
) -> Result<RateReport> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let no_int = no_interference_rate(&channel.eta, params);
    if params.sigma2_rr == 0.0 {
        return Ok(RateReport::split(no_int, 0.0, RateRegime::FastFd));
    }
    let est = estimate(trials, stream, draw);
    let mut report = RateReport::split(no_int, est.mean, RateRegime::FastFd);
    report.std_error = Some(est.std_error);
    Ok(report)
}

/// Interference gain of the rank-1 precoder for one symbol whose
/// projection on `q` is `z`.
fn isrmax_gain(z: C64, m: usize, params: &SystemParams) -> f64 {
    let s = match params.closed_form {
        ClosedFormScaling::TraceNormalized => m as f64,
        ClosedFormScaling::Literal => 1.0,
    };
    s * z.norm_sqr()
}

/// Per-symbol penalties of the rank-1 and eigenbasis precoders from one
/// shared draw of the relay symbol vector (common random numbers).
///
/// The rank-1 gain uses the first entry, which has the law of `X_R(j) q`.
pub(crate) fn paired_penalty_draw<R: rand::Rng + ?Sized>(
    channel: &ChannelRealization,
    params: &SystemParams,
    w: &[f64],
    rng: &mut R,
) -> (f64, f64) {
    let v = params.relay_element_variance();
    let z: Vec<C64> = w.iter().map(|_| complex_gaussian(v, rng)).collect();
    let g_isr = isrmax_gain(z[0], w.len(), params);
    let g_ird = z.iter().zip(w).map(|(zi, wi)| wi * zi.norm_sqr()).sum();
    (
        symbol_penalty(g_isr, &channel.eta, params),
        symbol_penalty(g_ird, &channel.eta, params),
    )
}

/// Large-block fast-RSI rate with the rank-1 precoder `sqrt(M) q q^H`.
///
/// `X_R(j) q` has the law of a single codeword entry, so the expectation
/// is over `g = s |z|^2` with `z ~ CN(0, v)`; `s = M` for a trace-normalized
/// precoder and `s = 1` under [`ClosedFormScaling::Literal`].
pub fn rate_fast_isrmax_expect(
    channel: &ChannelRealization,
    params: &SystemParams,
    trials: usize,
    stream: &RngStream,
) -> Result<RateReport> {
    let v = params.relay_element_variance();
    let m = channel.antennas();
    monte_carlo_report(channel, params, trials, stream, |rng| {
        symbol_penalty(
            isrmax_gain(complex_gaussian(v, rng), m, params),
            &channel.eta,
            params,
        )
    })
}

/// Large-block fast-RSI rate with the eigenbasis precoder; the interference
/// gain is a weighted sum of independent exponentials.
pub fn rate_fast_irdmax_expect(
    channel: &ChannelRealization,
    params: &SystemParams,
    allocation: &[f64],
    trials: usize,
    stream: &RngStream,
) -> Result<RateReport> {
    let m = channel.antennas();
    if allocation.len() != m {
        return Err(Error::invalid(format!(
            "allocation has {} entries for M = {m}",
            allocation.len()
        )));
    }
    let total: f64 = allocation.iter().sum();
    if (total - m as f64).abs() > 1e-9 || allocation.iter().any(|&a| !(a >= 0.0)) {
        return Err(Error::invalid(format!(
            "allocation must be nonnegative and sum to {m}, got {total}"
        )));
    }
    let v = params.relay_element_variance();
    let w = relay_interference_weights(allocation, params);
    monte_carlo_report(channel, params, trials, stream, |rng| {
        let g = w
            .iter()
            .map(|&wi| wi * complex_gaussian(v, rng).norm_sqr())
            .sum();
        symbol_penalty(g, &channel.eta, params)
    })
}

/// Fast-RSI rate with the interference gain replaced by its mean
/// `P_eff = v sum_i w_i`, which is accurate for many antennas.
pub fn rate_fast_large_m_approx(channel: &ChannelRealization, params: &SystemParams) -> RateReport {
    let m = channel.antennas() as f64;
    let weight_sum = match params.closed_form {
        ClosedFormScaling::TraceNormalized => m,
        ClosedFormScaling::Literal => 1.0,
    };
    let p_eff = params.relay_element_variance() * weight_sum;
    let no_int = no_interference_rate(&channel.eta, params);
    let penalty = if params.sigma2_rr == 0.0 {
        0.0
    } else {
        symbol_penalty(p_eff, &channel.eta, params)
    };
    RateReport::split(no_int, penalty, RateRegime::FastFd)
}
