//! Slow RSI: the interference matrix is fixed for a whole codeword.

use super::{no_interference_rate, ClosedFormScaling, RateRegime, RateReport, SystemParams};
use crate::error::{Error, Result};
use crate::linalg::{gram, log2_det, ComplexMatrix, C64};
use crate::precoders::{Precoder, PrecoderDesign};
use crate::randgen::{ChannelRealization, CodewordMatrix};

/// Half-duplex source-relay rate: relay silent, no interference.
pub fn rate_hd_sr(channel: &ChannelRealization, params: &SystemParams) -> RateReport {
    RateReport::exact(no_interference_rate(&channel.eta, params), RateRegime::Hd)
}

/// Large-block limit of the slow-RSI rate, which coincides with the
/// no-interference rate for every precoder.
pub fn rate_asymptotic_slow(channel: &ChannelRealization, params: &SystemParams) -> RateReport {
    RateReport {
        regime: RateRegime::SlowFd,
        ..rate_hd_sr(channel, params)
    }
}

/// `log2 det(I_M + s * W * G)` for a covariance `W` and Gram matrix `G`.
fn log2det_identity_plus(s: f64, w: &ComplexMatrix, g: &ComplexMatrix) -> Result<f64> {
    let m = g.rows();
    let mut a = w.matmul(g)?.scale(s);
    for i in 0..m {
        a[(i, i)] += C64::new(1.0, 0.0);
    }
    let (log_abs, phase) = log2_det(&a)?;
    if !log_abs.is_finite() || (phase - 1.0).norm() > 1e-6 {
        return Err(Error::Numerical {
            message: "interference determinant is not a positive real".into(),
            residual: (phase - 1.0).norm(),
        });
    }
    Ok(log_abs)
}

/// Finite-block slow-RSI penalty for a given transmit covariance `W = Psi Psi^H`:
/// `(1/n) sum_v [log2 det(I + s_v W G) - log2 det(I + s_0 W G)]` with
/// `s_v = sigma^2/(P_S eta_v/M + kappa_R)` and `s_0 = sigma^2/kappa_R`.
fn slow_penalty(
    eta: &[f64],
    g: &ComplexMatrix,
    n: usize,
    w: &ComplexMatrix,
    params: &SystemParams,
) -> Result<f64> {
    if params.sigma2_rr == 0.0 {
        return Ok(0.0);
    }
    let base = log2det_identity_plus(params.sigma2_rr / params.kappa_r, w, g)?;
    let mut total = 0.0;
    for &e in eta {
        let s_v = params.sigma2_rr / (params.p_s_tilde() * e + params.kappa_r);
        total += log2det_identity_plus(s_v, w, g)? - base;
    }
    Ok(total / n as f64)
}

fn check_shapes(
    channel: &ChannelRealization,
    x_r: &CodewordMatrix,
    psi: &ComplexMatrix,
) -> Result<()> {
    let m = channel.antennas();
    if x_r.streams() != m || psi.rows() != m || psi.cols() != m {
        return Err(Error::invalid(format!(
            "shape mismatch: channel M = {m}, codeword {}x{}, precoder {}x{}",
            x_r.len(),
            x_r.streams(),
            psi.rows(),
            psi.cols()
        )));
    }
    Ok(())
}

/// Slow-RSI source-relay rate for any precoder.
///
/// The `n x n` determinants are reduced to `M x M` with Sylvester's identity:
/// `log2 det(c I_n + X W X^H) = n log2 c + log2 det(I_M + W X^H X / c)`.
pub fn rate_slow_general(
    channel: &ChannelRealization,
    x_r: &CodewordMatrix,
    psi: &Precoder,
    params: &SystemParams,
) -> Result<RateReport> {
    check_shapes(channel, x_r, &psi.psi)?;
    let g = gram(&x_r.x);
    let penalty = slow_penalty(&channel.eta, &g, x_r.len(), &psi.covariance(), params)?;
    Ok(RateReport::split(
        no_interference_rate(&channel.eta, params),
        penalty,
        RateRegime::SlowFd,
    ))
}

/// Slow-RSI rate under the eigenbasis precoder, written with `E E^H` in
/// place of `Psi Psi^H` (the unitary factor drops out).
pub fn rate_slow_fullrank(
    channel: &ChannelRealization,
    x_r: &CodewordMatrix,
    psi: &Precoder,
    params: &SystemParams,
) -> Result<RateReport> {
    if psi.design != PrecoderDesign::IrdMax {
        return Err(Error::invalid(format!(
            "full-rank form needs the eigenbasis precoder, got {:?}",
            psi.design
        )));
    }
    let alloc = psi
        .allocation
        .as_ref()
        .ok_or_else(|| Error::invalid("eigenbasis precoder is missing its allocation"))?;
    check_shapes(channel, x_r, &psi.psi)?;
    let g = gram(&x_r.x);
    let eet = ComplexMatrix::from_diag(alloc);
    let penalty = slow_penalty(&channel.eta, &g, x_r.len(), &eet, params)?;
    Ok(RateReport::split(
        no_interference_rate(&channel.eta, params),
        penalty,
        RateRegime::SlowFd,
    ))
}

/// Rank-1 closed form in terms of `alpha = q^H X^H X q`.
///
/// With [`ClosedFormScaling::TraceNormalized`] the interference power is
/// `M alpha` (because `Psi Psi^H = M q q^H`) and the result equals
/// [`rate_slow_general`]; `Literal` uses `alpha` alone.
pub fn rate_slow_rank1_closed_form(
    channel: &ChannelRealization,
    x_r: &CodewordMatrix,
    psi: &Precoder,
    params: &SystemParams,
) -> Result<RateReport> {
    let q = psi
        .direction
        .as_ref()
        .ok_or_else(|| Error::invalid("rank-1 closed form needs a precoder direction"))?;
    check_shapes(channel, x_r, &psi.psi)?;
    let g = gram(&x_r.x);
    let m = q.len();
    let alpha: f64 = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| q[i].conj() * g[(i, j)] * q[j])
        .sum::<C64>()
        .re;
    let gain = match params.closed_form {
        ClosedFormScaling::TraceNormalized => m as f64 * alpha,
        ClosedFormScaling::Literal => alpha,
    };
    let s0 = params.sigma2_rr / params.kappa_r;
    let penalty: f64 = channel
        .eta
        .iter()
        .map(|&e| {
            let s_v = params.sigma2_rr / (params.p_s_tilde() * e + params.kappa_r);
            (s_v * gain).ln_1p() / std::f64::consts::LN_2
                - (s0 * gain).ln_1p() / std::f64::consts::LN_2
        })
        .sum::<f64>()
        / x_r.len() as f64;
    Ok(RateReport::split(
        no_interference_rate(&channel.eta, params),
        penalty,
        RateRegime::SlowFd,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precoders::{hd_precoder, ird_max_precoder, isr_max_precoder, random_precoder};
    use crate::randgen::{draw_channel, draw_codeword, table1_fixture, RngStream};
    use crate::rates::AllocationMode;

    #[test]
    fn scalar_hd_rate() {
        let params = SystemParams {
            p_s: 10.0,
            ..SystemParams::default().with_m(1)
        };
        let h = ComplexMatrix::identity(1);
        let ch = ChannelRealization::new(h.clone(), h).unwrap();
        assert!((rate_hd_sr(&ch, &params).value - 11f64.log2()).abs() < 1e-12);
        let z = ComplexMatrix::zeros(1, 1);
        let ch = ChannelRealization::new(z.clone(), z).unwrap();
        assert_eq!(rate_hd_sr(&ch, &params).value, 0.0);
        assert_eq!(rate_asymptotic_slow(&ch, &params).value, 0.0);
    }

    #[test]
    fn zero_precoder_and_zero_rsi_reduce_to_hd() {
        let params = SystemParams::default().with_n(50);
        let ch = table1_fixture(1).unwrap().channel;
        let mut rng = RngStream::new(1, 0).rng();
        let cw = draw_codeword(50, 2, params.relay_codeword_power(), &mut rng).unwrap();
        let hd = rate_hd_sr(&ch, &params).value;
        let r0 = rate_slow_general(&ch, &cw, &hd_precoder(2).unwrap(), &params).unwrap();
        assert_eq!(r0.value, hd);
        let quiet = params.clone().with_sigma2_rr(0.0);
        let p = random_precoder(2, &mut rng).unwrap();
        let r1 = rate_slow_general(&ch, &cw, &p, &quiet).unwrap();
        assert_eq!(r1.value, rate_hd_sr(&ch, &quiet).value);
    }

    #[test]
    fn fullrank_form_matches_general() {
        let params = SystemParams::default().with_n(30);
        let s = RngStream::new(4, 0);
        let mut rng = s.rng();
        for m in 1..=4 {
            let params = params.clone().with_m(m);
            let ch = draw_channel(m, 1.0, &mut rng).unwrap();
            let cw = draw_codeword(30, m, params.relay_codeword_power(), &mut rng).unwrap();
            for mode in [AllocationMode::Equal, AllocationMode::Waterfill] {
                let p = ird_max_precoder(&ch.h_rd, mode, &params).unwrap();
                let a = rate_slow_general(&ch, &cw, &p, &params).unwrap().value;
                let b = rate_slow_fullrank(&ch, &cw, &p, &params).unwrap().value;
                assert!((a - b).abs() < 1e-9, "M={m}: {a} vs {b}");
            }
        }
        let ch = draw_channel(2, 1.0, &mut rng).unwrap();
        let cw = draw_codeword(30, 2, 10.0, &mut rng).unwrap();
        let isr = isr_max_precoder(&cw).unwrap();
        assert!(rate_slow_fullrank(&ch, &cw, &isr, &params).is_err());
    }

    #[test]
    fn rank1_closed_form_matches_general() {
        let params = SystemParams::default().with_n(40);
        let mut rng = RngStream::new(6, 0).rng();
        for m in 1..=4 {
            let params = params.clone().with_m(m);
            let ch = draw_channel(m, 1.0, &mut rng).unwrap();
            let cw = draw_codeword(40, m, params.relay_codeword_power(), &mut rng).unwrap();
            let p = isr_max_precoder(&cw).unwrap();
            let a = rate_slow_general(&ch, &cw, &p, &params).unwrap();
            let b = rate_slow_rank1_closed_form(&ch, &cw, &p, &params).unwrap();
            assert!((a.value - b.value).abs() < 1e-9);
            let da = a.decomposition.unwrap();
            let db = b.decomposition.unwrap();
            assert!((da.penalty - db.penalty).abs() < 1e-9);
            assert!(da.penalty <= 0.0);
        }
    }

    #[test]
    fn literal_closed_form_is_milder() {
        let params = SystemParams {
            closed_form: ClosedFormScaling::Literal,
            ..SystemParams::default().with_n(40)
        };
        let ch = table1_fixture(2).unwrap().channel;
        let mut rng = RngStream::new(6, 1).rng();
        let cw = draw_codeword(40, 2, params.relay_codeword_power(), &mut rng).unwrap();
        let p = isr_max_precoder(&cw).unwrap();
        let lit = rate_slow_rank1_closed_form(&ch, &cw, &p, &params)
            .unwrap()
            .value;
        let gen = rate_slow_general(&ch, &cw, &p, &params).unwrap().value;
        assert!(lit > gen);
        assert!(lit <= rate_hd_sr(&ch, &params).value);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let params = SystemParams::default();
        let ch = table1_fixture(1).unwrap().channel;
        let mut rng = RngStream::new(0, 0).rng();
        let cw = draw_codeword(10, 3, 1.0, &mut rng).unwrap();
        let p = hd_precoder(2).unwrap();
        assert!(rate_slow_general(&ch, &cw, &p, &params).is_err());
    }
}
