//! Single-antenna special case, where the fast-RSI expectation has a closed
//! form through the exponential integral.

use std::f64::consts::LN_2;

use super::{log2_pos, scaled_exp_integral_e1, RateRegime, RateReport, SystemParams};
use crate::error::{Error, Result};
use crate::linalg::C64;

fn require_siso(params: &SystemParams) -> Result<()> {
    if params.m != 1 {
        return Err(Error::invalid(format!(
            "single-antenna formula needs M = 1, got M = {}",
            params.m
        )));
    }
    Ok(())
}

/// `E{log2(1 + gamma sigma^2 |x|^2)}` for `|x|^2` exponential with mean `P_R`:
/// `e^{1/(gamma sigma^2 P_R)} E1(1/(gamma sigma^2 P_R)) / ln 2`.
pub fn siso_interference_term(gamma: f64, params: &SystemParams) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::invalid(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let scale = gamma * params.sigma2_rr * params.relay_element_variance();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(scaled_exp_integral_e1(1.0 / scale)? / LN_2)
}

/// Fast-RSI source-relay rate for `M = 1`.
pub fn rate_siso_fast_sr(h_sr: C64, params: &SystemParams) -> Result<RateReport> {
    require_siso(params)?;
    let gain = h_sr.norm_sqr() * params.p_s_tilde();
    let no_int = log2_pos(1.0 + gain / params.kappa_r);
    let gamma1 = 1.0 / (params.kappa_r + gain);
    let gamma2 = 1.0 / params.kappa_r;
    let penalty = siso_interference_term(gamma1, params)? - siso_interference_term(gamma2, params)?;
    Ok(RateReport::split(
        no_int,
        penalty.min(0.0),
        RateRegime::SisoFast,
    ))
}

/// Relay-destination rate `log2(1 + |h|^2 P_R/kappa_D)` for `M = 1`.
pub fn rate_siso_rd(h_rd: C64, params: &SystemParams) -> Result<RateReport> {
    require_siso(params)?;
    Ok(RateReport::exact(
        log2_pos(1.0 + h_rd.norm_sqr() * params.p_r / params.kappa_d),
        RateRegime::Rd,
    ))
}
