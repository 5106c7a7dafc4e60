//! Achievable-rate formulas for the source-relay and relay-destination links.
//!
//! All rates are in bits/sec/Hz. Source-relay rates under full-duplex
//! operation are reported as a no-interference term plus a non-positive
//! self-interference penalty.

mod expint;
mod fast;
mod params;
mod relay_destination;
mod siso;
mod slow;

pub use expint::{exp_integral_e1, scaled_exp_integral_e1};
pub(crate) use fast::paired_penalty_draw;
pub use fast::{
    rate_fast_general, rate_fast_irdmax_expect, rate_fast_isrmax_expect, rate_fast_large_m_approx,
    relay_interference_weights,
};
pub use params::{db_to_linear, AllocationMode, ClosedFormScaling, RelayVariance, SystemParams};
pub use relay_destination::{rate_rd, rate_rd_eigenmodes};
pub use siso::{rate_siso_fast_sr, rate_siso_rd, siso_interference_term};
pub use slow::{
    rate_asymptotic_slow, rate_hd_sr, rate_slow_fullrank, rate_slow_general,
    rate_slow_rank1_closed_form,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRegime {
    Hd,
    SlowFd,
    FastFd,
    Rd,
    SisoFast,
}

/// Split of a full-duplex source-relay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateDecomposition {
    pub no_interference: f64,
    /// Always `<= 0`.
    pub penalty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub value: f64,
    pub regime: RateRegime,
    pub decomposition: Option<RateDecomposition>,
    /// Present for Monte Carlo estimates.
    pub std_error: Option<f64>,
}

impl RateReport {
    pub(crate) fn exact(value: f64, regime: RateRegime) -> Self {
        Self {
            value: value.max(0.0),
            regime,
            decomposition: None,
            std_error: None,
        }
    }

    pub(crate) fn split(no_interference: f64, penalty: f64, regime: RateRegime) -> Self {
        debug_assert!(
            penalty <= 1e-12,
            "interference penalty must be non-positive"
        );
        let penalty = penalty.min(0.0);
        Self {
            value: (no_interference + penalty).max(0.0),
            regime,
            decomposition: Some(RateDecomposition {
                no_interference,
                penalty,
            }),
            std_error: None,
        }
    }
}

/// `log2` that insists on a positive argument; only rounding-level
/// underflow is absorbed.
pub(crate) fn log2_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0, "log2 argument must be positive, got {x}");
    x.max(f64::MIN_POSITIVE).log2()
}

/// Interference-free source-relay rate `sum_v log2(1 + P_S/(M kappa_R) eta_v)`.
pub fn no_interference_rate(eta: &[f64], params: &SystemParams) -> f64 {
    let snr = params.p_s_tilde() / params.kappa_r;
    eta.iter().map(|&e| log2_pos(1.0 + snr * e)).sum()
}
