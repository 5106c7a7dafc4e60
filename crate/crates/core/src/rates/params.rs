use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the relay's average power `P_R` is spread over codeword entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelayVariance {
    /// Each entry carries `P_R / M`, so `(1/n) E||vec X_R||^2 = P_R`.
    #[default]
    PerStream,
    /// Each entry carries `P_R`.
    PerElement,
}

/// Scaling used by the rank-1 and equal-power closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormScaling {
    /// Precoders keep `Trace(Psi Psi^H) = M`; closed forms agree with the
    /// general determinant formulas.
    #[default]
    TraceNormalized,
    /// Drops the factor `M` in the rank-1 forms and uses `|E_i|^2 = 1/M`
    /// in the equal-power fast-RSI form, as the closed forms are printed.
    Literal,
}

/// Power split across the relay's eigenmodes for the relay-destination precoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMode {
    #[default]
    Equal,
    Waterfill,
}

/// Scalar model parameters. Powers and variances are linear, not dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Antennas per node.
    pub m: usize,
    /// Codeword length in symbols.
    pub n: usize,
    pub p_s: f64,
    pub p_r: f64,
    pub kappa_r: f64,
    pub kappa_d: f64,
    /// Residual self-interference variance.
    pub sigma2_rr: f64,
    /// Variance of every channel coefficient.
    pub channel_variance: f64,
    pub relay_variance: RelayVariance,
    pub closed_form: ClosedFormScaling,
    pub allocation: AllocationMode,
}

impl Default for SystemParams {
    /// `P_S/kappa = P_R/kappa = 10 dB`, `sigma_RR^2 = 0 dB`, unit noise and channels.
    fn default() -> Self {
        Self {
            m: 2,
            n: 2000,
            p_s: 10.0,
            p_r: 10.0,
            kappa_r: 1.0,
            kappa_d: 1.0,
            sigma2_rr: 1.0,
            channel_variance: 1.0,
            relay_variance: RelayVariance::PerStream,
            closed_form: ClosedFormScaling::TraceNormalized,
            allocation: AllocationMode::Equal,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl SystemParams {
    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_sigma2_rr(mut self, sigma2_rr: f64) -> Self {
        self.sigma2_rr = sigma2_rr;
        self
    }

    /// Per-stream source power `P_S / M`.
    pub fn p_s_tilde(&self) -> f64 {
        self.p_s / self.m as f64
    }

    /// Per-stream relay power `P_R / M`.
    pub fn p_r_tilde(&self) -> f64 {
        self.p_r / self.m as f64
    }

    /// Variance of one relay codeword entry under the active convention.
    pub fn relay_element_variance(&self) -> f64 {
        match self.relay_variance {
            RelayVariance::PerStream => self.p_r_tilde(),
            RelayVariance::PerElement => self.p_r,
        }
    }

    /// `total_power` argument for drawing a relay codeword.
    pub fn relay_codeword_power(&self) -> f64 {
        self.relay_element_variance() * self.m as f64
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_s", self.p_s),
            ("p_r", self.p_r),
            ("kappa_r", self.kappa_r),
            ("kappa_d", self.kappa_d),
            ("channel_variance", self.channel_variance),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.sigma2_rr >= 0.0) || !self.sigma2_rr.is_finite() {
            return Err(Error::config(
                "sigma2_rr",
                format!("must be non-negative, got {}", self.sigma2_rr),
            ));
        }
        if self.m == 0 {
            return Err(Error::config("m", "must be at least 1"));
        }
        if self.n <= self.m {
            return Err(Error::config(
                "n",
                format!("codeword length {} must exceed M = {}", self.n, self.m),
            ));
        }
        Ok(())
    }
}
