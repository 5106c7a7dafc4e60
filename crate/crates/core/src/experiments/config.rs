use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::{db_to_linear, AllocationMode, ClosedFormScaling, RelayVariance, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Source-relay rates with RSI fixed over a codeword.
    #[default]
    RateSlow,
    /// Source-relay rates with a fresh RSI draw per symbol.
    RateFast,
    /// Fixed-rate buffered relaying throughput.
    Queue,
}

/// Which parameter the scenario varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Fixed 2x2 channel table slots 1..=3.
    #[default]
    Slot,
    BlockLength,
    Antennas,
    BufferSize,
    Rate,
    /// RSI variance in dB.
    RsiDb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecoderMode {
    Hd,
    IsrMax,
    IrdMax,
    /// Both designs plus the max-min selection between them.
    MaxminSelect,
}

/// One experiment, read from a flat TOML table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Prefix for metric names; empty for none.
    pub label: String,
    pub m: usize,
    pub n: usize,
    pub p_s_db: f64,
    pub p_r_db: f64,
    /// `-inf` switches the RSI off.
    pub sigma2_rr_db: f64,
    pub kappa_r: f64,
    pub kappa_d: f64,
    pub channel_variance: f64,
    pub seed: u64,
    /// Monte Carlo draws per sweep point.
    pub trials: usize,
    pub sweep: SweepKind,
    pub values: Vec<f64>,
    pub precoders: Vec<PrecoderMode>,
    pub variance_convention: RelayVariance,
    pub closed_form: ClosedFormScaling,
    pub allocation: AllocationMode,
    pub q_max: usize,
    pub rate: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::RateSlow,
            label: String::new(),
            m: 2,
            n: 50,
            p_s_db: 10.0,
            p_r_db: 10.0,
            sigma2_rr_db: 0.0,
            kappa_r: 1.0,
            kappa_d: 1.0,
            channel_variance: 1.0,
            seed: 1,
            trials: 10_000,
            sweep: SweepKind::Slot,
            values: vec![1.0, 2.0, 3.0],
            precoders: vec![PrecoderMode::IsrMax, PrecoderMode::IrdMax],
            variance_convention: RelayVariance::PerStream,
            closed_form: ClosedFormScaling::TraceNormalized,
            allocation: AllocationMode::Equal,
            q_max: 3,
            rate: 1.0,
        }
    }
}

fn integral(field: &str, v: f64, min: usize) -> Result<usize> {
    if v.fract() != 0.0 || v < min as f64 || v > u32::MAX as f64 {
        return Err(Error::config(
            field,
            format!("expected an integer >= {min}, got {v}"),
        ));
    }
    Ok(v as usize)
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            // serde reports unknown and mistyped keys in the message text
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field"))
                .unwrap_or("document")
                .to_string();
            Error::config(field, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Model parameters before any sweep value is applied.
    pub fn params(&self) -> SystemParams {
        SystemParams {
            m: self.m,
            n: self.n,
            p_s: db_to_linear(self.p_s_db),
            p_r: db_to_linear(self.p_r_db),
            kappa_r: self.kappa_r,
            kappa_d: self.kappa_d,
            sigma2_rr: db_to_linear(self.sigma2_rr_db),
            channel_variance: self.channel_variance,
            relay_variance: self.variance_convention,
            closed_form: self.closed_form,
            allocation: self.allocation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("values", "sweep grid is empty"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.q_max == 0 {
            return Err(Error::config("q_max", "must be at least 1"));
        }
        if !(self.rate >= 0.0) || !self.rate.is_finite() {
            return Err(Error::config(
                "rate",
                format!("must be >= 0, got {}", self.rate),
            ));
        }
        for (field, v) in [("p_s_db", self.p_s_db), ("p_r_db", self.p_r_db)] {
            if !v.is_finite() {
                return Err(Error::config(field, format!("must be finite, got {v}")));
            }
        }
        if self.sigma2_rr_db.is_nan() || self.sigma2_rr_db == f64::INFINITY {
            return Err(Error::config(
                "sigma2_rr_db",
                format!("must be finite or -inf, got {}", self.sigma2_rr_db),
            ));
        }
        let allowed: &[SweepKind] = match self.kind {
            ScenarioKind::RateSlow | ScenarioKind::RateFast => &[
                SweepKind::Slot,
                SweepKind::BlockLength,
                SweepKind::Antennas,
                SweepKind::RsiDb,
            ],
            ScenarioKind::Queue => &[
                SweepKind::Antennas,
                SweepKind::BufferSize,
                SweepKind::Rate,
                SweepKind::RsiDb,
            ],
        };
        if !allowed.contains(&self.sweep) {
            return Err(Error::config(
                "sweep",
                format!(
                    "{:?} sweep is not available for {:?}",
                    self.sweep, self.kind
                ),
            ));
        }
        if self.kind != ScenarioKind::Queue && self.precoders.is_empty() {
            return Err(Error::config("precoders", "list is empty"));
        }
        if self.sweep == SweepKind::Slot && self.m != 2 {
            return Err(Error::config(
                "m",
                "the fixed channel slots are 2x2, so m must be 2",
            ));
        }
        for &v in &self.values {
            self.check_value(v)?;
            self.point(v)?.0.validate()?;
        }
        self.params().validate()
    }

    fn check_value(&self, v: f64) -> Result<()> {
        match self.sweep {
            SweepKind::Slot => {
                let s = integral("values", v, 1)?;
                if s > 3 {
                    return Err(Error::config("values", format!("slot {s} does not exist")));
                }
            }
            SweepKind::BlockLength => {
                integral("values", v, self.m + 1)?;
            }
            SweepKind::Antennas => {
                integral("values", v, 1)?;
            }
            SweepKind::BufferSize => {
                integral("values", v, 1)?;
            }
            SweepKind::Rate => {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::config(
                        "values",
                        format!("rates must be positive, got {v}"),
                    ));
                }
            }
            SweepKind::RsiDb => {
                if v.is_nan() || v == f64::INFINITY {
                    return Err(Error::config("values", format!("bad RSI level {v}")));
                }
            }
        }
        Ok(())
    }

    /// Parameters, buffer size and rate at sweep value `v`.
    pub(crate) fn point(&self, v: f64) -> Result<(SystemParams, usize, f64)> {
        let mut params = self.params();
        let mut q_max = self.q_max;
        let mut rate = self.rate;
        match self.sweep {
            SweepKind::Slot => {}
            SweepKind::BlockLength => params.n = v as usize,
            SweepKind::Antennas => params.m = v as usize,
            SweepKind::BufferSize => q_max = v as usize,
            SweepKind::Rate => rate = v,
            SweepKind::RsiDb => params.sigma2_rr = db_to_linear(v),
        }
        if params.n <= params.m {
            return Err(Error::config(
                "n",
                format!("block length {} must exceed M = {}", params.n, params.m),
            ));
        }
        Ok((params, q_max, rate))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ScenarioConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);
        assert_eq!(ScenarioConfig::from_toml_str("").unwrap(), cfg);
    }

    #[test]
    fn minimal_document() {
        let cfg = ScenarioConfig::from_toml_str(
            r#"
            kind = "queue"
            sweep = "buffer_size"
            values = [1, 2, 3]
            m = 1
            sigma2_rr_db = -inf
            variance_convention = "per_element"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.kind, ScenarioKind::Queue);
        assert_eq!(cfg.params().sigma2_rr, 0.0);
        assert_eq!(cfg.params().relay_variance, RelayVariance::PerElement);
        assert_eq!(cfg.point(2.0).unwrap().1, 2);
    }

    fn field_of(text: &str) -> String {
        match ScenarioConfig::from_toml_str(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of("values = []"), "values");
        assert_eq!(field_of("trials = 0"), "trials");
        assert_eq!(field_of("bogus = 1"), "bogus");
        assert_eq!(field_of("m = 3"), "m");
        assert_eq!(field_of("values = [4]"), "values");
        assert_eq!(field_of("sweep = \"block_length\"\nvalues = [2]"), "values");
        assert_eq!(field_of("kind = \"queue\"\nsweep = \"slot\""), "sweep");
        assert_eq!(field_of("kappa_r = -1.0"), "kappa_r");
        assert_eq!(field_of("precoders = []"), "precoders");
        assert_eq!(field_of("sweep = \"antennas\"\nvalues = [60]"), "n");
    }
}
