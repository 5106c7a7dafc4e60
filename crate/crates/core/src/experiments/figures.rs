//! Preset scenarios for each published figure and CSV output.

use std::fmt::Write as _;
use std::path::Path;

use super::config::{PrecoderMode, ScenarioConfig, ScenarioKind, SweepKind};
use super::scenario::{run_scenario, ResultRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "sweep,metric,value,stderr";

/// Default draws per point for averaged rates and per-channel expectations.
pub const RATE_TRIALS: usize = 10_000;
/// Default channel draws per outage probability.
pub const OUTAGE_TRIALS: usize = 100_000;

/// Command-line overrides applied on top of a preset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FigureOverrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

fn grid(lo: usize, hi: usize) -> Vec<f64> {
    (lo..=hi).map(|v| v as f64).collect()
}

fn base(kind: ScenarioKind) -> ScenarioConfig {
    ScenarioConfig {
        kind,
        ..ScenarioConfig::default()
    }
}

/// Scenarios behind figure `id` (2 through 11).
pub fn figure_configs(id: u32) -> Result<Vec<ScenarioConfig>> {
    let both = vec![PrecoderMode::IsrMax, PrecoderMode::IrdMax];
    let maxmin = vec![PrecoderMode::MaxminSelect];
    let slots = |kind, n, precoders: &Vec<PrecoderMode>, trials| ScenarioConfig {
        n,
        trials,
        precoders: precoders.clone(),
        ..base(kind)
    };
    let by_m = |kind, precoders: &Vec<PrecoderMode>| ScenarioConfig {
        sweep: SweepKind::Antennas,
        values: grid(1, 8),
        trials: RATE_TRIALS,
        precoders: precoders.clone(),
        ..base(kind)
    };
    let queue = ScenarioConfig {
        trials: OUTAGE_TRIALS,
        ..base(ScenarioKind::Queue)
    };
    let configs = match id {
        2 => vec![slots(ScenarioKind::RateSlow, 50, &both, 1)],
        3 => vec![slots(ScenarioKind::RateSlow, 2000, &both, 1)],
        4 => vec![by_m(ScenarioKind::RateSlow, &both)],
        5 => vec![slots(ScenarioKind::RateFast, 50, &both, OUTAGE_TRIALS)],
        6 => vec![by_m(ScenarioKind::RateFast, &both)],
        7 => vec![slots(ScenarioKind::RateFast, 50, &maxmin, OUTAGE_TRIALS)],
        8 => vec![by_m(ScenarioKind::RateFast, &maxmin)],
        9 => vec![ScenarioConfig {
            sweep: SweepKind::BufferSize,
            values: grid(1, 10),
            ..queue.clone()
        }],
        10 => [("rsi_0db", 0.0), ("rsi_m10db", -10.0)]
            .into_iter()
            .map(|(label, db)| ScenarioConfig {
                label: label.into(),
                m: 1,
                sigma2_rr_db: db,
                sweep: SweepKind::Rate,
                values: (1..=32).map(|k| 0.25 * k as f64).collect(),
                ..queue.clone()
            })
            .collect(),
        11 => [("r1", 1.0), ("r6", 6.0)]
            .into_iter()
            .map(|(label, rate)| ScenarioConfig {
                label: label.into(),
                rate,
                sweep: SweepKind::Antennas,
                values: grid(1, 4),
                ..queue.clone()
            })
            .collect(),
        _ => {
            return Err(Error::invalid(format!(
                "unknown figure {id}; expected 2 through 11"
            )))
        }
    };
    Ok(configs)
}

/// Runs every scenario of figure `id`.
pub fn figure(id: u32, overrides: &FigureOverrides) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for mut cfg in figure_configs(id)? {
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = overrides.trials {
            cfg.trials = trials;
        }
        rows.extend(run_scenario(&cfg)?);
    }
    Ok(rows)
}

/// Renders rows with the shortest round-trip float formatting, so equal
/// inputs give byte-identical text.
pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(32 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let se = r.stderr.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", r.sweep, r.metric, r.value, se);
    }
    out
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    std::fs::write(path, to_csv(rows))?;
    Ok(())
}
