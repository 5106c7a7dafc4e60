//! Scenario configuration, sweeps over the model parameters, and CSV
//! output for the published figures.

mod config;
mod figures;
mod scenario;

pub use config::{PrecoderMode, ScenarioConfig, ScenarioKind, SweepKind};
pub use figures::{
    figure, figure_configs, to_csv, write_csv, FigureOverrides, CSV_HEADER, OUTAGE_TRIALS,
    RATE_TRIALS,
};
pub use scenario::{run_scenario, ResultRow};
