use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fdrelay::experiments::{
    figure, run_scenario, to_csv, FigureOverrides, ResultRow, ScenarioConfig, ScenarioKind,
    SweepKind,
};
use fdrelay::linalg::C64;
use fdrelay::rates::{rate_siso_fast_sr, rate_siso_rd};
use fdrelay::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fdrelay",
    version,
    about = "Full-duplex MIMO relay rate and throughput simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Scenario file (flat TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo draws per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Slow-RSI source-relay rates.
    RateSlow(Common),
    /// Fast-RSI source-relay rates.
    RateFast(Common),
    /// Single-antenna fast-RSI closed form for one channel pair.
    RateSiso {
        #[command(flatten)]
        common: Common,
        /// Source-relay coefficient as `re,im`.
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        h_sr: String,
        /// Relay-destination coefficient as `re,im`.
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        h_rd: String,
    },
    /// Buffered relaying throughput.
    Queue(Common),
    /// Regenerates the data behind one figure (2 through 11).
    Figure {
        id: u32,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quick internal consistency checks.
    Selftest,
}

fn load(common: &Common, kind: ScenarioKind) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::from_path(path)?,
        None => default_config(kind),
    };
    if common.config.is_some() && cfg.kind != kind {
        return Err(Error::Config {
            field: "kind".into(),
            reason: format!("file describes {:?}, command expects {:?}", cfg.kind, kind),
        });
    }
    cfg.kind = kind;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn default_config(kind: ScenarioKind) -> ScenarioConfig {
    let cfg = ScenarioConfig {
        kind,
        ..ScenarioConfig::default()
    };
    match kind {
        ScenarioKind::Queue => ScenarioConfig {
            sweep: SweepKind::BufferSize,
            values: (1..=10).map(f64::from).collect(),
            trials: fdrelay::experiments::OUTAGE_TRIALS,
            ..cfg
        },
        _ => cfg,
    }
}

fn emit(rows: &[ResultRow], out: Option<&PathBuf>) -> Result<()> {
    let text = to_csv(rows);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_complex(field: &str, s: &str) -> Result<C64> {
    let bad = || Error::Config {
        field: field.into(),
        reason: format!("expected `re,im`, got `{s}`"),
    };
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

fn rate_siso(common: &Common, h_sr: &str, h_rd: &str) -> Result<()> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::from_path(path)?,
        None => ScenarioConfig::default(),
    };
    cfg.m = 1;
    let params = cfg.params();
    params.validate()?;
    let h_sr = parse_complex("h_sr", h_sr)?;
    let h_rd = parse_complex("h_rd", h_rd)?;
    let sr = rate_siso_fast_sr(h_sr, &params)?;
    let rd = rate_siso_rd(h_rd, &params)?;
    let split = sr
        .decomposition
        .expect("full-duplex rate carries its split");
    let row = |metric: &str, value| ResultRow {
        scenario: String::new(),
        sweep: 0.0,
        metric: metric.into(),
        value,
        stderr: None,
    };
    emit(
        &[
            row("no_interference", split.no_interference),
            row("penalty", split.penalty),
            row("fast_sr", sr.value),
            row("rd", rd.value),
        ],
        common.out.as_ref(),
    )
}

fn selftest() -> Result<()> {
    let mut failed = 0;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    };
    let rows = figure(3, &FigureOverrides::default())?;
    let value = |metric: &str, slot: f64| {
        rows.iter()
            .find(|r| r.metric == metric && r.sweep == slot)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };
    for slot in [1.0, 2.0, 3.0] {
        let base = value("no_interference", slot);
        for p in ["isr_max", "ird_max"] {
            let gap = base - value(p, slot);
            check(
                &format!("slow rate at n=2000, slot {slot}, {p}: gap {gap:.2e}"),
                (0.0..0.05).contains(&gap),
            );
        }
    }
    let e1 = fdrelay::rates::exp_integral_e1(1.0)?;
    check(
        "exponential integral at 1",
        (e1 - 0.219_383_934_395_520_3).abs() < 1e-14,
    );
    let chain = fdrelay::queue::QueueChain::new(0.9, 0.24, 0.14, 0.7, 5)?;
    let dist = fdrelay::queue::stationary(&chain);
    let closed = fdrelay::queue::empty_probability_closed_form(&chain)?;
    check(
        "queue product form matches closed form",
        (dist.beta0() - closed).abs() < 1e-12 && dist.balance_residual(&chain) < 1e-12,
    );
    if failed > 0 {
        return Err(Error::Numerical {
            message: format!("{failed} self-test check(s) failed"),
            residual: failed as f64,
        });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RateSlow(c) => emit(
            &run_scenario(&load(&c, ScenarioKind::RateSlow)?)?,
            c.out.as_ref(),
        ),
        Command::RateFast(c) => emit(
            &run_scenario(&load(&c, ScenarioKind::RateFast)?)?,
            c.out.as_ref(),
        ),
        Command::Queue(c) => emit(
            &run_scenario(&load(&c, ScenarioKind::Queue)?)?,
            c.out.as_ref(),
        ),
        Command::RateSiso { common, h_sr, h_rd } => rate_siso(&common, &h_sr, &h_rd),
        Command::Figure {
            id,
            seed,
            trials,
            out,
        } => emit(
            &figure(id, &FigureOverrides { seed, trials })?,
            out.as_ref(),
        ),
        Command::Selftest => selftest(),
    }
}

fn error_line(e: &Error) -> String {
    let field = match e {
        Error::Config { field, .. } => format!(" field={field}"),
        _ => String::new(),
    };
    format!(
        "error kind={}{field} msg=\"{}\"",
        e.kind(),
        e.to_string().replace('"', "'")
    )
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}
