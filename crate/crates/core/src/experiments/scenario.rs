use rayon::prelude::*;

use super::config::{PrecoderMode, ScenarioConfig, ScenarioKind, SweepKind};
use crate::error::Result;
use crate::montecarlo::collect;
use crate::precoders::{
    ird_max_precoder, isr_max_precoder, select_precoder_maxmin, PrecoderDesign,
};
use crate::queue::{
    buffered_throughput, sample_link_rates, upper_bound_throughput, LinkRateSamples,
};
use crate::randgen::{draw_channel, draw_codeword, table1_fixture, ChannelRealization, RngStream};
use crate::rates::{
    no_interference_rate, paired_penalty_draw, rate_fast_irdmax_expect, rate_fast_isrmax_expect,
    rate_hd_sr, rate_rd, rate_slow_general, relay_interference_weights, SystemParams,
};

/// One output value.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub sweep: f64,
    pub metric: String,
    pub value: f64,
    /// Present exactly when the value is a Monte Carlo estimate.
    pub stderr: Option<f64>,
}

/// Named values for one channel, before averaging.
type Metrics = Vec<(String, f64, Option<f64>)>;

/// Runs every sweep point of `config`. Rows come back in sweep order and
/// depend only on the configuration.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let shared = match (config.kind, config.sweep) {
        (ScenarioKind::Queue, SweepKind::Rate | SweepKind::BufferSize) => Some(sample_link_rates(
            &config.params(),
            config.trials,
            &RngStream::new(config.seed, 0),
        )?),
        _ => None,
    };
    let points: Vec<Result<Metrics>> = config
        .values
        .par_iter()
        .enumerate()
        .map(|(idx, &v)| {
            let stream = RngStream::new(config.seed, idx as u64);
            match config.kind {
                ScenarioKind::Queue => queue_point(config, v, &stream, shared.as_ref()),
                _ if config.sweep == SweepKind::Slot => fixture_point(config, v, &stream),
                _ => averaged_point(config, v, &stream),
            }
        })
        .collect();
    let prefix = if config.label.is_empty() {
        String::new()
    } else {
        format!("{}.", config.label)
    };
    let mut rows = Vec::new();
    for (&v, metrics) in config.values.iter().zip(points) {
        for (metric, value, stderr) in metrics? {
            rows.push(ResultRow {
                scenario: config.label.clone(),
                sweep: v,
                metric: format!("{prefix}{metric}"),
                value,
                stderr,
            });
        }
    }
    Ok(rows)
}

/// Source-relay and relay-destination rates of the two designs on one channel.
struct Hop {
    sr_isr: f64,
    sr_ird: f64,
    rd_isr: f64,
    rd_ird: f64,
}

fn channel_metrics(
    config: &ScenarioConfig,
    params: &SystemParams,
    ch: &ChannelRealization,
    rng: &mut crate::randgen::StreamRng,
    fast_trials: Option<(usize, &RngStream)>,
) -> Result<Metrics> {
    let cw = draw_codeword(params.n, params.m, params.relay_codeword_power(), rng)?;
    let isr = isr_max_precoder(&cw)?;
    let ird = ird_max_precoder(&ch.h_rd, params.allocation, params)?;
    let alloc = ird
        .allocation
        .clone()
        .expect("eigenbasis precoder has an allocation");
    let mut errors = Vec::new();
    let (sr_isr, sr_ird) = match config.kind {
        ScenarioKind::RateSlow => (
            rate_slow_general(ch, &cw, &isr, params)?.value,
            rate_slow_general(ch, &cw, &ird, params)?.value,
        ),
        _ => match fast_trials {
            Some((trials, stream)) => {
                let a = rate_fast_isrmax_expect(ch, params, trials, &stream.substream(1))?;
                let b = rate_fast_irdmax_expect(ch, params, &alloc, trials, &stream.substream(2))?;
                errors.push(a.std_error);
                errors.push(b.std_error);
                (a.value, b.value)
            }
            None => {
                // a single symbol draw keeps the average over channels unbiased
                let base = no_interference_rate(&ch.eta, params);
                let w = relay_interference_weights(&alloc, params);
                let (p_isr, p_ird) = paired_penalty_draw(ch, params, &w, rng);
                ((base + p_isr).max(0.0), (base + p_ird).max(0.0))
            }
        },
    };
    let hop = Hop {
        sr_isr,
        sr_ird,
        rd_isr: rate_rd(&ch.h_rd, &isr, params)?.value,
        rd_ird: rate_rd(&ch.h_rd, &ird, params)?.value,
    };
    let se = |i: usize| errors.get(i).copied().flatten();
    let mut out: Metrics = vec![("no_interference".into(), rate_hd_sr(ch, params).value, None)];
    for mode in &config.precoders {
        match mode {
            PrecoderMode::Hd => out.push(("hd".into(), rate_hd_sr(ch, params).value, None)),
            PrecoderMode::IsrMax => out.push(("isr_max".into(), hop.sr_isr, se(0))),
            PrecoderMode::IrdMax => out.push(("ird_max".into(), hop.sr_ird, se(1))),
            PrecoderMode::MaxminSelect => {
                let choice =
                    select_precoder_maxmin((hop.sr_isr, hop.rd_isr), (hop.sr_ird, hop.rd_ird))?;
                // the minimum inherits the error bar only when it is the estimated hop
                let min_isr = if hop.sr_isr <= hop.rd_isr {
                    (hop.sr_isr, se(0))
                } else {
                    (hop.rd_isr, None)
                };
                let min_ird = if hop.sr_ird <= hop.rd_ird {
                    (hop.sr_ird, se(1))
                } else {
                    (hop.rd_ird, None)
                };
                let best = if choice == PrecoderDesign::IrdMax {
                    min_ird
                } else {
                    min_isr
                };
                out.extend([
                    ("rd_isr_max".into(), hop.rd_isr, None),
                    ("rd_ird_max".into(), hop.rd_ird, None),
                    ("min_isr_max".into(), min_isr.0, min_isr.1),
                    ("min_ird_max".into(), min_ird.0, min_ird.1),
                    ("maxmin".into(), best.0, best.1),
                    (
                        "selected_ird_max".into(),
                        f64::from(u8::from(choice == PrecoderDesign::IrdMax)),
                        None,
                    ),
                ]);
            }
        }
    }
    Ok(out)
}

fn fixture_point(config: &ScenarioConfig, v: f64, stream: &RngStream) -> Result<Metrics> {
    let (params, _, _) = config.point(v)?;
    let slot = table1_fixture(v as usize)?;
    let mut rng = stream.substream(0).rng();
    let fast = (config.kind == ScenarioKind::RateFast).then_some((config.trials, stream));
    channel_metrics(config, &params, &slot.channel, &mut rng, fast)
}

fn averaged_point(config: &ScenarioConfig, v: f64, stream: &RngStream) -> Result<Metrics> {
    let (params, _, _) = config.point(v)?;
    let draws: Vec<Result<Metrics>> = collect(config.trials, stream, |rng| {
        let ch = draw_channel(params.m, params.channel_variance, rng)?;
        channel_metrics(config, &params, &ch, rng, None)
    });
    let mut sums: Vec<(String, f64, f64)> = Vec::new();
    for d in draws {
        let d = d?;
        if sums.is_empty() {
            sums = d.iter().map(|(k, _, _)| (k.clone(), 0.0, 0.0)).collect();
        }
        for (acc, (_, x, _)) in sums.iter_mut().zip(&d) {
            acc.1 += x;
            acc.2 += x * x;
        }
    }
    let n = config.trials as f64;
    Ok(sums
        .into_iter()
        .map(|(k, s, s2)| {
            let mean = s / n;
            let var = if n > 1.0 {
                ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            (k, mean, Some((var / n).sqrt()))
        })
        .collect())
}

fn queue_point(
    config: &ScenarioConfig,
    v: f64,
    stream: &RngStream,
    shared: Option<&LinkRateSamples>,
) -> Result<Metrics> {
    let (params, q_max, rate) = config.point(v)?;
    let owned;
    let samples = match shared {
        Some(s) => s,
        None => {
            owned = sample_link_rates(&params, config.trials, stream)?;
            &owned
        }
    };
    let probs = samples.probs(rate);
    let n = probs.trials as f64;
    let binom = |p: f64| Some((p * (1.0 - p) / n).sqrt());
    let buffered = buffered_throughput(&probs, q_max)?;
    let conventional = samples.conventional_success(rate);
    let upper = upper_bound_throughput(&probs);
    let scaled = |se: Option<f64>| se.map(|s| s * rate);
    Ok(vec![
        ("p_sr".into(), probs.p_sr_fd, binom(probs.p_sr_fd)),
        ("p_rd".into(), probs.p_rd, binom(probs.p_rd)),
        ("buffered_mu_d".into(), buffered.mu_d, buffered.std_error),
        (
            "buffered_mu_bits".into(),
            buffered.mu_bits,
            scaled(buffered.std_error),
        ),
        (
            "conventional_mu_d".into(),
            conventional.mu_d,
            conventional.std_error,
        ),
        (
            "conventional_mu_bits".into(),
            conventional.mu_bits,
            scaled(conventional.std_error),
        ),
        ("upper_bound_mu_d".into(), upper.mu_d, upper.std_error),
        (
            "upper_bound_mu_bits".into(),
            upper.mu_bits,
            scaled(upper.std_error),
        ),
    ])
}
