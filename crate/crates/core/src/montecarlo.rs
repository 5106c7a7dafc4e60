//! Chunked, order-independent Monte Carlo averaging.
//!
//! Trials are split into fixed-size chunks; chunk `k` draws from
//! `stream.substream(k)`. Chunks run on the rayon pool but are reduced in
//! index order, so results depend only on `(stream, trials)`.

use rayon::prelude::*;

use crate::randgen::{RngStream, StreamRng};

pub(crate) const CHUNK: usize = 1 << 14;

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

pub(crate) fn chunks(trials: usize) -> Vec<(u64, usize)> {
    (0..trials.div_ceil(CHUNK))
        .map(|k| (k as u64, CHUNK.min(trials - k * CHUNK)))
        .collect()
}

/// Averages `sample` over `trials` independent draws.
pub fn estimate<F>(trials: usize, stream: &RngStream, sample: F) -> Estimate
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    assert!(trials > 0, "need at least one trial");
    let partial: Vec<(f64, f64)> = chunks(trials)
        .into_par_iter()
        .map(|(k, len)| {
            let mut rng = stream.substream(k).rng();
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..len {
                let v = sample(&mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = trials as f64;
    let mean = s / n;
    let var = if trials > 1 {
        ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Estimate {
        mean,
        std_error: (var / n).sqrt(),
        trials,
    }
}

/// Runs `sample` once per trial and keeps every output, in trial order.
pub fn collect<T, F>(trials: usize, stream: &RngStream, sample: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng) -> T + Sync,
{
    let parts: Vec<Vec<T>> = chunks(trials)
        .into_par_iter()
        .map(|(k, len)| {
            let mut rng = stream.substream(k).rng();
            (0..len).map(|_| sample(&mut rng)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}
