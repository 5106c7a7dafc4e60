//! Buffer chain and throughput against the explicit transition matrix,
//! simulation and single-antenna outage formulas.

mod common;

use fdrelay::queue::{
    buffered_throughput, build_chain, empty_probability_closed_form, estimate_link_probs,
    sample_link_rates, simulate_queue, stationary, stationary_beta0_infinite,
    upper_bound_throughput, LinkProbs, QueueChain,
};
use fdrelay::randgen::RngStream;
use fdrelay::rates::SystemParams;
use proptest::prelude::*;
use rand::Rng;

fn random_chain(rng: &mut impl Rng) -> QueueChain {
    let a: f64 = rng.random_range(0.01..0.9);
    let b: f64 = rng.random_range(0.01..(1.0 - a).max(0.011));
    QueueChain::new(
        rng.random_range(0.01..1.0),
        a,
        b.min(1.0 - a),
        rng.random_range(0.01..1.0),
        rng.random_range(1..=12),
    )
    .unwrap()
}

#[test]
fn product_form_matches_transition_matrix() {
    let mut rng = RngStream::new(31, 0).rng();
    for _ in 0..100 {
        let chain = random_chain(&mut rng);
        let ours = stationary(&chain);
        let oracle = common::stationary_by_power_iteration(&chain);
        for (x, y) in ours.beta.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-10, "{chain:?}: {x} vs {y}");
        }
        if chain.a > 0.0 && chain.b > 0.0 {
            let closed = empty_probability_closed_form(&chain).unwrap();
            assert!((closed - ours.beta0()).abs() < 1e-10);
        }
    }
}

#[test]
fn worked_chain_matches_transition_matrix() {
    let chain = QueueChain::new(0.9, 0.24, 0.14, 0.7, 5).unwrap();
    let ours = stationary(&chain);
    let oracle = common::stationary_by_power_iteration(&chain);
    assert!(ours.total_variation(&oracle) < 1e-12);
    assert!(ours.balance_residual(&chain) < 1e-12);
}

#[test]
fn unlimited_buffer_is_the_large_buffer_limit() {
    let chain = QueueChain::new(0.5, 0.1, 0.3, 0.3, 10_000).unwrap();
    let limit = stationary_beta0_infinite(&chain).unwrap();
    assert!((limit - 0.2 / 0.7).abs() < 1e-15);
    assert!((empty_probability_closed_form(&chain).unwrap() - limit).abs() < 1e-8);

    let mut rng = RngStream::new(32, 0).rng();
    let mut checked = 0;
    for _ in 0..200 {
        let c = random_chain(&mut rng);
        let big = QueueChain { q_max: 10_000, ..c };
        match stationary_beta0_infinite(&big) {
            // with a/b within about 1e-3 of one the buffer is still far from
            // its limit at this size, so only well-separated chains count
            Ok(limit) if (c.a / c.b).powi(9_999) < 1e-12 => {
                let finite = empty_probability_closed_form(&big).unwrap();
                assert!((finite - limit).abs() < 1e-8, "{big:?}");
                checked += 1;
            }
            Ok(_) => {}
            Err(e) => assert!(c.a >= c.b, "{e}"),
        }
    }
    assert!(checked >= 50);
}

#[test]
fn simulation_matches_stationary_prediction() {
    let mut rng = RngStream::new(33, 0).rng();
    for k in 0..20 {
        let probs =
            LinkProbs::exact(rng.random_range(0.2..0.95), rng.random_range(0.2..0.95)).unwrap();
        let q_max = rng.random_range(1..=6);
        // Slot outcomes are serially correlated through the buffer, so the
        // occupancy error bar comes from independent replications.
        let reps = 40;
        let runs: Vec<_> = (0..reps)
            .map(|r| {
                let stream = RngStream::new(33, 100 * k + r + 1);
                simulate_queue(&probs, q_max, 50_000, &stream).unwrap()
            })
            .collect();
        let slots = 2_000_000.0;
        let delivered = runs.iter().map(|r| r.delivered_rate).sum::<f64>() / reps as f64;
        let mu = buffered_throughput(&probs, q_max).unwrap().mu_d;
        let sigma = (mu * (1.0 - mu) / slots).sqrt();
        assert!(
            (delivered - mu).abs() < 3.0 * sigma,
            "{probs:?} Q={q_max}: simulated {delivered} vs {mu}"
        );
        // about 90 occupancy comparisons in all: a Bonferroni bound keeps the
        // family-wise false-alarm rate at the single-comparison 3 sigma level
        let beta = stationary(&build_chain(&probs, q_max).unwrap()).beta;
        for (nu, b) in beta.iter().enumerate() {
            let xs: Vec<f64> = runs.iter().map(|r| r.occupancy[nu]).collect();
            let mean = xs.iter().sum::<f64>() / reps as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
            let se = (var / reps as f64).sqrt().max(1e-6);
            assert!(
                (mean - b).abs() < 4.0 * se,
                "{probs:?} Q={q_max} state {nu}: occupancy {mean} vs {b} ± {se}"
            );
        }
    }
}

#[test]
fn simulated_histogram_at_default_parameters() {
    let params = SystemParams::default();
    let probs = estimate_link_probs(&params, 1.0, 20_000, &RngStream::new(34, 0)).unwrap();
    let sim = simulate_queue(&probs, 3, 1_000_000, &RngStream::new(34, 1)).unwrap();
    let dist = stationary(&build_chain(&probs, 3).unwrap());
    assert!(dist.total_variation(&sim.occupancy) < 0.01);
}

#[test]
fn single_antenna_outage_is_exponential() {
    let params = SystemParams::default().with_m(1);
    let probs = estimate_link_probs(&params, 1.0, 100_000, &RngStream::new(35, 0)).unwrap();
    let expected = (-0.1f64).exp();
    let sigma = (expected * (1.0 - expected) / 1e5).sqrt();
    assert!(
        (probs.p_rd - expected).abs() < 3.0 * sigma,
        "{}",
        probs.p_rd
    );
    // source power is split the same way at M = 1
    assert!(
        (probs.p_sr_fd - expected).abs() < 3.0 * sigma,
        "{}",
        probs.p_sr_fd
    );
}

#[test]
fn scheme_ordering_at_default_parameters() {
    let samples =
        sample_link_rates(&SystemParams::default(), 20_000, &RngStream::new(36, 0)).unwrap();
    for rate in [0.5, 1.0, 2.0, 4.0] {
        let probs = samples.probs(rate);
        let conventional = samples.conventional_success(rate).mu_d;
        let upper = upper_bound_throughput(&probs).mu_d;
        for q_max in 1..=10 {
            let buffered = buffered_throughput(&probs, q_max).unwrap().mu_d;
            assert!(buffered <= upper + 1e-12);
            if q_max >= 2 {
                assert!(conventional <= buffered, "R={rate} Q={q_max}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn stationary_is_a_distribution(
        a0 in 0.0f64..=1.0,
        a in 0.0f64..=1.0,
        b_frac in 0.0f64..=1.0,
        b_q in 0.0f64..=1.0,
        q_max in 1usize..40,
    ) {
        let chain = QueueChain::new(a0, a, b_frac * (1.0 - a), b_q, q_max).unwrap();
        let dist = stationary(&chain);
        prop_assert_eq!(dist.beta.len(), q_max + 1);
        prop_assert!(dist.beta.iter().all(|&p| (0.0..=1.0).contains(&p)));
        prop_assert!((dist.beta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(dist.balance_residual(&chain) < 1e-12);
    }

    #[test]
    fn throughput_grows_with_buffer(
        p_sr in 0.0f64..=1.0,
        p_rd in 0.0f64..=1.0,
    ) {
        let probs = LinkProbs::exact(p_sr, p_rd).unwrap();
        let mut last = 0.0;
        for q_max in 1..=12 {
            let mu = buffered_throughput(&probs, q_max).unwrap().mu_d;
            prop_assert!((0.0..=1.0).contains(&mu));
            prop_assert!(mu >= last - 1e-12, "Q={} {} < {}", q_max, mu, last);
            prop_assert!(mu <= p_rd + 1e-12);
            last = mu;
        }
    }
}
