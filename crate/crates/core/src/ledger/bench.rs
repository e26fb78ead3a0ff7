use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::rngs::ChaCha20Rng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::Serialize;

use super::policy::{EndorsementPolicy, EndorserLatency};

pub const BENCH_CSV_HEADER: &str = "policy,k,send_rate,throughput_tps,lat_min_ms,lat_avg_ms,lat_max_ms";

/// Service-time model of the simulated network.
///
/// Each transaction is sent to `k` randomly chosen endorsers (FIFO servers),
/// then to a single FIFO ordering service whose per-transaction cost grows
/// with the number of endorsements it validates, then committed after a
/// fixed delay. The client keeps at most `window` transactions in flight and
/// drops submissions beyond that.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchConfig {
    pub seed: u64,
    pub endorser_service_ms: f64,
    pub orderer_base_ms: f64,
    pub orderer_per_endorsement_ms: f64,
    pub commit_delay_ms: f64,
    pub window: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            seed: 0,
            endorser_service_ms: 10.0,
            orderer_base_ms: 25.0,
            orderer_per_endorsement_ms: 12.0,
            commit_delay_ms: 250.0,
            window: 23,
        }
    }
}

/// Network latency between client and endorser used by the default bench.
pub const BENCH_ENDORSER_LATENCY: EndorserLatency = EndorserLatency::Uniform {
    min_ms: 150.0,
    max_ms: 250.0,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub policy: String,
    pub k: usize,
    pub send_rate: f64,
    pub submitted: usize,
    pub committed: usize,
    pub rejected: usize,
    pub throughput_tps: f64,
    pub lat_min_ms: f64,
    pub lat_avg_ms: f64,
    pub lat_max_ms: f64,
}

impl BenchReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.3},{:.3},{:.3},{:.3}",
            self.policy, self.k, self.send_rate, self.throughput_tps, self.lat_min_ms, self.lat_avg_ms, self.lat_max_ms
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    // Variant order breaks ties at equal times: commits free the window first.
    Commit(usize),
    Endorsed(usize),
}

fn us(ms: f64) -> u64 {
    (ms * 1000.0).round() as u64
}

pub fn run_bench(policy: &EndorsementPolicy, send_rate: f64, duration_s: f64) -> BenchReport {
    run_bench_with(policy, send_rate, duration_s, &BenchConfig::default())
}

pub fn run_bench_with(
    policy: &EndorsementPolicy,
    send_rate: f64,
    duration_s: f64,
    config: &BenchConfig,
) -> BenchReport {
    let k = policy.k();
    let peers = policy.endorsers().len();
    let total = (send_rate * duration_s).floor().max(0.0) as usize;
    let interval = 1e6 / send_rate;
    let arrival = |i: usize| (i as f64 * interval).round() as u64;

    let s_endorse = us(config.endorser_service_ms);
    let s_order = us(config.orderer_base_ms + config.orderer_per_endorsement_ms * k as f64);
    let commit_delay = us(config.commit_delay_ms);

    let mut endorser_free = vec![0u64; peers];
    let mut orderer_free = 0u64;
    let mut events: BinaryHeap<Reverse<(u64, Event)>> = BinaryHeap::new();
    let mut in_flight = 0usize;
    let mut rejected = 0usize;
    let mut latencies: Vec<u64> = Vec::with_capacity(total);
    let mut last_commit = 0u64;

    let mut step = |events: &mut BinaryHeap<Reverse<(u64, Event)>>,
                    in_flight: &mut usize,
                    orderer_free: &mut u64,
                    latencies: &mut Vec<u64>,
                    until: Option<u64>| {
        while let Some(&Reverse((t, ev))) = events.peek() {
            if until.is_some_and(|limit| t > limit) {
                break;
            }
            events.pop();
            match ev {
                Event::Endorsed(i) => {
                    let done = t.max(*orderer_free) + s_order;
                    *orderer_free = done;
                    events.push(Reverse((done + commit_delay, Event::Commit(i))));
                }
                Event::Commit(i) => {
                    *in_flight -= 1;
                    latencies.push(t - arrival(i));
                    last_commit = last_commit.max(t);
                }
            }
        }
    };

    for i in 0..total {
        let t = arrival(i);
        step(&mut events, &mut in_flight, &mut orderer_free, &mut latencies, Some(t));
        // Every transaction draws the same samples whatever k is, so runs
        // that differ only in k see identical randomness.
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut order: Vec<usize> = (0..peers).collect();
        order.shuffle(&mut rng);
        let network: Vec<u64> = (0..peers).map(|_| us(policy.latency().sample(&mut rng))).collect();
        if in_flight >= config.window {
            rejected += 1;
            continue;
        }
        in_flight += 1;
        let mut endorsed = 0u64;
        for &e in order.iter().take(k) {
            let done = t.max(endorser_free[e]) + s_endorse;
            endorser_free[e] = done;
            endorsed = endorsed.max(done + network[e]);
        }
        events.push(Reverse((endorsed, Event::Endorsed(i))));
    }
    step(&mut events, &mut in_flight, &mut orderer_free, &mut latencies, None);

    let committed = latencies.len();
    let ms = |v: u64| v as f64 / 1000.0;
    let (min, max, avg) = if committed == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let sum: u64 = latencies.iter().sum();
        (
            ms(*latencies.iter().min().unwrap()),
            ms(*latencies.iter().max().unwrap()),
            sum as f64 / committed as f64 / 1000.0,
        )
    };
    let span_s = last_commit as f64 / 1e6;
    BenchReport {
        policy: format!("{k}-of-any"),
        k,
        send_rate,
        submitted: total,
        committed,
        rejected,
        throughput_tps: if span_s > 0.0 { committed as f64 / span_s } else { 0.0 },
        lat_min_ms: min,
        lat_avg_ms: avg,
        lat_max_ms: max,
    }
}
