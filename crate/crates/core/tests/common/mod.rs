//! Test-only oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Average precision straight from its definition: for every rank `k`
/// holding a relevant item, count the relevant items among the first `k`
/// from scratch, divide by `k`, and average over all `relevant` items.
pub fn ap_oracle(flags: &[bool], relevant: usize) -> f64 {
    let mut total = 0.0;
    for k in 1..=flags.len() {
        if !flags[k - 1] {
            continue;
        }
        let hits_in_prefix = flags[..k].iter().filter(|&&f| f).count();
        total += hits_in_prefix as f64 / k as f64;
    }
    total / relevant as f64
}

/// Random ranking of at most 10 database videos with at most 4 positives,
/// all of which are ranked.
pub fn random_instance(rng: &mut impl Rng) -> (Vec<bool>, usize) {
    let n = rng.random_range(1..=10);
    let positives = rng.random_range(1..=n.min(4));
    let mut flags = vec![false; n];
    let mut placed = 0;
    while placed < positives {
        let i = rng.random_range(0..n);
        if !flags[i] {
            flags[i] = true;
            placed += 1;
        }
    }
    (flags, positives)
}

pub const EVENT_COUNT: usize = 13;

/// Per-event mAP (%) columns as published, and the published avg-mAP.
pub const PUBLISHED_MAP: [(&str, [f64; EVENT_COUNT], f64); 4] = [
    (
        "MMV",
        [23.90, 19.90, 8.70, 12.60, 23.40, 33.80, 12.40, 25.40, 53.10, 45.50, 77.30, 36.60, 60.40],
        33.40,
    ),
    (
        "CTE",
        [13.90, 16.60, 12.80, 10.80, 26.20, 41.30, 25.20, 25.70, 80.30, 40.90, 71.40, 29.70, 69.30],
        35.20,
    ),
    (
        "MMV+CTE",
        [24.60, 20.20, 11.10, 13.20, 26.00, 39.40, 21.20, 28.10, 69.40, 48.60, 77.40, 37.10, 71.90],
        37.60,
    ),
    (
        "BoA",
        [29.26, 57.68, 26.73, 69.24, 54.60, 50.40, 13.86, 67.98, 43.65, 33.87, 89.16, 92.54, 92.43],
        55.49,
    ),
];

pub fn published_column(name: &str) -> &'static [f64; EVENT_COUNT] {
    &PUBLISHED_MAP.iter().find(|(n, _, _)| *n == name).unwrap().1
}

/// Brute-force distance check: every positive strictly closer to the query
/// than every negative.
pub fn separable(query: &[f64], positives: &[Vec<f64>], negatives: &[Vec<f64>]) -> bool {
    let d = |v: &Vec<f64>| -> f64 { query.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum() };
    let worst_pos = positives.iter().map(d).fold(f64::MIN, f64::max);
    let best_neg = negatives.iter().map(d).fold(f64::MAX, f64::min);
    worst_pos < best_neg
}
