//! Seeded inputs for the benchmarks.

use boa_core::{pool, BoaVector, FrameAttributeMatrix, PoolingMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn frames(rng: &mut impl Rng, count: usize, dim: usize) -> FrameAttributeMatrix {
    let mut m = FrameAttributeMatrix::new(dim).unwrap();
    let mut row = vec![0.0; dim];
    for _ in 0..count {
        row.iter_mut().for_each(|v| *v = rng.random());
        m.push(&row).unwrap();
    }
    m
}

/// `size` max-pooled vectors with ids `v00000`, `v00001`, ...
pub fn database(rng: &mut impl Rng, size: usize, dim: usize) -> Vec<(String, BoaVector)> {
    (0..size)
        .map(|i| (format!("v{i:05}"), pool(&frames(rng, 8, dim), PoolingMode::Max).unwrap()))
        .collect()
}

/// Relevance flags for a ranking of `len` items with `positives` hits.
pub fn ranking(rng: &mut impl Rng, len: usize, positives: usize) -> Vec<bool> {
    let mut flags = vec![false; len];
    for i in rand::seq::index::sample(rng, len, positives) {
        flags[i] = true;
    }
    flags
}
