//! Block statistics for walker averages.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::C64;

/// Number of contiguous walker blocks used for standard errors.
pub const DEFAULT_BLOCKS: usize = 100;

/// Bootstrap resamples drawn for each standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Contiguous block boundaries over `n` items.
pub fn block_ranges(n: usize, blocks: usize) -> Vec<std::ops::Range<usize>> {
    let blocks = blocks.clamp(1, n.max(1));
    (0..blocks)
        .map(|b| (b * n / blocks)..((b + 1) * n / blocks))
        .collect()
}

/// Per-block complex sums with their item counts.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSums {
    pub sums: Vec<C64>,
    pub counts: Vec<usize>,
}

impl BlockSums {
    pub fn total(&self) -> C64 {
        self.sums.iter().sum()
    }

    pub fn count(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn mean(&self) -> C64 {
        self.total() / self.count() as f64
    }
}

/// Standard deviation over bootstrap resamples of blocks of the statistic
/// `f(indices)`.
pub fn bootstrap_sd(
    blocks: usize,
    resamples: usize,
    rng: &mut ChaCha8Rng,
    mut f: impl FnMut(&[usize]) -> f64,
) -> f64 {
    if blocks < 2 || resamples < 2 {
        return 0.0;
    }
    let mut idx = vec![0usize; blocks];
    let values: Vec<f64> = (0..resamples)
        .map(|_| {
            idx.iter_mut().for_each(|i| *i = rng.random_range(0..blocks));
            f(&idx)
        })
        .collect();
    let mean = values.iter().sum::<f64>() / resamples as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (resamples as f64 - 1.0)).sqrt()
}
