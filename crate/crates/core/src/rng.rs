//! Seeded random streams and Monte Carlo bookkeeping.
//!
//! Every stochastic routine draws from ChaCha8 streams derived from one
//! 64-bit seed. Work is cut into fixed-size chunks and chunk `i` always
//! reads stream `i`, so results do not depend on how many threads rayon
//! happens to use.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Paths simulated per independent stream.
pub const CHUNK_SIZE: u64 = 1024;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Independent stream `index` derived from `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed for the `index`-th independent sub-experiment of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, index).next_u64()
}

/// Runs `n_trials` Bernoulli trials in parallel and returns the number of successes.
pub fn count_successes<F>(n_trials: u64, seed: u64, trial: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let n_chunks = n_trials.div_ceil(CHUNK_SIZE);
    (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream(seed, chunk);
            let start = chunk * CHUNK_SIZE;
            let end = (start + CHUNK_SIZE).min(n_trials);
            (start..end).filter(|_| trial(&mut rng)).count() as u64
        })
        .sum()
}

/// Monte Carlo estimate of a probability with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitEstimate {
    pub point_estimate: f64,
    pub n_paths: u64,
    pub successes: u64,
    /// Half-width of the 95% Wilson interval.
    pub half_width: f64,
    pub lower: f64,
    pub upper: f64,
    pub seed: u64,
}

impl HitEstimate {
    pub fn from_counts(successes: u64, n_paths: u64, seed: u64) -> Self {
        assert!(n_paths > 0, "n_paths must be positive");
        let n = n_paths as f64;
        let p = successes as f64 / n;
        let z2 = Z_95 * Z_95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half_width = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        HitEstimate {
            point_estimate: p,
            n_paths,
            successes,
            half_width,
            lower: (center - half_width).max(0.0),
            upper: (center + half_width).min(1.0),
            seed,
        }
    }

    /// An event that happens with certainty (or never) without sampling.
    pub fn certain(value: bool, n_paths: u64, seed: u64) -> Self {
        let p = if value { 1.0 } else { 0.0 };
        HitEstimate {
            point_estimate: p,
            n_paths,
            successes: if value { n_paths } else { 0 },
            half_width: 0.0,
            lower: p,
            upper: p,
            seed,
        }
    }

    /// Whether `exact` lies within `k` half-widths of the point estimate.
    pub fn agrees_with(&self, exact: f64, k: f64) -> bool {
        (self.point_estimate - exact).abs() <= k * self.half_width + 1e-15
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn result_is_independent_of_thread_count() {
        let trial = |rng: &mut ChaCha8Rng| rng.random::<f64>() < 0.3;
        let a = count_successes(10_000, 11, trial);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| count_successes(10_000, 11, trial));
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let mut a = stream(5, 0);
        let mut b = stream(5, 1);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        let e = HitEstimate::from_counts(30, 100, 0);
        assert!(e.lower < 0.3 && 0.3 < e.upper);
        assert!((e.half_width - 0.0883).abs() < 1e-3);
        let zero = HitEstimate::from_counts(0, 100, 0);
        assert_eq!(zero.point_estimate, 0.0);
        assert!(zero.half_width > 0.0);
    }
}
