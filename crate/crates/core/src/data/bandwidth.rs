use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{domain, Result};
use crate::rng::rng_from_seed;

pub const DEFAULT_NEIGHBOUR: usize = 50;
pub const DEFAULT_PROBE_SIZE: usize = 2000;

/// Settings for [`bandwidth_heuristic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandwidthConfig {
    /// Which nearest neighbour to measure (1 = closest other point).
    pub k: usize,
    /// Number of rows the neighbour search runs on; `min(N, probe_size)`.
    pub probe_size: usize,
    /// Seed for drawing the probe when `probe_size < N`.
    pub seed: u64,
}

impl Default for BandwidthConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_NEIGHBOUR,
            probe_size: DEFAULT_PROBE_SIZE,
            seed: 0,
        }
    }
}

/// Mean Euclidean distance from each probe point to its `k`-th nearest
/// other point in the probe.
///
/// When `probe_size >= N` the probe is every row in order; otherwise it is
/// a seeded uniform sample without replacement. Duplicate rows count as
/// neighbours at distance zero.
pub fn bandwidth_heuristic(ds: &Dataset, cfg: &BandwidthConfig) -> Result<f64> {
    let n = ds.n_rows();
    let k = cfg.k;
    if k == 0 {
        return domain("neighbour rank k must be at least 1");
    }
    if n <= k {
        return domain(format!("{n} rows are too few for the {k}-th nearest neighbour"));
    }
    let probe: Vec<usize> = if cfg.probe_size >= n {
        (0..n).collect()
    } else {
        if cfg.probe_size <= k {
            return domain(format!("probe of {} rows is too small for k = {k}", cfg.probe_size));
        }
        let mut rows = index::sample(&mut rng_from_seed(cfg.seed), n, cfg.probe_size).into_vec();
        rows.sort_unstable();
        rows
    };

    let x = ds.x();
    let kth: Vec<f64> = probe
        .par_iter()
        .map(|&i| {
            let xi = x.row(i);
            let mut dists: Vec<f64> = probe
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| {
                    xi.iter()
                        .zip(x.row(j).iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();
            let (_, kth, _) = dists.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect();

    let sigma = kth.iter().sum::<f64>() / kth.len() as f64;
    if sigma <= 0.0 {
        return domain("all neighbour distances are zero (duplicate points)");
    }
    Ok(sigma)
}
