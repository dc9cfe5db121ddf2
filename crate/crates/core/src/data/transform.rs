use ndarray::Axis;
use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::{Dataset, Task};
use crate::error::{domain, Result};
use crate::rng::rng_from_seed;

/// Affine response map onto `[-1, 1]` fitted on training responses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseScaling {
    pub y_min: f64,
    pub y_max: f64,
}

impl ResponseScaling {
    fn forward(&self, y: f64) -> f64 {
        let span = self.y_max - self.y_min;
        if span > 0.0 {
            2.0 * (y - self.y_min) / span - 1.0
        } else {
            0.0
        }
    }

    fn inverse(&self, y: f64) -> f64 {
        let span = self.y_max - self.y_min;
        if span > 0.0 {
            (y + 1.0) * 0.5 * span + self.y_min
        } else {
            self.y_min
        }
    }
}

/// Column means and population standard deviations.
///
/// Columns with zero variance are mapped to all zeros and flagged in
/// `zero_variance`; inverting them restores the column mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub stdevs: Vec<f64>,
    pub zero_variance: Vec<bool>,
    /// `Some` for regression datasets only.
    pub response: Option<ResponseScaling>,
}

impl StandardizationParams {
    /// Applies the fitted transform to another dataset (e.g. a test split).
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        self.check_width(ds)?;
        let mut x = ds.x().clone();
        for (j, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.means[j], self.stdevs[j]);
            if self.zero_variance[j] {
                col.fill(0.0);
            } else {
                col.mapv_inplace(|v| (v - m) / s);
            }
        }
        let y = match self.response {
            Some(r) => ds.y().mapv(|v| r.forward(v)),
            None => ds.y().clone(),
        };
        Dataset::new(x, y, ds.task())
    }

    pub fn invert(&self, ds: &Dataset) -> Result<Dataset> {
        self.check_width(ds)?;
        let mut x = ds.x().clone();
        for (j, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.means[j], self.stdevs[j]);
            if self.zero_variance[j] {
                col.fill(m);
            } else {
                col.mapv_inplace(|v| v * s + m);
            }
        }
        let y = match self.response {
            Some(r) => ds.y().mapv(|v| r.inverse(v)),
            None => ds.y().clone(),
        };
        Dataset::new(x, y, ds.task())
    }

    fn check_width(&self, ds: &Dataset) -> Result<()> {
        if ds.n_cols() != self.means.len() {
            return Err(crate::Error::DimensionMismatch {
                expected: self.means.len(),
                found: ds.n_cols(),
            });
        }
        Ok(())
    }
}

/// Zero-mean, unit-variance columns (population convention, divide by `N`);
/// regression responses mapped affinely onto `[-1, 1]`.
pub fn standardize(ds: &Dataset) -> Result<(Dataset, StandardizationParams)> {
    let n = ds.n_rows();
    if n < 2 {
        return domain(format!("standardization needs at least 2 rows, got {n}"));
    }
    let nf = n as f64;
    let mut means = Vec::with_capacity(ds.n_cols());
    let mut stdevs = Vec::with_capacity(ds.n_cols());
    let mut zero_variance = Vec::with_capacity(ds.n_cols());
    for col in ds.x().axis_iter(Axis(1)) {
        let mean = col.sum() / nf;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        let sd = var.sqrt();
        // Variance from rounding noise on a constant column is not signal.
        let degenerate = sd <= 1e-12 * mean.abs().max(1.0);
        means.push(mean);
        stdevs.push(if degenerate { 0.0 } else { sd });
        zero_variance.push(degenerate);
    }
    let response = match ds.task() {
        Task::Regression => {
            let y = ds.y();
            let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
            let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Some(ResponseScaling { y_min, y_max })
        }
        Task::Classification => None,
    };
    let params = StandardizationParams {
        means,
        stdevs,
        zero_variance,
        response,
    };
    let out = params.apply(ds)?;
    Ok((out, params))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SplitSpec {
    /// Preset row indices, passed through unchanged.
    Explicit { train: Vec<usize>, test: Vec<usize> },
    /// Seeded shuffle; `round(test_fraction · N)` rows go to the test side.
    Random { test_fraction: f64, seed: u64 },
}

impl SplitSpec {
    /// Disjoint `(train, test)` index lists covering `0..n`.
    pub fn indices(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        match self {
            SplitSpec::Explicit { train, test } => {
                if train.is_empty() || test.is_empty() {
                    return domain("explicit split needs non-empty train and test index lists");
                }
                let mut seen = vec![false; n];
                for &i in train.iter().chain(test) {
                    if i >= n {
                        return domain(format!("split index {i} out of range for {n} rows"));
                    }
                    if seen[i] {
                        return domain(format!("split index {i} appears twice"));
                    }
                    seen[i] = true;
                }
                Ok((train.clone(), test.clone()))
            }
            SplitSpec::Random { test_fraction, seed } => {
                let f = *test_fraction;
                if !(f > 0.0 && f < 1.0) {
                    return domain(format!("test fraction must lie in (0, 1), got {f}"));
                }
                let n_test = (f * n as f64).round() as usize;
                if n_test == 0 || n_test >= n {
                    return domain(format!("test fraction {f} on {n} rows leaves an empty side"));
                }
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng_from_seed(*seed));
                let mut test = order[..n_test].to_vec();
                let mut train = order[n_test..].to_vec();
                test.sort_unstable();
                train.sort_unstable();
                Ok((train, test))
            }
        }
    }
}

pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = spec.indices(ds.n_rows())?;
    Ok((ds.select_rows(&train)?, ds.select_rows(&test)?))
}

/// Uniform sample of `n0` rows without replacement, returned in ascending
/// row order.
pub fn subsample(ds: &Dataset, n0: usize, seed: u64) -> Result<Dataset> {
    let n = ds.n_rows();
    if n0 == 0 || n0 > n {
        return domain(format!("subsample size {n0} outside 1..={n}"));
    }
    if n0 == n {
        return Ok(ds.clone());
    }
    let mut rows = index::sample(&mut rng_from_seed(seed), n, n0).into_vec();
    rows.sort_unstable();
    ds.select_rows(&rows)
}
