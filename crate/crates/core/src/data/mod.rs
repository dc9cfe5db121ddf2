//! Datasets: loading, standardization, splitting, subsampling and the
//! nearest-neighbour bandwidth rule.

mod bandwidth;
mod io;
mod transform;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub use bandwidth::{bandwidth_heuristic, BandwidthConfig, DEFAULT_NEIGHBOUR, DEFAULT_PROBE_SIZE};
pub use io::{load_dataset, parse_csv, parse_libsvm, DataFormat, LoadOptions};
pub use transform::{split, standardize, subsample, SplitSpec, StandardizationParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

/// An `N × d` input matrix with its responses.
///
/// Classification responses are always in `{-1, +1}`; inputs and responses
/// are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    task: Task,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>, task: Task) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return domain(format!("dataset must be non-empty, got {}x{}", x.nrows(), x.ncols()));
        }
        if x.nrows() != y.len() {
            return domain(format!("{} input rows but {} responses", x.nrows(), y.len()));
        }
        if let Some((idx, _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return domain(format!("non-finite input at row {}, column {}", idx.0, idx.1));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return domain(format!("non-finite response at row {i}"));
        }
        if task == Task::Classification {
            if let Some(i) = y.iter().position(|&v| v != 1.0 && v != -1.0) {
                return domain(format!("classification response {} at row {i} is not ±1", y[i]));
            }
        }
        Ok(Self { x, y, task })
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return domain("row selection is empty");
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_rows()) {
            return domain(format!("row index {bad} out of range for {} rows", self.n_rows()));
        }
        Ok(Self {
            x: self.x.select(Axis(0), indices),
            y: self.y.select(Axis(0), indices),
            task: self.task,
        })
    }

    /// Same inputs with responses replaced.
    pub fn with_responses(&self, y: Array1<f64>) -> Result<Self> {
        Self::new(self.x.clone(), y, self.task)
    }

    pub fn into_parts(self) -> (Array2<f64>, Array1<f64>, Task) {
        (self.x, self.y, self.task)
    }
}
