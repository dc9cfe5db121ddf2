//! Empirical scores and feature selection.
//!
//! The score of a feature is the sample correlation between the responses
//! and the feature, `Ŝ(ω) = (1/N) Σ yⁿ φ(xⁿ, ω)`. [`eerf_select`] keeps the
//! `M` candidates with the largest `|Ŝ|`; [`rks_select`] keeps the first `M`
//! draws and ignores the data.

use std::collections::HashSet;
use std::path::Path;

use ndarray::{ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{domain, Error, Result};
use crate::features::RandomFeature;
use crate::RECORD_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredFeature {
    pub feature: RandomFeature,
    pub score: f64,
}

/// Scores for every candidate, in sampling order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub entries: Vec<ScoredFeature>,
    /// Number of training rows the scores average over.
    pub n_used: usize,
}

#[derive(Serialize, Deserialize)]
struct ScoreRecord {
    version: u32,
    #[serde(flatten)]
    table: ScoreTable,
}

impl ScoreTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let rec = ScoreRecord {
            version: RECORD_VERSION,
            table: self.clone(),
        };
        std::fs::write(path, serde_json::to_vec_pretty(&rec)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let rec: ScoreRecord = serde_json::from_slice(&std::fs::read(path)?)?;
        if rec.version != RECORD_VERSION {
            return domain(format!("unsupported score record version {}", rec.version));
        }
        Ok(rec.table)
    }
}

/// Mean with Neumaier compensation.
pub(crate) fn compensated_mean<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut n = 0usize;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
        n += 1;
    }
    (sum + comp) / n as f64
}

/// `Ŝ(ω) = (1/N) Σ yⁿ φ(xⁿ, ω)` for each feature on the dataset's own
/// responses.
pub fn empirical_score(features: &[RandomFeature], ds: &Dataset) -> Result<ScoreTable> {
    score_responses(features, ds.x().view(), ds.y().view())
}

/// Scores against arbitrary responses `y` (one per row of `x`).
///
/// Each feature's mean is a sequential reduction over rows; features are
/// scored in parallel, so the result does not depend on the thread count.
pub fn score_responses(features: &[RandomFeature], x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<ScoreTable> {
    if features.is_empty() {
        return domain("no features to score");
    }
    if x.nrows() == 0 {
        return domain("no rows to score against");
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: y.len(),
        });
    }
    let mut seen = HashSet::with_capacity(features.len());
    for f in features {
        if !seen.insert(f.source_index) {
            return domain(format!("duplicate source index {}", f.source_index));
        }
        f.try_evaluate(x.row(0))?;
    }
    let entries = features
        .par_iter()
        .map(|f| {
            let score = compensated_mean(x.rows().into_iter().zip(y.iter()).map(|(row, &yn)| yn * f.evaluate(row)));
            ScoredFeature {
                feature: f.clone(),
                score,
            }
        })
        .collect();
    Ok(ScoreTable {
        entries,
        n_used: x.nrows(),
    })
}

/// Positions of the `m` largest `|score|` entries, descending, ties broken
/// by the smaller source index.
fn top_positions(table: &ScoreTable, m: usize) -> Result<Vec<usize>> {
    if m == 0 || m > table.len() {
        return domain(format!("selection size {m} outside 1..={}", table.len()));
    }
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (&table.entries[a], &table.entries[b]);
        eb.score
            .abs()
            .total_cmp(&ea.score.abs())
            .then(ea.feature.source_index.cmp(&eb.feature.source_index))
    });
    order.truncate(m);
    Ok(order)
}

/// The `m` candidates with the largest `|Ŝ|`, ordered by descending `|Ŝ|`.
pub fn eerf_select(table: &ScoreTable, m: usize) -> Result<Vec<RandomFeature>> {
    Ok(top_positions(table, m)?
        .into_iter()
        .map(|i| table.entries[i].feature.clone())
        .collect())
}

/// The first `m` features in sampling order.
pub fn rks_select(features: &[RandomFeature], m: usize) -> Result<Vec<RandomFeature>> {
    if m == 0 || m > features.len() {
        return domain(format!("selection size {m} outside 1..={}", features.len()));
    }
    Ok(features[..m].to_vec())
}

/// `(1/|subset|) Σ Ŝ²` over the entries whose source indices are listed.
pub fn polarization(table: &ScoreTable, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return domain("polarization needs a non-empty subset");
    }
    let mut total = 0.0;
    for &src in subset {
        let entry = table
            .entries
            .iter()
            .find(|e| e.feature.source_index == src)
            .ok_or_else(|| Error::Domain(format!("source index {src} not in score table")))?;
        total += entry.score * entry.score;
    }
    Ok(total / subset.len() as f64)
}
