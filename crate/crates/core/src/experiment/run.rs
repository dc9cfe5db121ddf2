use std::time::Instant;

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DataSource, ExperimentConfig, Method};
use crate::data::{
    bandwidth_heuristic, load_dataset, split, standardize, subsample, BandwidthConfig, Dataset, LoadOptions, SplitSpec,
};
use crate::error::{Error, Result};
use crate::features::{sample_features, FeatureSpec, RandomFeature};
use crate::rng::{derive_seed, Stream};
use crate::selection::{eerf_select, rks_select, score_responses, ScoreTable};
use crate::theory::synthetic_regression;
use crate::training::{evaluate, fit_model, predict, tune_regularization};

/// Outcome of one `(method, M, seed)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub method: Method,
    pub m: usize,
    pub seed: u64,
    pub m0: usize,
    pub n0: usize,
    pub sigma: Option<f64>,
    pub lambda_reg: Option<f64>,
    pub error_pct: Option<f64>,
    /// Empty on success.
    pub failure: String,
    pub preprocess_s: f64,
    pub train_s: f64,
    pub test_s: f64,
}

impl CellResult {
    pub fn ok(&self) -> bool {
        self.error_pct.is_some()
    }
}

/// Mean and standard error (sample sd / √n) over the successful seeds of one
/// `(method, M)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub m: usize,
    pub n_seeds: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub mean_preprocess_s: f64,
    pub mean_train_s: f64,
    pub mean_test_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rows: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.ok()).count()
    }

    /// One row per `(method, M)` in first-appearance order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(Method, usize)> = Vec::new();
        for r in &self.rows {
            if !keys.contains(&(r.method, r.m)) {
                keys.push((r.method, r.m));
            }
        }
        keys.into_iter()
            .filter_map(|(method, m)| {
                let cells: Vec<&CellResult> = self.rows.iter().filter(|r| r.method == method && r.m == m && r.ok()).collect();
                if cells.is_empty() {
                    return None;
                }
                let n = cells.len() as f64;
                let errs: Vec<f64> = cells.iter().filter_map(|c| c.error_pct).collect();
                let mean = errs.iter().sum::<f64>() / n;
                let std_error = if cells.len() > 1 {
                    (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
                } else {
                    f64::NAN
                };
                let avg = |f: fn(&CellResult) -> f64| cells.iter().map(|c| f(c)).sum::<f64>() / n;
                Some(SummaryRow {
                    method,
                    m,
                    n_seeds: cells.len(),
                    mean_error: mean,
                    std_error,
                    mean_preprocess_s: avg(|c| c.preprocess_s),
                    mean_train_s: avg(|c| c.train_s),
                    mean_test_s: avg(|c| c.test_s),
                })
            })
            .collect()
    }

    pub fn mean_error(&self, method: Method, m: usize) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.method == method && s.m == m)
            .map(|s| s.mean_error)
    }
}

/// Standardized train/test data for one seed.
#[derive(Debug, Clone)]
pub struct PreparedSeed {
    pub seed: u64,
    pub train: Dataset,
    pub test: Dataset,
    pub sigma: Option<f64>,
}

/// Loads (or generates) and splits the rows for `seed`, standardizes on
/// train, and computes the bandwidth heuristic when the config asks for it.
pub fn prepare_seed(cfg: &ExperimentConfig, seed: u64) -> Result<PreparedSeed> {
    let (raw_train, raw_test) = match &cfg.data {
        DataSource::File {
            path,
            test_path,
            format,
            task,
            n_features,
        } => {
            let opts = LoadOptions {
                n_features: *n_features,
            };
            let first = load_dataset(path, *format, *task, &opts)?;
            match test_path {
                Some(tp) => {
                    let opts = LoadOptions {
                        n_features: Some(n_features.unwrap_or(first.n_cols())),
                    };
                    let test = load_dataset(tp, *format, *task, &opts)?;
                    if test.n_cols() != first.n_cols() {
                        return Err(Error::DimensionMismatch {
                            expected: first.n_cols(),
                            found: test.n_cols(),
                        });
                    }
                    (first, test)
                }
                None => split(
                    &first,
                    &SplitSpec::Random {
                        test_fraction: cfg.test_fraction,
                        seed: derive_seed(cfg.master_seed, seed, 0, Stream::Split),
                    },
                )?,
            }
        }
        DataSource::Synthetic {
            spectrum,
            input,
            n_train,
            n_test,
            noise_sd,
        } => {
            let all = synthetic_regression(
                spectrum,
                input,
                n_train + n_test,
                *noise_sd,
                derive_seed(cfg.master_seed, seed, 0, Stream::Synthetic),
            )?;
            let train_idx: Vec<usize> = (0..*n_train).collect();
            let test_idx: Vec<usize> = (*n_train..n_train + n_test).collect();
            split(
                &all,
                &SplitSpec::Explicit {
                    train: train_idx,
                    test: test_idx,
                },
            )?
        }
    };
    let (train, params) = standardize(&raw_train)?;
    let test = params.apply(&raw_test)?;
    let sigma = if cfg.features.needs_heuristic() {
        Some(bandwidth_heuristic(
            &train,
            &BandwidthConfig {
                k: cfg.heuristic.k,
                probe_size: cfg.heuristic.probe_size,
                seed: derive_seed(cfg.master_seed, seed, 0, Stream::Probe),
            },
        )?)
    } else {
        None
    };
    Ok(PreparedSeed {
        seed,
        train,
        test,
        sigma,
    })
}

/// Candidate pool and scores for one `(seed, M)`; shared by both methods so
/// that RKS sees the same draws EERF selects from.
pub fn score_candidates(
    cfg: &ExperimentConfig,
    prep: &PreparedSeed,
    spec: &FeatureSpec,
    m: usize,
) -> Result<(Vec<RandomFeature>, ScoreTable)> {
    let m0 = cfg.m0.resolve(m);
    let pool = sample_features(spec, m0, derive_seed(cfg.master_seed, prep.seed, m as u64, Stream::Features))?;
    let n0 = cfg.n0.resolve(prep.train.n_rows());
    let rows = subsample(
        &prep.train,
        n0,
        derive_seed(cfg.master_seed, prep.seed, m as u64, Stream::Subsample),
    )?;
    let y = centered(rows.y(), cfg.center_scores);
    let table = score_responses(&pool, rows.x().view(), y.view())?;
    Ok((pool, table))
}

fn centered(y: &Array1<f64>, center: bool) -> Array1<f64> {
    if center {
        let mean = y.mean().unwrap_or(0.0);
        y.mapv(|v| v - mean)
    } else {
        y.clone()
    }
}

fn validation_split(cfg: &ExperimentConfig, prep: &PreparedSeed, m: usize) -> Result<(Dataset, Dataset)> {
    split(
        &prep.train,
        &SplitSpec::Random {
            test_fraction: cfg.validation_fraction,
            seed: derive_seed(cfg.master_seed, prep.seed, m as u64, Stream::Validation),
        },
    )
}

fn run_cell(cfg: &ExperimentConfig, prep: &PreparedSeed, method: Method, m: usize) -> CellResult {
    let mut cell = CellResult {
        method,
        m,
        seed: prep.seed,
        m0: cfg.m0.resolve(m),
        n0: match method {
            Method::Eerf => cfg.n0.resolve(prep.train.n_rows()),
            Method::Rks => 0,
        },
        sigma: prep.sigma,
        lambda_reg: None,
        error_pct: None,
        failure: String::new(),
        preprocess_s: 0.0,
        train_s: 0.0,
        test_s: 0.0,
    };
    if let Err(e) = run_cell_inner(cfg, prep, method, m, &mut cell) {
        log::warn!("cell {} M={} seed={} failed: {e}", method.as_str(), m, prep.seed);
        cell.failure = e.to_string();
        cell.error_pct = None;
    }
    cell
}

fn run_cell_inner(cfg: &ExperimentConfig, prep: &PreparedSeed, method: Method, m: usize, cell: &mut CellResult) -> Result<()> {
    let spec = cfg.features.resolve(prep.train.n_cols(), prep.sigma)?;
    let tcfg = cfg.train_config();

    let t0 = Instant::now();
    let mut selected = match method {
        Method::Eerf => {
            let (_, table) = score_candidates(cfg, prep, &spec, m)?;
            eerf_select(&table, m)?
        }
        Method::Rks => {
            let pool = sample_features(
                &spec,
                cell.m0,
                derive_seed(cfg.master_seed, prep.seed, m as u64, Stream::Features),
            )?;
            rks_select(&pool, m)?
        }
    };
    // Sampling order keeps the fit independent of how the selection ranked.
    selected.sort_by_key(|f| f.source_index);
    cell.preprocess_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let (fit_rows, val_rows) = validation_split(cfg, prep, m)?;
    let (lambda, _) = tune_regularization(&fit_rows, &val_rows, &tcfg, &selected)?;
    let model = fit_model(&prep.train, &selected, lambda, &tcfg)?;
    cell.train_s = t1.elapsed().as_secs_f64();
    cell.lambda_reg = Some(lambda);

    let t2 = Instant::now();
    let pred = predict(&model, prep.test.x())?;
    cell.error_pct = Some(evaluate(pred.view(), prep.test.y().view(), prep.test.task())?);
    cell.test_s = t2.elapsed().as_secs_f64();
    Ok(())
}

/// Runs every `(method, M, seed)` cell. Stages that fail abort only their
/// cell, which is kept in the result with an empty error and a message.
/// The returned rows are ordered by seed, then M, then method as configured.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let prep = match prepare_seed(cfg, seed) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("seed {seed}: data preparation failed: {e}");
                for &m in &cfg.m_values {
                    for &method in &cfg.methods {
                        rows.push(CellResult {
                            method,
                            m,
                            seed,
                            m0: cfg.m0.resolve(m),
                            n0: 0,
                            sigma: None,
                            lambda_reg: None,
                            error_pct: None,
                            failure: e.to_string(),
                            preprocess_s: 0.0,
                            train_s: 0.0,
                            test_s: 0.0,
                        });
                    }
                }
                continue;
            }
        };
        log::info!(
            "seed {seed}: {} train / {} test rows, sigma = {:?}",
            prep.train.n_rows(),
            prep.test.n_rows(),
            prep.sigma
        );
        let cells: Vec<(usize, Method)> = cfg
            .m_values
            .iter()
            .flat_map(|&m| cfg.methods.iter().map(move |&method| (m, method)))
            .collect();
        let done: Vec<CellResult> = cells
            .par_iter()
            .map(|&(m, method)| run_cell(cfg, &prep, method, m))
            .collect();
        rows.extend(done);
    }
    Ok(ExperimentResult { rows })
}
