use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{DataFormat, Task, DEFAULT_NEIGHBOUR, DEFAULT_PROBE_SIZE};
use crate::error::{Error, Result};
use crate::features::{CosineSampler, FeatureFamily, FeatureSpec};
use crate::theory::{AtomicSpectrum, InputDist};
use crate::training::{default_reg_grid, Loss, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Eerf,
    Rks,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Eerf => "eerf",
            Method::Rks => "rks",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eerf" => Ok(Method::Eerf),
            "rks" => Ok(Method::Rks),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// Where the rows come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSource {
    /// One file split at random per seed, or a fixed train/test pair when
    /// `test_path` is given.
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_path: Option<PathBuf>,
        format: DataFormat,
        task: Task,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_features: Option<usize>,
    },
    /// `y = f₀(x) + N(0, noise_sd²)`, regenerated for every seed.
    Synthetic {
        spectrum: AtomicSpectrum,
        input: InputDist,
        n_train: usize,
        n_test: usize,
        noise_sd: f64,
    },
}

impl DataSource {
    pub fn task(&self) -> Task {
        match self {
            DataSource::File { task, .. } => *task,
            DataSource::Synthetic { .. } => Task::Regression,
        }
    }
}

/// `M₀`: a fixed count or a multiple of `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Candidates {
    Count(usize),
    Multiple { multiplier: usize },
}

impl Candidates {
    pub fn resolve(self, m: usize) -> usize {
        match self {
            Candidates::Count(c) => c,
            Candidates::Multiple { multiplier } => multiplier * m,
        }
    }
}

/// `N₀`: a fixed count or a fraction of the training rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScoringRows {
    Count(usize),
    Fraction { fraction: f64 },
}

impl ScoringRows {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            ScoringRows::Count(c) => c.min(n),
            ScoringRows::Fraction { fraction } => ((fraction * n as f64).round() as usize).clamp(1, n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandwidthRule {
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bandwidth {
    Fixed(f64),
    Rule(BandwidthRule),
}

impl Default for Bandwidth {
    fn default() -> Self {
        Bandwidth::Rule(BandwidthRule::Heuristic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    pub family: FeatureFamily,
    #[serde(default = "default_sampler")]
    pub sampler: CosineSampler,
    #[serde(default)]
    pub bandwidth: Bandwidth,
    #[serde(default)]
    pub order: u32,
}

fn default_sampler() -> CosineSampler {
    CosineSampler::Gaussian
}

impl FeatureConfig {
    /// The concrete spec for inputs of width `dim`, with `sigma` standing in
    /// for the heuristic bandwidth.
    pub fn resolve(&self, dim: usize, sigma: Option<f64>) -> Result<FeatureSpec> {
        match self.family {
            FeatureFamily::Cosine => {
                let bw = match self.bandwidth {
                    Bandwidth::Fixed(v) => v,
                    Bandwidth::Rule(BandwidthRule::Heuristic) => {
                        sigma.ok_or_else(|| Error::Config("heuristic bandwidth was not computed".into()))?
                    }
                };
                FeatureSpec::cosine(self.sampler, bw, dim)
            }
            FeatureFamily::ArcCosine => FeatureSpec::arccosine(self.order, dim),
            FeatureFamily::Linear => FeatureSpec::linear(dim),
        }
    }

    pub fn needs_heuristic(&self) -> bool {
        self.family == FeatureFamily::Cosine && matches!(self.bandwidth, Bandwidth::Rule(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_probe")]
    pub probe_size: usize,
}

fn default_k() -> usize {
    DEFAULT_NEIGHBOUR
}

fn default_probe() -> usize {
    DEFAULT_PROBE_SIZE
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_NEIGHBOUR,
            probe_size: DEFAULT_PROBE_SIZE,
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_validation_fraction() -> f64 {
    0.2
}

fn default_candidates() -> Candidates {
    Candidates::Multiple { multiplier: 10 }
}

fn default_scoring_rows() -> ScoringRows {
    ScoringRows::Fraction { fraction: 0.1 }
}

fn default_methods() -> Vec<Method> {
    vec![Method::Eerf, Method::Rks]
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

/// A declarative experiment, normally read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    pub m_values: Vec<usize>,
    #[serde(default = "default_candidates")]
    pub m0: Candidates,
    #[serde(default = "default_scoring_rows")]
    pub n0: ScoringRows,
    /// Subtract the mean response before scoring.
    #[serde(default = "default_true")]
    pub center_scores: bool,
    /// Test share when a single file is split at random.
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// Share of train held out to choose λ.
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
    #[serde(default = "default_reg_grid")]
    pub reg_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<Loss>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub data: DataSource,
    pub features: FeatureConfig,
    #[serde(default)]
    pub heuristic: HeuristicConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config; relative data paths are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        if let DataSource::File { path, test_path, .. } = &mut self.data {
            if path.is_relative() {
                *path = base.join(&*path);
            }
            if let Some(t) = test_path.as_mut().filter(|t| t.is_relative()) {
                *t = base.join(&*t);
            }
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.seeds.is_empty() {
            return bad("seeds must be non-empty".into());
        }
        if self.methods.is_empty() {
            return bad("methods must be non-empty".into());
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return bad("m_values must be non-empty and positive".into());
        }
        for &m in &self.m_values {
            let m0 = self.m0.resolve(m);
            if m > m0 {
                return bad(format!("M = {m} exceeds M0 = {m0}"));
            }
        }
        match self.n0 {
            ScoringRows::Count(0) => return bad("n0 must be positive".into()),
            ScoringRows::Fraction { fraction } if !(fraction > 0.0 && fraction <= 1.0) => {
                return bad(format!("n0 fraction must lie in (0, 1], got {fraction}"))
            }
            _ => {}
        }
        for (name, f) in [("test_fraction", self.test_fraction), ("validation_fraction", self.validation_fraction)] {
            if !(f > 0.0 && f < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {f}"));
            }
        }
        if let Bandwidth::Fixed(bw) = self.features.bandwidth {
            if !(bw.is_finite() && bw > 0.0) {
                return bad(format!("bandwidth must be positive, got {bw}"));
            }
        }
        if self.heuristic.k == 0 {
            return bad("heuristic k must be positive".into());
        }
        if let DataSource::Synthetic {
            n_train, n_test, noise_sd, ..
        } = &self.data
        {
            if *n_train < 2 || *n_test == 0 {
                return bad("synthetic data needs n_train >= 2 and n_test >= 1".into());
            }
            if !(*noise_sd >= 0.0) {
                return bad("noise_sd must be non-negative".into());
            }
        }
        self.train_config().validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn train_config(&self) -> TrainConfig {
        let task = self.data.task();
        let mut cfg = TrainConfig::for_task(task);
        cfg.reg_grid = self.reg_grid.clone();
        if let Some(loss) = self.loss {
            cfg.loss = loss;
        }
        cfg
    }
}
