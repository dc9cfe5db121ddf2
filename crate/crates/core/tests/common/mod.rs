#![allow(dead_code)]

use std::path::Path;

use eerf::experiment::ExperimentConfig;

/// Small synthetic regression experiment writing into `out`.
pub fn synthetic_toml(out: &Path, seeds: &[u64], m_values: &[usize], m0: &str) -> String {
    format!(
        r#"
name = "small"
seeds = {seeds:?}
m_values = {m_values:?}
m0 = {m0}
n0 = {{ fraction = 0.5 }}
out = {out:?}

[data]
source = "synthetic"
n_train = 300
n_test = 150
noise_sd = 0.1

[data.input]
family = "gaussian"
scales = [1.0, 1.0, 1.0]

[data.spectrum]
even = false

[[data.spectrum.atoms]]
weight = 0.6
frequency = [1.5, -1.0, 0.5]
phase = 0.0

[[data.spectrum.atoms]]
weight = 0.4
frequency = [-0.5, 1.0, 1.5]
phase = 1.0

[features]
family = "cosine"
bandwidth = "heuristic"

[heuristic]
k = 10
probe_size = 200
"#
    )
}

pub fn synthetic(out: &Path, seeds: &[u64], m_values: &[usize], m0: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(&synthetic_toml(out, seeds, m_values, m0)).unwrap()
}
