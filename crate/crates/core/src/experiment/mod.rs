//! Config-driven experiment runs and the theory validation suite.
//!
//! Every random choice in a run is seeded by
//! [`derive_seed`](crate::rng::derive_seed)`(master_seed, seed, M, stream)`,
//! so a cell's outcome does not depend on which other cells run or in what
//! order. EERF and RKS cells with the same `(seed, M)` share their candidate
//! pool and validation split.

mod config;
mod output;
mod run;
mod theory_suite;

use std::path::{Path, PathBuf};

pub use config::{
    Bandwidth, BandwidthRule, Candidates, DataSource, ExperimentConfig, FeatureConfig, HeuristicConfig, Method,
    ScoringRows,
};
pub use output::{emit_results, read_results, render_svg, replot, PLOT_FILE, RESULTS_FILE, SUMMARY_FILE, TIMINGS_FILE};
pub use run::{prepare_seed, run_experiment, score_candidates, CellResult, ExperimentResult, PreparedSeed, SummaryRow};
pub use theory_suite::{
    check_concentration, check_delta_limit, check_linear, check_orthogonality, check_recovery, check_selection,
    run_theory_suite, write_theory_report, CheckOutcome, ConcentrationSection, DeltaLimitSection, LinearSection,
    OrthogonalitySection, RecoverySection, SelectionSection, TheoryConfig, TheoryReport, CHECK_NAMES,
};

use crate::error::Result;
use crate::features::FeatureRecord;
use crate::rng::{derive_seed, Stream};

/// Runs the experiment, writes its files and the resolved config into
/// `cfg.out`, and returns the result.
pub fn run_and_emit(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let res = run_experiment(cfg)?;
    emit_results(&res, &cfg.out)?;
    std::fs::write(cfg.out.join("config.toml"), cfg.to_toml()?)?;
    Ok(res)
}

/// Scores the candidate pool of the first seed and largest M and writes
/// `scores.json` and `features.json` into `dir`. The record's seed is the
/// derived feature-stream seed, so `sample_features` reproduces the pool.
pub fn dump_scores(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let seed = cfg.seeds[0];
    let m = *cfg.m_values.iter().max().expect("validated non-empty");
    let prep = prepare_seed(cfg, seed)?;
    let spec = cfg.features.resolve(prep.train.n_cols(), prep.sigma)?;
    let (pool, table) = score_candidates(cfg, &prep, &spec, m)?;
    std::fs::create_dir_all(dir)?;
    let scores = dir.join("scores.json");
    let features = dir.join("features.json");
    table.save(&scores)?;
    let stream_seed = derive_seed(cfg.master_seed, seed, m as u64, Stream::Features);
    FeatureRecord::new(spec, stream_seed, pool).save(&features)?;
    Ok(vec![scores, features])
}
