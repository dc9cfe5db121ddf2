use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::features::{sample_features, CosineSampler, FeatureSpec, RandomFeature};
use crate::rng::{derive_seed, rng_from_seed, Stream};
use crate::selection::{eerf_select, score_responses};
use crate::theory::{
    concentration_check, linear_spectrum_check, monte_carlo_pair_expectation, orthogonality_kernel,
    orthogonality_kernel_integral, orthogonality_mass, pair_expectation_oracle, recovery_ladder, synthetic_regression,
    uniform_grid, Atom, AtomicSpectrum, ConcentrationConfig, InputDist, InputFamily,
};

/// `(weight, frequency)` pairs in one dimension, zero phase.
fn atoms_1d(pairs: &[(f64, f64)]) -> Vec<Atom> {
    pairs.iter().map(|&(a, w)| Atom::new(a, vec![w], 0.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverySection {
    /// Half of an even spectrum; mirrors are added.
    pub atoms: Vec<(f64, f64)>,
    pub family: InputFamily,
    pub ladder: Vec<f64>,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_points: usize,
    pub phase: f64,
    /// Required discrepancy at the last ladder rung.
    pub threshold: f64,
}

impl Default for RecoverySection {
    fn default() -> Self {
        Self {
            atoms: vec![(0.5, 1.2), (-0.3, 3.6)],
            family: InputFamily::Gaussian,
            ladder: vec![1.0, 2.0, 5.0],
            grid_lo: -60.0,
            grid_hi: 60.0,
            grid_points: 201,
            phase: 0.0,
            threshold: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrthogonalitySection {
    pub families: Vec<InputFamily>,
    pub dim: usize,
    pub input_scale: f64,
    pub pairs: usize,
    pub draws: usize,
    /// Allowed distance in Monte Carlo standard errors.
    pub tolerance_se: f64,
    pub min_passing: usize,
    pub seed: u64,
}

impl Default for OrthogonalitySection {
    fn default() -> Self {
        Self {
            families: vec![InputFamily::Gaussian, InputFamily::Laplace, InputFamily::Cauchy],
            dim: 2,
            input_scale: 1.0,
            pairs: 20,
            draws: 1_000_000,
            tolerance_se: 4.0,
            min_passing: 19,
            seed: 11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationSection {
    pub atoms: Vec<(f64, f64)>,
    pub input_scale: f64,
    pub n: usize,
    pub m0: usize,
    pub delta: f64,
    pub trials: usize,
    pub feature_bandwidth: f64,
    pub noise: f64,
    pub min_pass_rate: f64,
    pub seed: u64,
}

impl Default for ConcentrationSection {
    fn default() -> Self {
        Self {
            atoms: vec![(0.4, 1.0), (0.3, -2.5)],
            input_scale: 1.0,
            n: 10_000,
            m0: 500,
            delta: 0.01,
            trials: 100,
            feature_bandwidth: 1.0,
            noise: 0.3,
            min_pass_rate: 0.99,
            seed: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearSection {
    pub dim: usize,
    pub sigma: f64,
    pub n: usize,
    /// Allowed deviation is `envelope / √n`.
    pub envelope: f64,
    pub seed: u64,
}

impl Default for LinearSection {
    fn default() -> Self {
        Self {
            dim: 5,
            sigma: 1.0,
            n: 100_000,
            envelope: 3.0,
            seed: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaLimitSection {
    pub sigmas: Vec<f64>,
    /// `|ω - ω'|` at which the normalized kernel must vanish.
    pub separation: f64,
    pub radius: f64,
    pub min_mass: f64,
    pub max_density: f64,
}

impl Default for DeltaLimitSection {
    fn default() -> Self {
        Self {
            sigmas: vec![1.0, 10.0, 100.0],
            separation: 1.0,
            radius: 0.1,
            min_mass: 0.9,
            max_density: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionSection {
    pub atoms: Vec<(f64, f64)>,
    pub input_scale: f64,
    pub n: usize,
    pub noise_sd: f64,
    pub m0: usize,
    pub m: usize,
    pub feature_bandwidth: f64,
    /// A selected `w` counts as a hit within this distance of some `±w_j`.
    pub epsilon: f64,
    pub min_hit_rate: f64,
    pub seed: u64,
}

impl Default for SelectionSection {
    fn default() -> Self {
        Self {
            atoms: vec![(0.3, 1.2), (-0.2, 3.6)],
            input_scale: 5.0,
            n: 20_000,
            noise_sd: 0.1,
            m0: 2000,
            m: 20,
            feature_bandwidth: 0.4,
            epsilon: 0.5,
            min_hit_rate: 0.9,
            seed: 2,
        }
    }
}

/// Sizes and thresholds for every theory check.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryConfig {
    /// Names of checks to leave out.
    pub skip: Vec<String>,
    /// Test hook: the Monte Carlo side of the orthogonality check draws its
    /// second feature from the wrong stream, so that check must fail.
    pub fault_injection: bool,
    pub recovery: RecoverySection,
    pub orthogonality: OrthogonalitySection,
    pub concentration: ConcentrationSection,
    pub linear: LinearSection,
    pub delta_limit: DeltaLimitSection,
    pub selection: SelectionSection,
}

impl TheoryConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// The headline number compared against `threshold`.
    pub metric: f64,
    pub threshold: f64,
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

pub const CHECK_NAMES: &[&str] = &["recovery", "orthogonality", "concentration", "linear", "delta_limit", "selection"];

pub fn check_recovery(cfg: &RecoverySection) -> Result<CheckOutcome> {
    let spectrum = AtomicSpectrum::symmetric(atoms_1d(&cfg.atoms))?;
    let grid = uniform_grid(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)?;
    let ladder = recovery_ladder(&spectrum, cfg.family, &cfg.ladder, &grid, cfg.phase)?;
    let discrepancies: Vec<f64> = ladder.reports.iter().map(|r| r.l1_discrepancy).collect();
    let last = *discrepancies.last().unwrap_or(&f64::INFINITY);
    Ok(CheckOutcome {
        name: "recovery".into(),
        passed: ladder.strictly_decreasing && last <= cfg.threshold,
        metric: last,
        threshold: cfg.threshold,
        details: json!({
            "ladder": cfg.ladder,
            "l1_discrepancy": discrepancies,
            "strictly_decreasing": ladder.strictly_decreasing,
            "grid_spacing": (cfg.grid_hi - cfg.grid_lo) / (cfg.grid_points.max(2) - 1) as f64,
        }),
    })
}

fn random_pair(dim: usize, seed: u64) -> (RandomFeature, RandomFeature) {
    let mut rng = rng_from_seed(seed);
    let mut draw = |idx| {
        let w: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        RandomFeature::cosine(idx, w, TAU * rng.random::<f64>())
    };
    let f = draw(1);
    let g = draw(2);
    (f, g)
}

pub fn check_orthogonality(cfg: &OrthogonalitySection, fault_injection: bool) -> Result<CheckOutcome> {
    let mut per_family = Vec::new();
    let mut worst = usize::MAX;
    for (fi, &family) in cfg.families.iter().enumerate() {
        let dist = InputDist::isotropic(family, cfg.input_scale, cfg.dim)?;
        let outcomes = (0..cfg.pairs)
            .into_par_iter()
            .map(|p| {
                let pair_seed = derive_seed(cfg.seed, fi as u64, p as u64, Stream::Trial);
                let (f, g) = random_pair(cfg.dim, pair_seed);
                let oracle = pair_expectation_oracle(&dist, &f, &g)?;
                let g_mc = if fault_injection {
                    random_pair(cfg.dim, pair_seed ^ 0xdead_beef).1
                } else {
                    g
                };
                let (mean, se) = monte_carlo_pair_expectation(
                    &dist,
                    &f,
                    &g_mc,
                    cfg.draws,
                    derive_seed(cfg.seed, fi as u64, p as u64, Stream::Synthetic),
                )?;
                Ok(((mean - oracle).abs() <= cfg.tolerance_se * se, (mean - oracle) / se))
            })
            .collect::<Result<Vec<(bool, f64)>>>()?;
        let passing = outcomes.iter().filter(|o| o.0).count();
        worst = worst.min(passing);
        per_family.push(json!({
            "family": family,
            "passing": passing,
            "z_scores": outcomes.iter().map(|o| o.1).collect::<Vec<_>>(),
        }));
    }
    let worst = if cfg.families.is_empty() { 0 } else { worst };
    Ok(CheckOutcome {
        name: "orthogonality".into(),
        passed: !cfg.families.is_empty() && worst >= cfg.min_passing,
        metric: worst as f64,
        threshold: cfg.min_passing as f64,
        details: json!({ "families": per_family, "draws": cfg.draws }),
    })
}

pub fn check_concentration(cfg: &ConcentrationSection) -> Result<CheckOutcome> {
    let report = concentration_check(&ConcentrationConfig {
        dist: InputDist::isotropic(InputFamily::Gaussian, cfg.input_scale, 1)?,
        spectrum: AtomicSpectrum::new(atoms_1d(&cfg.atoms))?,
        n: cfg.n,
        m0: cfg.m0,
        delta: cfg.delta,
        trials: cfg.trials,
        feature_bandwidth: cfg.feature_bandwidth,
        noise: cfg.noise,
        seed: cfg.seed,
    })?;
    let worst = report.max_deviations.iter().copied().fold(0.0, f64::max);
    Ok(CheckOutcome {
        name: "concentration".into(),
        passed: report.pass_rate >= cfg.min_pass_rate,
        metric: report.pass_rate,
        threshold: cfg.min_pass_rate,
        details: json!({ "bound": report.bound, "worst_deviation": worst, "trials": cfg.trials }),
    })
}

pub fn check_linear(cfg: &LinearSection) -> Result<CheckOutcome> {
    let mut rng = rng_from_seed(derive_seed(cfg.seed, 0, 0, Stream::Synthetic));
    let f0: Vec<f64> = (0..cfg.dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let report = linear_spectrum_check(&f0, cfg.sigma, cfg.n, derive_seed(cfg.seed, 0, 0, Stream::Trial))?;
    let limit = cfg.envelope / (cfg.n as f64).sqrt();
    Ok(CheckOutcome {
        name: "linear".into(),
        passed: report.max_deviation <= limit,
        metric: report.max_deviation,
        threshold: limit,
        details: json!({
            "f0": f0,
            "normalized_score": report.normalized_score,
            "normalized_spectrum": report.normalized_spectrum,
        }),
    })
}

pub fn check_delta_limit(cfg: &DeltaLimitSection) -> Result<CheckOutcome> {
    let mut passed = !cfg.sigmas.is_empty();
    let mut worst_mass: f64 = 1.0;
    let mut rows = Vec::new();
    for family in [InputFamily::Gaussian, InputFamily::Laplace, InputFamily::Cauchy] {
        let density: Vec<f64> = cfg
            .sigmas
            .iter()
            .map(|&s| orthogonality_kernel(family, cfg.separation, s) / orthogonality_kernel_integral(family, s))
            .collect();
        let mass: Vec<f64> = cfg.sigmas.iter().map(|&s| orthogonality_mass(family, cfg.radius, s)).collect();
        let monotone = density.windows(2).all(|w| w[1] < w[0]) && mass.windows(2).all(|w| w[1] > w[0]);
        let last_mass = *mass.last().unwrap_or(&0.0);
        let last_density = *density.last().unwrap_or(&f64::INFINITY);
        passed &= monotone && last_mass >= cfg.min_mass && last_density <= cfg.max_density;
        worst_mass = worst_mass.min(last_mass);
        rows.push(json!({ "family": family, "normalized_density": density, "mass": mass, "monotone": monotone }));
    }
    Ok(CheckOutcome {
        name: "delta_limit".into(),
        passed,
        metric: worst_mass,
        threshold: cfg.min_mass,
        details: json!({ "sigmas": cfg.sigmas, "families": rows }),
    })
}

pub fn check_selection(cfg: &SelectionSection) -> Result<CheckOutcome> {
    let spectrum = AtomicSpectrum::symmetric(atoms_1d(&cfg.atoms))?;
    let dist = InputDist::isotropic(InputFamily::Gaussian, cfg.input_scale, 1)?;
    let ds = synthetic_regression(&spectrum, &dist, cfg.n, cfg.noise_sd, cfg.seed)?;
    let spec = FeatureSpec::cosine(CosineSampler::Gaussian, cfg.feature_bandwidth, 1)?;
    let pool = sample_features(&spec, cfg.m0, derive_seed(cfg.seed, 0, 0, Stream::Features))?;
    let table = score_responses(&pool, ds.x().view(), ds.y().view())?;
    let chosen = eerf_select(&table, cfg.m)?;
    let hits = chosen
        .iter()
        .filter(|f| match &f.params {
            crate::features::FeatureParams::Cosine { w, .. } => {
                cfg.atoms.iter().any(|&(_, a)| (w[0] - a).abs() <= cfg.epsilon || (w[0] + a).abs() <= cfg.epsilon)
            }
            _ => false,
        })
        .count();
    let rate = hits as f64 / cfg.m as f64;
    Ok(CheckOutcome {
        name: "selection".into(),
        passed: rate >= cfg.min_hit_rate,
        metric: rate,
        threshold: cfg.min_hit_rate,
        details: json!({ "hits": hits, "m": cfg.m, "epsilon": cfg.epsilon }),
    })
}

/// Runs every check not listed in `skip`. A check that errors is recorded
/// as failed with the error message.
pub fn run_theory_suite(cfg: &TheoryConfig) -> Result<TheoryReport> {
    if let Some(bad) = cfg.skip.iter().find(|s| !CHECK_NAMES.contains(&s.as_str())) {
        return Err(Error::Config(format!("unknown check {bad:?} in skip list")));
    }
    let mut checks = Vec::new();
    for &name in CHECK_NAMES {
        if cfg.skip.iter().any(|s| s == name) {
            continue;
        }
        let outcome = match name {
            "recovery" => check_recovery(&cfg.recovery),
            "orthogonality" => check_orthogonality(&cfg.orthogonality, cfg.fault_injection),
            "concentration" => check_concentration(&cfg.concentration),
            "linear" => check_linear(&cfg.linear),
            "delta_limit" => check_delta_limit(&cfg.delta_limit),
            "selection" => check_selection(&cfg.selection),
            _ => unreachable!(),
        };
        let outcome = outcome.unwrap_or_else(|e| CheckOutcome {
            name: name.into(),
            passed: false,
            metric: f64::NAN,
            threshold: f64::NAN,
            details: json!({ "error": e.to_string() }),
        });
        log::info!("theory check {name}: {}", if outcome.passed { "pass" } else { "FAIL" });
        checks.push(outcome);
    }
    Ok(TheoryReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Writes `theory_report.json` and `theory_summary.csv` into `dir`.
pub fn write_theory_report(report: &TheoryReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("theory_report.json"), serde_json::to_vec_pretty(report)?)?;
    let mut w = csv::Writer::from_path(dir.join("theory_summary.csv"))?;
    w.write_record(["check", "passed", "metric", "threshold"])?;
    for c in &report.checks {
        w.write_record([
            c.name.clone(),
            c.passed.to_string(),
            c.metric.to_string(),
            c.threshold.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
