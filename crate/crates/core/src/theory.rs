//! Analytic companions to the empirical score.
//!
//! For cosine features and independent symmetric inputs, the pair
//! expectation `E[φ(x, ω) φ(x, ω')]` has a closed form built from the
//! input characteristic function. With an atomic target
//! `f₀(x) = Σ_j a_j cos(w_jᵀx + b_j)` the population score `S(ω) = E[f₀(x) φ(x, ω)]`
//! is a finite sum of such terms, which is what the checks below compare the
//! empirical `Ŝ` against.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::data::{Dataset, Task};
use crate::error::{domain, Error, Result};
use crate::features::{sample_features, sample_laplace, CosineSampler, FeatureParams, FeatureSpec, RandomFeature};
use crate::rng::{derive_seed, rng_from_seed, Stream};
use crate::selection::score_responses;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFamily {
    Gaussian,
    Laplace,
    Cauchy,
}

/// Independent per-coordinate inputs: `N(0, σᵢ²)`, `Laplace(0, σᵢ)` or
/// `Cauchy(0, σᵢ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDist {
    pub family: InputFamily,
    pub scales: Vec<f64>,
}

impl InputDist {
    pub fn new(family: InputFamily, scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return domain("input distribution needs at least one coordinate");
        }
        if let Some(s) = scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return domain(format!("input scales must be positive, got {s}"));
        }
        Ok(Self { family, scales })
    }

    pub fn isotropic(family: InputFamily, scale: f64, dim: usize) -> Result<Self> {
        Self::new(family, vec![scale; dim])
    }

    pub fn dim(&self) -> usize {
        self.scales.len()
    }

    /// `E[cos(tᵀx)]`, the (real) characteristic function at `t`.
    pub fn characteristic(&self, t: &[f64]) -> f64 {
        self.scales
            .iter()
            .zip(t)
            .map(|(&s, &ti)| match self.family {
                InputFamily::Gaussian => (-0.5 * s * s * ti * ti).exp(),
                InputFamily::Laplace => 1.0 / (1.0 + s * s * ti * ti),
                InputFamily::Cauchy => (-s * ti.abs()).exp(),
            })
            .product()
    }

    /// `n × d` draws.
    pub fn sample(&self, n: usize, seed: u64) -> Array2<f64> {
        let mut rng = rng_from_seed(seed);
        let d = self.dim();
        let mut x = Array2::zeros((n, d));
        for mut row in x.rows_mut() {
            for (v, &s) in row.iter_mut().zip(&self.scales) {
                *v = match self.family {
                    InputFamily::Gaussian => s * rng.sample::<f64, _>(StandardNormal),
                    InputFamily::Laplace => sample_laplace(&mut rng, s),
                    InputFamily::Cauchy => Cauchy::new(0.0, s).expect("positive scale").sample(&mut rng),
                };
            }
        }
        x
    }
}

/// One cosine component `a cos(wᵀx + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub weight: f64,
    pub frequency: Vec<f64>,
    pub phase: f64,
}

impl Atom {
    pub fn new(weight: f64, frequency: Vec<f64>, phase: f64) -> Self {
        Self {
            weight,
            frequency,
            phase,
        }
    }

    fn as_feature(&self) -> RandomFeature {
        RandomFeature::cosine(0, self.frequency.clone(), self.phase)
    }
}

/// `f₀(x) = Σ_j a_j cos(w_jᵀx + b_j)`. With `even` set, every atom at `w`
/// has a partner at `-w` with the same weight and phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicSpectrum {
    pub atoms: Vec<Atom>,
    pub even: bool,
}

impl AtomicSpectrum {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        Self::check_dims(&atoms)?;
        Ok(Self { atoms, even: false })
    }

    /// Adds the mirror image `(a, -w, b)` of every atom and sets the parity flag.
    pub fn symmetric(half: Vec<Atom>) -> Result<Self> {
        Self::check_dims(&half)?;
        let mut atoms = Vec::with_capacity(2 * half.len());
        for a in half {
            let mirror = Atom::new(a.weight, a.frequency.iter().map(|v| -v).collect(), a.phase);
            atoms.push(a);
            atoms.push(mirror);
        }
        Ok(Self { atoms, even: true })
    }

    fn check_dims(atoms: &[Atom]) -> Result<()> {
        if let Some(first) = atoms.first() {
            let d = first.frequency.len();
            if d == 0 {
                return domain("atom frequencies must be non-empty");
            }
            if let Some(a) = atoms.iter().find(|a| a.frequency.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: a.frequency.len(),
                });
            }
        }
        if atoms
            .iter()
            .any(|a| !a.weight.is_finite() || !a.phase.is_finite() || a.frequency.iter().any(|v| !v.is_finite()))
        {
            return domain("atom parameters must be finite");
        }
        Ok(())
    }

    pub fn dim(&self) -> Option<usize> {
        self.atoms.first().map(|a| a.frequency.len())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                let t: f64 = a.frequency.iter().zip(x).map(|(w, v)| w * v).sum();
                a.weight * (t + a.phase).cos()
            })
            .sum()
    }

    /// `Σ |a_j|`, an upper bound on `|f₀|`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum()
    }
}

fn cosine_parts(f: &RandomFeature) -> Result<(&[f64], f64)> {
    match &f.params {
        FeatureParams::Cosine { w, phase } => Ok((w, *phase)),
        _ => domain(format!("pair expectation needs cosine features, got {:?}", f.family())),
    }
}

/// Closed form of `E[cos(wᵀx + b) cos(w'ᵀx + b')]`:
/// `½cos(b + b')·Φ(w + w') + ½cos(b - b')·Φ(w - w')` with `Φ` the input
/// characteristic function.
pub fn pair_expectation_oracle(dist: &InputDist, f: &RandomFeature, g: &RandomFeature) -> Result<f64> {
    let (w, b) = cosine_parts(f)?;
    let (w2, b2) = cosine_parts(g)?;
    for len in [w.len(), w2.len()] {
        if len != dist.dim() {
            return Err(Error::DimensionMismatch {
                expected: dist.dim(),
                found: len,
            });
        }
    }
    let sum: Vec<f64> = w.iter().zip(w2).map(|(a, c)| a + c).collect();
    let diff: Vec<f64> = w.iter().zip(w2).map(|(a, c)| a - c).collect();
    Ok(0.5 * (b + b2).cos() * dist.characteristic(&sum) + 0.5 * (b - b2).cos() * dist.characteristic(&diff))
}

/// Sample mean of `φ(x, ω) φ(x, ω')` over `n` input draws, with its
/// standard error.
pub fn monte_carlo_pair_expectation(
    dist: &InputDist,
    f: &RandomFeature,
    g: &RandomFeature,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    cosine_parts(f)?;
    cosine_parts(g)?;
    if n < 2 {
        return domain("Monte Carlo needs at least two draws");
    }
    let x = dist.sample(n, seed);
    let products: Vec<f64> = x.rows().into_iter().map(|row| f.evaluate(row) * g.evaluate(row)).collect();
    let mean = products.iter().sum::<f64>() / n as f64;
    let var = products.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, (var / n as f64).sqrt()))
}

/// Population score `S(ω) = Σ_j a_j E[cos(w_jᵀx + b_j) φ(x, ω)]`.
pub fn analytic_score(spectrum: &AtomicSpectrum, dist: &InputDist, f: &RandomFeature) -> Result<f64> {
    cosine_parts(f)?;
    spectrum.atoms.iter().try_fold(0.0, |acc, atom| {
        Ok(acc + atom.weight * pair_expectation_oracle(dist, &atom.as_feature(), f)?)
    })
}

/// Normalized `|S|` against normalized `|F_R|` on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub scales: Vec<f64>,
    pub phase: f64,
    pub grid: Vec<Vec<f64>>,
    pub normalized_score: Vec<f64>,
    pub normalized_spectrum: Vec<f64>,
    pub l1_discrepancy: f64,
    /// Bound on the projection error used; zero because the target lies in
    /// the model class.
    pub projection_error_bound: f64,
}

/// Evaluates `|S(b, w)|` on each grid frequency and the atom masses `|a_j|`
/// (each assigned to its nearest grid point), normalizes both to unit sum,
/// and reports their L1 distance.
pub fn spectrum_recovery_check(
    spectrum: &AtomicSpectrum,
    dist: &InputDist,
    grid: &[Vec<f64>],
    phase: f64,
) -> Result<RecoveryReport> {
    if !spectrum.even {
        return domain("spectrum recovery requires an even (parity-flagged) spectrum");
    }
    if grid.is_empty() {
        return domain("frequency grid is empty");
    }
    let d = dist.dim();
    if let Some(g) = grid.iter().find(|g| g.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: g.len(),
        });
    }
    if spectrum.dim().is_some_and(|sd| sd != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: spectrum.dim().unwrap_or(0),
        });
    }

    let raw_score: Vec<f64> = grid
        .iter()
        .map(|w| analytic_score(spectrum, dist, &RandomFeature::cosine(0, w.clone(), phase)).map(f64::abs))
        .collect::<Result<_>>()?;
    let mut raw_spectrum = vec![0.0; grid.len()];
    for atom in &spectrum.atoms {
        let nearest = grid
            .iter()
            .enumerate()
            .map(|(i, g)| (i, g.iter().zip(&atom.frequency).map(|(a, b)| (a - b).powi(2)).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| i)
            .expect("grid is non-empty");
        raw_spectrum[nearest] += atom.weight.abs();
    }

    let score_total: f64 = raw_score.iter().sum();
    let spectrum_total: f64 = raw_spectrum.iter().sum();
    if !(score_total > 0.0) {
        return domain("score vanishes on the whole grid");
    }
    if !(spectrum_total > 0.0) {
        return domain("spectrum has no mass");
    }
    let normalized_score: Vec<f64> = raw_score.iter().map(|v| v / score_total).collect();
    let normalized_spectrum: Vec<f64> = raw_spectrum.iter().map(|v| v / spectrum_total).collect();
    let l1_discrepancy = normalized_score
        .iter()
        .zip(&normalized_spectrum)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(RecoveryReport {
        scales: dist.scales.clone(),
        phase,
        grid: grid.to_vec(),
        normalized_score,
        normalized_spectrum,
        l1_discrepancy,
        projection_error_bound: 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub reports: Vec<RecoveryReport>,
    pub strictly_decreasing: bool,
}

/// [`spectrum_recovery_check`] at each isotropic input scale of a ladder.
pub fn recovery_ladder(
    spectrum: &AtomicSpectrum,
    family: InputFamily,
    ladder: &[f64],
    grid: &[Vec<f64>],
    phase: f64,
) -> Result<LadderReport> {
    let d = grid.first().map_or(1, Vec::len);
    let reports = ladder
        .iter()
        .map(|&s| spectrum_recovery_check(spectrum, &InputDist::isotropic(family, s, d)?, grid, phase))
        .collect::<Result<Vec<_>>>()?;
    let strictly_decreasing = reports.windows(2).all(|w| w[1].l1_discrepancy < w[0].l1_discrepancy);
    Ok(LadderReport {
        reports,
        strictly_decreasing,
    })
}

/// `points` evenly spaced scalar frequencies on `[lo, hi]`, as 1-d vectors.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<Vec<f64>>> {
    if points < 2 || !(hi > lo) {
        return domain(format!("degenerate grid [{lo}, {hi}] with {points} points"));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| vec![lo + step * i as f64]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub dist: InputDist,
    pub spectrum: AtomicSpectrum,
    pub n: usize,
    pub m0: usize,
    pub delta: f64,
    pub trials: usize,
    /// Bandwidth of the Gaussian cosine sampler for candidate features.
    pub feature_bandwidth: f64,
    /// Responses are `f₀(x) + U[-noise, noise]`.
    pub noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    /// `√(2 ln(2 M₀ / δ) / N)`.
    pub bound: f64,
    pub max_deviations: Vec<f64>,
    pub pass_rate: f64,
}

/// Per trial: draw `N` inputs and `M₀` features, compute
/// `max_m |Ŝ(ωᵐ) - S(ωᵐ)|` and compare with the Hoeffding/union bound.
/// Requires `|y| ≤ 1`, i.e. `Σ|a_j| + noise ≤ 1`.
pub fn concentration_check(cfg: &ConcentrationConfig) -> Result<ConcentrationReport> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {}", cfg.delta));
    }
    if cfg.n == 0 || cfg.m0 == 0 || cfg.trials == 0 {
        return domain("n, m0 and trials must all be positive");
    }
    if !(cfg.noise >= 0.0) || cfg.spectrum.total_mass() + cfg.noise > 1.0 + 1e-12 {
        return domain("responses must be bounded by 1: Σ|a_j| + noise > 1");
    }
    let d = cfg.dist.dim();
    if cfg.spectrum.dim().is_some_and(|sd| sd != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: cfg.spectrum.dim().unwrap_or(0),
        });
    }
    let spec = FeatureSpec::cosine(CosineSampler::Gaussian, cfg.feature_bandwidth, d)?;
    let bound = (2.0 * (2.0 * cfg.m0 as f64 / cfg.delta).ln() / cfg.n as f64).sqrt();

    let max_deviations = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let x = cfg.dist.sample(cfg.n, derive_seed(cfg.seed, t as u64, 0, Stream::Synthetic));
            let mut noise_rng = rng_from_seed(derive_seed(cfg.seed, t as u64, 0, Stream::Trial));
            let y: Array1<f64> = x
                .rows()
                .into_iter()
                .map(|row| {
                    let eps = if cfg.noise > 0.0 {
                        noise_rng.random_range(-cfg.noise..=cfg.noise)
                    } else {
                        0.0
                    };
                    cfg.spectrum.evaluate(row.as_slice().expect("row-major sample")) + eps
                })
                .collect();
            let features = sample_features(&spec, cfg.m0, derive_seed(cfg.seed, t as u64, 0, Stream::Features))?;
            let table = score_responses(&features, x.view(), y.view())?;
            table.entries.iter().try_fold(0.0f64, |acc, e| {
                Ok(acc.max((e.score - analytic_score(&cfg.spectrum, &cfg.dist, &e.feature)?).abs()))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let passed = max_deviations.iter().filter(|&&m| m <= bound).count();
    Ok(ConcentrationReport {
        bound,
        pass_rate: passed as f64 / cfg.trials as f64,
        max_deviations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSpectrumReport {
    pub normalized_score: Vec<f64>,
    pub normalized_spectrum: Vec<f64>,
    pub max_deviation: f64,
}

/// Linear features `φ(x, i) = x_i` with i.i.d. `N(0, σ²)` inputs and
/// `y = Σ_i F₀,ᵢ x_i`: the normalized `|Ŝ|` should match `|F₀| / ‖F₀‖₁`.
pub fn linear_spectrum_check(f0: &[f64], sigma: f64, n: usize, seed: u64) -> Result<LinearSpectrumReport> {
    let l1: f64 = f0.iter().map(|v| v.abs()).sum();
    if f0.is_empty() || !(l1 > 0.0) || f0.iter().any(|v| !v.is_finite()) {
        return domain("F0 must be a finite, non-zero vector");
    }
    if !(sigma.is_finite() && sigma > 0.0) || n == 0 {
        return domain("need sigma > 0 and n > 0");
    }
    let d = f0.len();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let mut sums = vec![0.0; d];
    let mut row = vec![0.0; d];
    for _ in 0..n {
        row.iter_mut().for_each(|v| *v = normal.sample(&mut rng));
        let y: f64 = row.iter().zip(f0).map(|(x, f)| x * f).sum();
        for (s, x) in sums.iter_mut().zip(&row) {
            *s += y * x;
        }
    }
    let scores: Vec<f64> = sums.iter().map(|s| (s / n as f64).abs()).collect();
    let total: f64 = scores.iter().sum();
    if !(total > 0.0) {
        return domain("empirical scores vanish");
    }
    let normalized_score: Vec<f64> = scores.iter().map(|s| s / total).collect();
    let normalized_spectrum: Vec<f64> = f0.iter().map(|v| v.abs() / l1).collect();
    let max_deviation = normalized_score
        .iter()
        .zip(&normalized_spectrum)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(LinearSpectrumReport {
        normalized_score,
        normalized_spectrum,
        max_deviation,
    })
}

/// One-coordinate factor `H_R(t; σ)` of the pair expectation.
pub fn orthogonality_kernel(family: InputFamily, t: f64, sigma: f64) -> f64 {
    InputDist {
        family,
        scales: vec![sigma],
    }
    .characteristic(&[t])
}

/// `∫ H_R(t; σ) dt` over the real line.
pub fn orthogonality_kernel_integral(family: InputFamily, sigma: f64) -> f64 {
    match family {
        InputFamily::Gaussian => (2.0 * PI).sqrt() / sigma,
        InputFamily::Laplace => PI / sigma,
        InputFamily::Cauchy => 2.0 / sigma,
    }
}

/// Mass of the normalized `H_R(·; σ)` inside `[-r, r]`.
pub fn orthogonality_mass(family: InputFamily, radius: f64, sigma: f64) -> f64 {
    let s = sigma * radius;
    match family {
        InputFamily::Gaussian => erf(s / 2f64.sqrt()),
        InputFamily::Laplace => 2.0 / PI * s.atan(),
        InputFamily::Cauchy => 1.0 - (-s).exp(),
    }
}

/// `y = f₀(x) + N(0, noise_sd²)` regression data with inputs from `dist`.
pub fn synthetic_regression(
    spectrum: &AtomicSpectrum,
    dist: &InputDist,
    n: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset> {
    if spectrum.dim().is_some_and(|d| d != dist.dim()) {
        return Err(Error::DimensionMismatch {
            expected: dist.dim(),
            found: spectrum.dim().unwrap_or(0),
        });
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return domain(format!("noise standard deviation must be non-negative, got {noise_sd}"));
    }
    let x = dist.sample(n, derive_seed(seed, 0, 0, Stream::Synthetic));
    let mut rng = rng_from_seed(derive_seed(seed, 0, 0, Stream::Trial));
    let y: Array1<f64> = x
        .rows()
        .into_iter()
        .map(|row| {
            let eps: f64 = StandardNormal.sample(&mut rng);
            spectrum.evaluate(row.as_slice().expect("row-major sample")) + noise_sd * eps
        })
        .collect();
    Dataset::new(x, y, Task::Regression)
}
