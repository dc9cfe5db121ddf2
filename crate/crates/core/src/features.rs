//! Random feature maps, their samplers, and the kernels they induce.
//!
//! Three families are supported:
//!
//! * cosine, `φ(x; w, b) = cos(wᵀx + b)` with `b ~ U[0, 2π)` and `w` drawn
//!   per coordinate from a Gaussian, Laplace or Cauchy law of scale `1/σ`;
//! * arc-cosine of order `n`, `φ(x; w) = (wᵀx)ⁿ H(wᵀx)` with `w ~ N(0, I)`
//!   and `H(t) = 0.5 + 0.5·sgn(t)` (so `H(0) = 0.5`);
//! * linear, `φ(x; i) = x_i` with `i` uniform over the coordinates.
//!
//! Averaging `φ(x, ω) φ(x', ω)` over the sampling law gives the kernel
//! computed by [`kernel_oracle`].

use std::f64::consts::{PI, TAU};
use std::path::Path;

use ndarray::{Array2, ArrayView1, Zip};
use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::rng_from_seed;
use crate::RECORD_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CosineSampler {
    Gaussian,
    Laplace,
    Cauchy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureFamily {
    Cosine,
    ArcCosine,
    Linear,
}

/// A family together with its sampling law. Each variant fixes the only
/// sampler its family admits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FeatureSpec {
    Cosine {
        sampler: CosineSampler,
        bandwidth: f64,
        dim: usize,
    },
    #[serde(rename = "arccosine")]
    ArcCosine { order: u32, dim: usize },
    Linear { dim: usize },
}

impl FeatureSpec {
    pub fn cosine(sampler: CosineSampler, bandwidth: f64, dim: usize) -> Result<Self> {
        let spec = FeatureSpec::Cosine { sampler, bandwidth, dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn arccosine(order: u32, dim: usize) -> Result<Self> {
        let spec = FeatureSpec::ArcCosine { order, dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn linear(dim: usize) -> Result<Self> {
        let spec = FeatureSpec::Linear { dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return domain("feature dimension must be at least 1");
        }
        if let FeatureSpec::Cosine { bandwidth, .. } = self {
            if !(bandwidth.is_finite() && *bandwidth > 0.0) {
                return domain(format!("cosine bandwidth must be positive and finite, got {bandwidth}"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match *self {
            FeatureSpec::Cosine { dim, .. } | FeatureSpec::ArcCosine { dim, .. } | FeatureSpec::Linear { dim } => dim,
        }
    }

    pub fn family(&self) -> FeatureFamily {
        match self {
            FeatureSpec::Cosine { .. } => FeatureFamily::Cosine,
            FeatureSpec::ArcCosine { .. } => FeatureFamily::ArcCosine,
            FeatureSpec::Linear { .. } => FeatureFamily::Linear,
        }
    }

    /// Whether `|φ| ≤ 1` holds on every input. The arc-cosine map is
    /// unbounded; the linear map is bounded only on inputs in `[-1, 1]ᵈ`,
    /// which is reported as bounded here.
    pub fn is_bounded(&self) -> bool {
        !matches!(self, FeatureSpec::ArcCosine { .. })
    }

    pub fn with_dim(self, d: usize) -> Self {
        match self {
            FeatureSpec::Cosine { sampler, bandwidth, .. } => FeatureSpec::Cosine { sampler, bandwidth, dim: d },
            FeatureSpec::ArcCosine { order, .. } => FeatureSpec::ArcCosine { order, dim: d },
            FeatureSpec::Linear { .. } => FeatureSpec::Linear { dim: d },
        }
    }
}

/// Parameters of one sampled feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FeatureParams {
    Cosine { w: Vec<f64>, phase: f64 },
    #[serde(rename = "arccosine")]
    ArcCosine { w: Vec<f64>, order: u32 },
    /// Zero-based coordinate.
    Linear { coordinate: usize },
}

/// One random feature with its 1-based position in the sampling order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomFeature {
    pub source_index: usize,
    pub params: FeatureParams,
}

/// `H(t) = 0.5 + 0.5·sgn(t)`.
pub fn heaviside(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        0.0
    } else {
        0.5
    }
}

fn dot(a: &[f64], b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(p, q)| p * q).sum()
}

impl RandomFeature {
    pub fn cosine(source_index: usize, w: Vec<f64>, phase: f64) -> Self {
        Self {
            source_index,
            params: FeatureParams::Cosine { w, phase },
        }
    }

    pub fn arccosine(source_index: usize, w: Vec<f64>, order: u32) -> Self {
        Self {
            source_index,
            params: FeatureParams::ArcCosine { w, order },
        }
    }

    pub fn linear(source_index: usize, coordinate: usize) -> Self {
        Self {
            source_index,
            params: FeatureParams::Linear { coordinate },
        }
    }

    pub fn family(&self) -> FeatureFamily {
        match self.params {
            FeatureParams::Cosine { .. } => FeatureFamily::Cosine,
            FeatureParams::ArcCosine { .. } => FeatureFamily::ArcCosine,
            FeatureParams::Linear { .. } => FeatureFamily::Linear,
        }
    }

    /// Input dimension the feature expects; `None` for linear features, which
    /// only need `coordinate < d`.
    pub fn dim(&self) -> Option<usize> {
        match &self.params {
            FeatureParams::Cosine { w, .. } | FeatureParams::ArcCosine { w, .. } => Some(w.len()),
            FeatureParams::Linear { .. } => None,
        }
    }

    fn check_input(&self, d: usize) -> Result<()> {
        match (&self.params, self.dim()) {
            (_, Some(expected)) if expected != d => Err(Error::DimensionMismatch { expected, found: d }),
            (FeatureParams::Linear { coordinate }, _) if *coordinate >= d => Err(Error::DimensionMismatch {
                expected: coordinate + 1,
                found: d,
            }),
            _ => Ok(()),
        }
    }

    /// `φ(x, ω)` without dimension checks.
    pub fn evaluate(&self, x: ArrayView1<f64>) -> f64 {
        match &self.params {
            FeatureParams::Cosine { w, phase } => (dot(w, x) + phase).cos(),
            FeatureParams::ArcCosine { w, order } => {
                let t = dot(w, x);
                t.powi(*order as i32) * heaviside(t)
            }
            FeatureParams::Linear { coordinate } => x[*coordinate],
        }
    }

    pub fn try_evaluate(&self, x: ArrayView1<f64>) -> Result<f64> {
        self.check_input(x.len())?;
        Ok(self.evaluate(x))
    }
}

/// Laplace(0, scale) by inversion.
pub(crate) fn sample_laplace<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Draws `m0` features from the sampling law of `spec`. Deterministic in `seed`.
pub fn sample_features(spec: &FeatureSpec, m0: usize, seed: u64) -> Result<Vec<RandomFeature>> {
    spec.validate()?;
    if m0 == 0 {
        return domain("must sample at least one feature");
    }
    let mut rng = rng_from_seed(seed);
    let d = spec.dim();
    let features = match *spec {
        FeatureSpec::Cosine { sampler, bandwidth, .. } => {
            let scale = 1.0 / bandwidth;
            let cauchy = Cauchy::new(0.0, scale).map_err(|e| Error::Domain(e.to_string()))?;
            (1..=m0)
                .map(|source_index| {
                    let w: Vec<f64> = (0..d)
                        .map(|_| match sampler {
                            CosineSampler::Gaussian => scale * rng.sample::<f64, _>(StandardNormal),
                            CosineSampler::Laplace => sample_laplace(&mut rng, scale),
                            CosineSampler::Cauchy => cauchy.sample(&mut rng),
                        })
                        .collect();
                    let phase = TAU * rng.random::<f64>();
                    RandomFeature::cosine(source_index, w, phase)
                })
                .collect()
        }
        FeatureSpec::ArcCosine { order, .. } => (1..=m0)
            .map(|source_index| {
                let w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                RandomFeature::arccosine(source_index, w, order)
            })
            .collect(),
        FeatureSpec::Linear { .. } => (1..=m0)
            .map(|source_index| RandomFeature::linear(source_index, rng.random_range(0..d)))
            .collect(),
    };
    Ok(features)
}

/// `Z[n, m] = φ(xⁿ, ωᵐ) / √M`, built in parallel over rows.
pub fn feature_matrix(features: &[RandomFeature], x: &Array2<f64>) -> Result<Array2<f64>> {
    if features.is_empty() {
        return domain("feature matrix needs at least one feature");
    }
    for f in features {
        f.check_input(x.ncols())?;
    }
    let scale = 1.0 / (features.len() as f64).sqrt();
    let mut z = Array2::zeros((x.nrows(), features.len()));
    Zip::from(z.rows_mut()).and(x.rows()).par_for_each(|mut zr, xr| {
        for (slot, f) in zr.iter_mut().zip(features) {
            *slot = f.evaluate(xr) * scale;
        }
    });
    Ok(z)
}

/// Monte Carlo kernel estimate `(1/M) Σ_m φ(x, ωᵐ) φ(x', ωᵐ)`.
pub fn monte_carlo_kernel(features: &[RandomFeature], x: ArrayView1<f64>, x2: ArrayView1<f64>) -> f64 {
    let total: f64 = features.iter().map(|f| f.evaluate(x) * f.evaluate(x2)).sum();
    total / features.len() as f64
}

/// Closed form of `E_ω[φ(x, ω) φ(x', ω)]` under the sampling law of `spec`.
///
/// * cosine/Gaussian: `½·exp(-‖x - x'‖² / (2σ²))`; the ½ comes from
///   averaging over the uniform phase and the unscaled `cos` map.
/// * linear: `xᵀx' / d`.
/// * arc-cosine order 0: `(π - θ) / (2π)`; order 1:
///   `‖x‖‖x'‖ (sin θ + (π - θ) cos θ) / (2π)`, with `θ` the angle between
///   `x` and `x'`.
pub fn kernel_oracle(spec: &FeatureSpec, x: ArrayView1<f64>, x2: ArrayView1<f64>) -> Result<f64> {
    let d = spec.dim();
    for v in [x.len(), x2.len()] {
        if v != d {
            return Err(Error::DimensionMismatch { expected: d, found: v });
        }
    }
    match *spec {
        FeatureSpec::Cosine {
            sampler: CosineSampler::Gaussian,
            bandwidth,
            ..
        } => {
            let sq: f64 = x.iter().zip(x2.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            Ok(0.5 * (-sq / (2.0 * bandwidth * bandwidth)).exp())
        }
        FeatureSpec::Linear { .. } => Ok(x.dot(&x2) / d as f64),
        FeatureSpec::ArcCosine { order, .. } if order <= 1 => {
            let nx = x.dot(&x).sqrt();
            let nx2 = x2.dot(&x2).sqrt();
            if nx == 0.0 || nx2 == 0.0 {
                // wᵀ0 = 0 so H = ½ there; order 1 vanishes.
                return Ok(if order == 0 { 0.25 } else { 0.0 });
            }
            let cos_theta = (x.dot(&x2) / (nx * nx2)).clamp(-1.0, 1.0);
            let theta = cos_theta.acos();
            Ok(match order {
                0 => (PI - theta) / (2.0 * PI),
                _ => nx * nx2 * (theta.sin() + (PI - theta) * cos_theta) / (2.0 * PI),
            })
        }
        other => domain(format!("no closed-form kernel for {other:?}")),
    }
}

/// Serialized feature list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub version: u32,
    pub seed: u64,
    pub spec: FeatureSpec,
    pub features: Vec<RandomFeature>,
}

impl FeatureRecord {
    pub fn new(spec: FeatureSpec, seed: u64, features: Vec<RandomFeature>) -> Self {
        Self {
            version: RECORD_VERSION,
            seed,
            spec,
            features,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let rec: Self = serde_json::from_slice(&std::fs::read(path)?)?;
        if rec.version != RECORD_VERSION {
            return domain(format!("unsupported feature record version {}", rec.version));
        }
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, array};

    #[test]
    fn evaluate_examples() {
        let zero = RandomFeature::cosine(1, vec![0.0, 0.0], 0.0);
        assert_eq!(zero.evaluate(arr1(&[3.0, -7.0]).view()), 1.0);

        let arc = RandomFeature::arccosine(1, vec![1.0, 0.0], 1);
        assert_eq!(arc.evaluate(arr1(&[-2.0, 5.0]).view()), 0.0);
        assert_eq!(arc.evaluate(arr1(&[2.0, 5.0]).view()), 2.0);
        let arc0 = RandomFeature::arccosine(1, vec![1.0, 0.0], 0);
        assert_eq!(arc0.evaluate(arr1(&[0.0, 5.0]).view()), 0.5);

        let lin = RandomFeature::linear(1, 1);
        assert_eq!(lin.evaluate(arr1(&[7.0, -3.0, 1.0]).view()), -3.0);
    }

    #[test]
    fn heaviside_at_zero_is_half() {
        assert_eq!(heaviside(0.0), 0.5);
        assert_eq!(heaviside(-0.0), 0.5);
        assert_eq!(heaviside(1e-300), 1.0);
        assert_eq!(heaviside(-1e-300), 0.0);
    }

    #[test]
    fn dimension_checks() {
        let f = RandomFeature::cosine(1, vec![1.0, 2.0], 0.0);
        assert!(f.try_evaluate(arr1(&[1.0]).view()).is_err());
        assert!(feature_matrix(&[f], &array![[1.0, 2.0, 3.0]]).is_err());
        assert!(feature_matrix(&[RandomFeature::linear(1, 3)], &array![[1.0, 2.0]]).is_err());
        assert!(feature_matrix(&[], &array![[1.0]]).is_err());
    }

    #[test]
    fn matrix_scaling() {
        let x = array![[0.3, -1.0], [2.0, 0.5]];
        let one = vec![RandomFeature::cosine(1, vec![0.5, 0.25], 1.0)];
        let z = feature_matrix(&one, &x).unwrap();
        for n in 0..2 {
            assert_eq!(z[[n, 0]], one[0].evaluate(x.row(n)));
        }
        let constant: Vec<_> = (1..=4).map(|i| RandomFeature::cosine(i, vec![0.0, 0.0], 0.0)).collect();
        let z = feature_matrix(&constant, &x).unwrap();
        assert!(z.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn kernel_oracle_examples() {
        let g = FeatureSpec::cosine(CosineSampler::Gaussian, 1.0, 2).unwrap();
        let x = arr1(&[0.4, -1.2]);
        assert_eq!(kernel_oracle(&g, x.view(), x.view()).unwrap(), 0.5);
        let x2 = arr1(&[1.4, -1.2]);
        assert!((kernel_oracle(&g, x.view(), x2.view()).unwrap() - 0.5 * (-0.5f64).exp()).abs() < 1e-15);

        let lin = FeatureSpec::linear(2).unwrap();
        assert_eq!(kernel_oracle(&lin, arr1(&[1.0, 0.0]).view(), arr1(&[0.0, 1.0]).view()).unwrap(), 0.0);

        let lap = FeatureSpec::cosine(CosineSampler::Laplace, 1.0, 2).unwrap();
        assert!(kernel_oracle(&lap, x.view(), x.view()).is_err());
        let arc2 = FeatureSpec::arccosine(2, 2).unwrap();
        assert!(kernel_oracle(&arc2, x.view(), x.view()).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(FeatureSpec::cosine(CosineSampler::Gaussian, 0.0, 2).is_err());
        assert!(FeatureSpec::cosine(CosineSampler::Gaussian, f64::NAN, 2).is_err());
        assert!(FeatureSpec::linear(0).is_err());
        assert!(sample_features(&FeatureSpec::linear(2).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_indexed() {
        let spec = FeatureSpec::cosine(CosineSampler::Cauchy, 2.0, 3).unwrap();
        let a = sample_features(&spec, 50, 9).unwrap();
        assert_eq!(a, sample_features(&spec, 50, 9).unwrap());
        assert_ne!(a, sample_features(&spec, 50, 10).unwrap());
        assert!(a.iter().enumerate().all(|(i, f)| f.source_index == i + 1));
        for f in &a {
            match &f.params {
                FeatureParams::Cosine { w, phase } => {
                    assert!((0.0..TAU).contains(phase));
                    assert!(w.iter().all(|v| v.is_finite()));
                }
                _ => panic!("wrong family"),
            }
        }
    }

    #[test]
    fn record_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = FeatureSpec::arccosine(1, 2).unwrap();
        let rec = FeatureRecord::new(spec, 4, sample_features(&spec, 3, 4).unwrap());
        let path = dir.path().join("f.json");
        rec.save(&path).unwrap();
        assert_eq!(FeatureRecord::load(&path).unwrap(), rec);
    }
}
