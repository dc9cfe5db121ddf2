use eerf::features::{
    feature_matrix, kernel_oracle, monte_carlo_kernel, sample_features, CosineSampler, FeatureParams, FeatureSpec,
    RandomFeature,
};
use eerf::theory::{InputDist, InputFamily};
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;

fn all_weights(features: &[RandomFeature]) -> Vec<f64> {
    features
        .iter()
        .flat_map(|f| match &f.params {
            FeatureParams::Cosine { w, .. } | FeatureParams::ArcCosine { w, .. } => w.clone(),
            FeatureParams::Linear { .. } => unreachable!(),
        })
        .collect()
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (mean, v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
}

fn median_abs(v: &[f64]) -> f64 {
    let mut a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    a.sort_by(f64::total_cmp);
    a[a.len() / 2]
}

#[test]
fn linear_coordinates_are_uniform() {
    let d = 5;
    let n = 100_000;
    let feats = sample_features(&FeatureSpec::linear(d).unwrap(), n, 17).unwrap();
    let mut counts = vec![0usize; d];
    for f in &feats {
        match f.params {
            FeatureParams::Linear { coordinate } => counts[coordinate] += 1,
            _ => unreachable!(),
        }
    }
    let p = 1.0 / d as f64;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c as f64 - n as f64 * p).abs() <= 5.0 * sd, "count {c}");
    }
}

#[test]
fn gaussian_frequencies_have_variance_one_over_sigma_squared() {
    let sigma = 2.0;
    let feats = sample_features(&FeatureSpec::cosine(CosineSampler::Gaussian, sigma, 4).unwrap(), 50_000, 3).unwrap();
    let (mean, var) = mean_var(&all_weights(&feats));
    assert!(mean.abs() < 0.01);
    assert!((var / 0.25 - 1.0).abs() < 0.01, "variance {var}");
    let phases: Vec<f64> = feats
        .iter()
        .map(|f| match f.params {
            FeatureParams::Cosine { phase, .. } => phase,
            _ => unreachable!(),
        })
        .collect();
    assert!(phases.iter().all(|&b| (0.0..std::f64::consts::TAU).contains(&b)));
    let (pm, _) = mean_var(&phases);
    assert!((pm - std::f64::consts::PI).abs() < 0.02);
}

#[test]
fn laplace_and_cauchy_scales() {
    let sigma = 0.5;
    let lap = sample_features(&FeatureSpec::cosine(CosineSampler::Laplace, sigma, 2).unwrap(), 100_000, 5).unwrap();
    let (mean, var) = mean_var(&all_weights(&lap));
    // Laplace(0, b) has variance 2b² with b = 1/σ.
    assert!(mean.abs() < 0.03);
    assert!((var / 8.0 - 1.0).abs() < 0.03, "laplace variance {var}");
    let cau = sample_features(&FeatureSpec::cosine(CosineSampler::Cauchy, sigma, 2).unwrap(), 100_000, 6).unwrap();
    // Cauchy(0, γ) has median |w| equal to γ.
    let med = median_abs(&all_weights(&cau));
    assert!((med / 2.0 - 1.0).abs() < 0.02, "cauchy median {med}");
}

#[test]
fn arccosine_weights_are_standard_normal() {
    let feats = sample_features(&FeatureSpec::arccosine(1, 3).unwrap(), 50_000, 8).unwrap();
    let w = all_weights(&feats);
    let (mean, var) = mean_var(&w);
    let n = w.len() as f64;
    let fourth = w.iter().map(|x| x.powi(4)).sum::<f64>() / n;
    assert!(mean.abs() < 0.02);
    assert!((var - 1.0).abs() < 0.02);
    assert!((fourth - 3.0).abs() < 0.1);
}

fn naive_matrix(features: &[RandomFeature], x: &Array2<f64>) -> Array2<f64> {
    let m = features.len() as f64;
    Array2::from_shape_fn((x.nrows(), features.len()), |(i, j)| {
        let row = x.row(i);
        let v = match &features[j].params {
            FeatureParams::Cosine { w, phase } => {
                let mut t = *phase;
                for k in 0..w.len() {
                    t += w[k] * row[k];
                }
                t.cos()
            }
            FeatureParams::ArcCosine { w, order } => {
                let t: f64 = (0..w.len()).map(|k| w[k] * row[k]).sum();
                let h = if t > 0.0 {
                    1.0
                } else if t == 0.0 {
                    0.5
                } else {
                    0.0
                };
                t.powi(*order as i32) * h
            }
            FeatureParams::Linear { coordinate } => row[*coordinate],
        };
        v / m.sqrt()
    })
}

fn spec_strategy() -> impl Strategy<Value = FeatureSpec> {
    (1usize..5, 0u8..5, 0.1f64..5.0).prop_map(|(d, kind, bw)| match kind {
        0 => FeatureSpec::cosine(CosineSampler::Gaussian, bw, d).unwrap(),
        1 => FeatureSpec::cosine(CosineSampler::Laplace, bw, d).unwrap(),
        2 => FeatureSpec::cosine(CosineSampler::Cauchy, bw, d).unwrap(),
        3 => FeatureSpec::arccosine((bw as u32) % 3, d).unwrap(),
        _ => FeatureSpec::linear(d).unwrap(),
    })
}

proptest! {
    #[test]
    fn feature_matrix_matches_naive_loop(spec in spec_strategy(), m in 1usize..40, n in 1usize..20, seed in any::<u64>()) {
        let feats = sample_features(&spec, m, seed).unwrap();
        let x = InputDist::isotropic(InputFamily::Gaussian, 1.0, spec.dim()).unwrap().sample(n, seed ^ 1);
        let z = feature_matrix(&feats, &x).unwrap();
        let oracle = naive_matrix(&feats, &x);
        for (a, b) in z.iter().zip(oracle.iter()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        if spec.family() == eerf::features::FeatureFamily::Cosine {
            let cap = 1.0 / (m as f64).sqrt();
            prop_assert!(z.iter().all(|v| v.abs() <= cap * (1.0 + 1e-15)));
        }
    }

    #[test]
    fn sampling_is_deterministic(spec in spec_strategy(), m in 1usize..50, seed in any::<u64>()) {
        let a = sample_features(&spec, m, seed).unwrap();
        prop_assert_eq!(&a, &sample_features(&spec, m, seed).unwrap());
        prop_assert_eq!(a.iter().map(|f| f.source_index).collect::<Vec<_>>(), (1..=m).collect::<Vec<_>>());
        // A longer draw extends a shorter one.
        let longer = sample_features(&spec, m + 7, seed).unwrap();
        prop_assert_eq!(&longer[..m], &a[..]);
    }
}

#[test]
fn gaussian_kernel_hoeffding_band() {
    let m = 10_000;
    let d = 3;
    let sigma = 1.5;
    // Each product lies in [-1, 1].
    let bound = (2.0 * 100f64.ln() / m as f64).sqrt();
    let spec = FeatureSpec::cosine(CosineSampler::Gaussian, sigma, d).unwrap();
    let pts = InputDist::isotropic(InputFamily::Gaussian, 1.0, d).unwrap().sample(100, 99);
    let mut inside = 0;
    for p in 0..50 {
        let feats = sample_features(&spec, m, 1000 + p as u64).unwrap();
        let (x, x2) = (pts.row(2 * p), pts.row(2 * p + 1));
        let gap = (monte_carlo_kernel(&feats, x, x2) - kernel_oracle(&spec, x, x2).unwrap()).abs();
        if gap <= bound {
            inside += 1;
        }
    }
    assert!(inside >= 49, "{inside}/50 pairs inside ±{bound}");
}

#[test]
fn feature_matrix_examples() {
    let x = ndarray::array![[0.3, -1.0], [2.0, 0.5]];
    let one = RandomFeature::cosine(1, vec![0.7, 0.2], 0.1);
    let z = feature_matrix(std::slice::from_ref(&one), &x).unwrap();
    assert_eq!(z[[1, 0]], one.evaluate(x.row(1)));
    let flat: Vec<RandomFeature> = (1..=4).map(|i| RandomFeature::cosine(i, vec![0.0, 0.0], 0.0)).collect();
    assert!(feature_matrix(&flat, &x).unwrap().iter().all(|&v| v == 0.5));
}

#[test]
fn gaussian_kernel_at_unit_distance_by_monte_carlo() {
    let spec = FeatureSpec::cosine(CosineSampler::Gaussian, 1.0, 2).unwrap();
    let feats = sample_features(&spec, 1_000_000, 13).unwrap();
    let (x, x2) = (array![0.2, 0.4], array![0.8, 1.2]);
    let exact = kernel_oracle(&spec, x.view(), x2.view()).unwrap();
    assert!((exact - 0.5 * (-0.5f64).exp()).abs() < 1e-15);
    // |φφ'| ≤ 1.
    assert!((monte_carlo_kernel(&feats, x.view(), x2.view()) - exact).abs() <= 3.0 / 1000.0);
}

#[test]
fn gaussian_kernel_examples() {
    let spec = FeatureSpec::cosine(CosineSampler::Gaussian, 1.0, 2).unwrap();
    let k = kernel_oracle(&spec, array![0.0, 0.0].view(), array![1.0, 0.0].view()).unwrap();
    assert!((k - 0.5 * (-0.5f64).exp()).abs() < 1e-15);
    let same = kernel_oracle(&spec, array![0.3, 0.1].view(), array![0.3, 0.1].view()).unwrap();
    assert_eq!(same, 0.5);
}

#[test]
fn arccosine_kernel_matches_monte_carlo() {
    let d = 3;
    let x: Array1<f64> = array![1.0, -0.5, 0.2];
    let x2: Array1<f64> = array![0.3, 0.8, -1.0];
    for order in [0u32, 1] {
        let spec = FeatureSpec::arccosine(order, d).unwrap();
        let feats = sample_features(&spec, 200_000, 21 + order as u64).unwrap();
        let prods: Vec<f64> = feats.iter().map(|f| f.evaluate(x.view()) * f.evaluate(x2.view())).collect();
        let (mean, var) = mean_var(&prods);
        let se = (var / prods.len() as f64).sqrt();
        let exact = kernel_oracle(&spec, x.view(), x2.view()).unwrap();
        assert!((mean - exact).abs() <= 5.0 * se, "order {order}: {mean} vs {exact} (se {se})");
    }
    // Orthogonal inputs, order 0: (π - π/2) / 2π = 1/4.
    let spec = FeatureSpec::arccosine(0, 2).unwrap();
    let k = kernel_oracle(&spec, array![1.0, 0.0].view(), array![0.0, 2.0].view()).unwrap();
    assert!((k - 0.25).abs() < 1e-15);
}

#[test]
fn linear_kernel_matches_monte_carlo() {
    let spec = FeatureSpec::linear(4).unwrap();
    let feats = sample_features(&spec, 100_000, 4).unwrap();
    let x = array![0.5, -1.0, 2.0, 0.1];
    let x2 = array![1.0, 1.0, 0.5, -3.0];
    let exact = kernel_oracle(&spec, x.view(), x2.view()).unwrap();
    assert!((exact - (0.5 - 1.0 + 1.0 - 0.3) / 4.0).abs() < 1e-15);
    assert!((monte_carlo_kernel(&feats, x.view(), x2.view()) - exact).abs() < 0.02);
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(FeatureSpec::cosine(CosineSampler::Gaussian, 0.0, 2).is_err());
    assert!(FeatureSpec::cosine(CosineSampler::Gaussian, f64::NAN, 2).is_err());
    assert!(FeatureSpec::linear(0).is_err());
    assert!(sample_features(&FeatureSpec::linear(2).unwrap(), 0, 1).is_err());
    let feats = sample_features(&FeatureSpec::linear(2).unwrap(), 3, 1).unwrap();
    assert!(feature_matrix(&feats, &Array2::zeros((4, 3))).is_ok());
    let cos = sample_features(&FeatureSpec::cosine(CosineSampler::Gaussian, 1.0, 2).unwrap(), 3, 1).unwrap();
    assert!(feature_matrix(&cos, &Array2::zeros((4, 3))).is_err());
}
