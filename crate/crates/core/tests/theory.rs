use eerf::features::{sample_features, CosineSampler, FeatureSpec, RandomFeature};
use eerf::selection::score_responses;
use eerf::theory::{
    analytic_score, concentration_check, linear_spectrum_check, monte_carlo_pair_expectation,
    orthogonality_kernel, orthogonality_kernel_integral, orthogonality_mass, pair_expectation_oracle, Atom,
    AtomicSpectrum, ConcentrationConfig, InputDist, InputFamily,
};
use ndarray::Array1;
use proptest::prelude::*;

const FAMILIES: [InputFamily; 3] = [InputFamily::Gaussian, InputFamily::Laplace, InputFamily::Cauchy];

fn family() -> impl Strategy<Value = InputFamily> {
    prop::sample::select(FAMILIES.to_vec())
}

fn cosine() -> impl Strategy<Value = RandomFeature> {
    (prop::collection::vec(-3.0f64..3.0, 2), 0.0f64..std::f64::consts::TAU)
        .prop_map(|(w, b)| RandomFeature::cosine(1, w, b))
}

/// Composite Simpson rule on `[lo, hi]`.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let inner: f64 = (1..panels)
        .map(|i| f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(lo) + f(hi) + inner) * h / 3.0
}

proptest! {
    #[test]
    fn pair_expectation_is_symmetric_and_bounded(fam in family(), s in 0.1f64..4.0, f in cosine(), g in cosine()) {
        let dist = InputDist::isotropic(fam, s, 2).unwrap();
        let fg = pair_expectation_oracle(&dist, &f, &g).unwrap();
        let gf = pair_expectation_oracle(&dist, &g, &f).unwrap();
        prop_assert!((fg - gf).abs() <= 1e-15);
        prop_assert!(fg.abs() <= 1.0);
        // E[cos²] = ½ + ½cos(2b)Φ(2w).
        let ff = pair_expectation_oracle(&dist, &f, &f).unwrap();
        prop_assert!((0.0..=1.0).contains(&ff));
    }

    #[test]
    fn analytic_score_is_linear_in_weights(fam in family(), c in -3.0f64..3.0, f in cosine(), a in cosine(), b in cosine()) {
        let dist = InputDist::isotropic(fam, 1.0, 2).unwrap();
        let atom = |r: &RandomFeature, wt: f64| match &r.params {
            eerf::features::FeatureParams::Cosine { w, phase } => Atom::new(wt, w.clone(), *phase),
            _ => unreachable!(),
        };
        let sa = analytic_score(&AtomicSpectrum::new(vec![atom(&a, 1.0)]).unwrap(), &dist, &f).unwrap();
        let sb = analytic_score(&AtomicSpectrum::new(vec![atom(&b, 1.0)]).unwrap(), &dist, &f).unwrap();
        let both = AtomicSpectrum::new(vec![atom(&a, c), atom(&b, 1.0)]).unwrap();
        let sum = analytic_score(&both, &dist, &f).unwrap();
        prop_assert!((sum - (c * sa + sb)).abs() <= 1e-14);
    }

    #[test]
    fn characteristic_function_is_even_and_unit_at_zero(fam in family(), s in 0.1f64..5.0, t in prop::collection::vec(-5.0f64..5.0, 3)) {
        let dist = InputDist::isotropic(fam, s, 3).unwrap();
        let neg: Vec<f64> = t.iter().map(|v| -v).collect();
        prop_assert_eq!(dist.characteristic(&t), dist.characteristic(&neg));
        prop_assert_eq!(dist.characteristic(&[0.0; 3]), 1.0);
        prop_assert!((0.0..=1.0).contains(&dist.characteristic(&t)));
    }
}

#[test]
fn characteristic_function_matches_sampling() {
    let n = 200_000;
    let t = [0.7, -0.4];
    for fam in FAMILIES {
        let dist = InputDist::new(fam, vec![1.5, 0.5]).unwrap();
        let x = dist.sample(n, 3);
        let vals: Vec<f64> = x.rows().into_iter().map(|r| (t[0] * r[0] + t[1] * r[1]).cos()).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        // |cos| ≤ 1.
        assert!((mean - dist.characteristic(&t)).abs() <= 5.0 / (n as f64).sqrt(), "{fam:?}");
    }
}

#[test]
fn kernel_integrals_and_masses_match_quadrature() {
    for fam in FAMILIES {
        for sigma in [0.5, 2.0] {
            let k = |t: f64| orthogonality_kernel(fam, t, sigma);
            // Cauchy-type tails need a wide window; the rest is analytic tail mass.
            let span = 4000.0 / sigma;
            let numeric = simpson(k, -span, span, 2_000_000);
            let exact = orthogonality_kernel_integral(fam, sigma);
            let tail = match fam {
                InputFamily::Laplace => 2.0 / (sigma * sigma * span),
                _ => 0.0,
            };
            assert!((numeric + tail - exact).abs() <= 1e-6 * exact, "{fam:?} σ={sigma}: {numeric} vs {exact}");
            let r = 0.8;
            let inside = simpson(k, -r, r, 20_000) / exact;
            assert!((inside - orthogonality_mass(fam, r, sigma)).abs() <= 1e-9, "{fam:?} mass");
        }
    }
}

#[test]
fn pair_expectation_matches_monte_carlo() {
    let f = RandomFeature::cosine(1, vec![0.6, -1.1], 0.4);
    let g = RandomFeature::cosine(2, vec![0.2, 0.9], 2.2);
    for fam in FAMILIES {
        let dist = InputDist::isotropic(fam, 0.8, 2).unwrap();
        let (mc, se) = monte_carlo_pair_expectation(&dist, &f, &g, 400_000, 12).unwrap();
        let exact = pair_expectation_oracle(&dist, &f, &g).unwrap();
        assert!((mc - exact).abs() <= 4.5 * se, "{fam:?}: {mc} vs {exact} (se {se})");
    }
}

/// A Gaussian factor `exp(-σ t² / 2)` (scale not squared) is
/// distinguishable from the correct one by sampling.
#[test]
fn unsquared_gaussian_factor_is_rejected() {
    let sigma = 3.0;
    let dist = InputDist::isotropic(InputFamily::Gaussian, sigma, 1).unwrap();
    let f = RandomFeature::cosine(1, vec![0.4], 0.0);
    let g = RandomFeature::cosine(2, vec![0.1], 0.0);
    let (mc, se) = monte_carlo_pair_expectation(&dist, &f, &g, 400_000, 8).unwrap();
    let wrong = |t: f64| (-sigma * t * t / 2.0).exp();
    let unsquared = 0.5 * wrong(0.5) + 0.5 * wrong(0.3);
    let exact = pair_expectation_oracle(&dist, &f, &g).unwrap();
    assert!((mc - exact).abs() <= 4.5 * se);
    assert!((mc - unsquared).abs() > 20.0 * se, "{mc} vs {unsquared}");
}

#[test]
fn empirical_scores_converge_to_analytic() {
    let n = 100_000;
    let spectrum = AtomicSpectrum::new(vec![
        Atom::new(0.5, vec![1.0, -0.5], 0.3),
        Atom::new(-0.3, vec![0.2, 2.0], 1.1),
    ])
    .unwrap();
    for fam in FAMILIES {
        let dist = InputDist::isotropic(fam, 1.0, 2).unwrap();
        let x = dist.sample(n, 31);
        let y: Array1<f64> = x.rows().into_iter().map(|r| spectrum.evaluate(r.as_slice().unwrap())).collect();
        let spec = FeatureSpec::cosine(CosineSampler::Gaussian, 1.0, 2).unwrap();
        let pool = sample_features(&spec, 25, 2).unwrap();
        let table = score_responses(&pool, x.view(), y.view()).unwrap();
        // |y φ| ≤ 0.8.
        let tol = 5.0 * 0.8 / (n as f64).sqrt();
        for e in &table.entries {
            let exact = analytic_score(&spectrum, &dist, &e.feature).unwrap();
            assert!((e.score - exact).abs() <= tol, "{fam:?}: {} vs {exact}", e.score);
        }
    }
}

#[test]
fn concentration_holds_at_large_n() {
    let cfg = ConcentrationConfig {
        dist: InputDist::isotropic(InputFamily::Gaussian, 1.0, 2).unwrap(),
        spectrum: AtomicSpectrum::new(vec![Atom::new(0.5, vec![1.0, 0.0], 0.0), Atom::new(0.3, vec![0.0, -2.0], 0.5)])
            .unwrap(),
        n: 1_000_000,
        m0: 10,
        delta: 0.01,
        trials: 3,
        feature_bandwidth: 1.0,
        noise: 0.2,
        seed: 5,
    };
    let rep = concentration_check(&cfg).unwrap();
    let bound = (2.0 * (2.0 * 10.0 / 0.01f64).ln() / 1e6).sqrt();
    assert!((rep.bound - bound).abs() < 1e-15);
    assert_eq!(rep.pass_rate, 1.0, "{:?}", rep.max_deviations);
}

#[test]
fn unbounded_responses_are_refused() {
    let cfg = ConcentrationConfig {
        dist: InputDist::isotropic(InputFamily::Gaussian, 1.0, 1).unwrap(),
        spectrum: AtomicSpectrum::new(vec![Atom::new(0.9, vec![1.0], 0.0)]).unwrap(),
        n: 10,
        m0: 2,
        delta: 0.1,
        trials: 1,
        feature_bandwidth: 1.0,
        noise: 0.2,
        seed: 0,
    };
    assert!(concentration_check(&cfg).is_err());
}

#[test]
fn linear_scores_track_coefficients() {
    let f0 = [2.0, -1.0, 0.5, 0.0, 1.5];
    let n = 100_000;
    let rep = linear_spectrum_check(&f0, 1.0, n, 4).unwrap();
    assert!(rep.max_deviation <= 3.0 / (n as f64).sqrt());
    assert!((rep.normalized_spectrum.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert!(linear_spectrum_check(&[0.0, 0.0], 1.0, 10, 1).is_err());
}
