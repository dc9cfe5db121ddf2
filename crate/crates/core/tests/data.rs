use std::collections::BTreeSet;
use std::path::Path;

use eerf::data::{
    bandwidth_heuristic, parse_csv, parse_libsvm, split, standardize, subsample, BandwidthConfig, Dataset, SplitSpec,
    Task,
};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn dataset(rows: usize, cols: usize, values: &[f64], task: Task) -> Dataset {
    let x = Array2::from_shape_vec((rows, cols), values[..rows * cols].to_vec()).unwrap();
    let y: Array1<f64> = (0..rows)
        .map(|i| match task {
            Task::Classification => if i % 2 == 0 { 1.0 } else { -1.0 },
            Task::Regression => values[i % values.len()] * 3.0 + i as f64,
        })
        .collect();
    Dataset::new(x, y, task).unwrap()
}

fn matrix_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (2usize..30, 1usize..6).prop_flat_map(|(r, c)| (Just(r), Just(c), prop::collection::vec(-1e3f64..1e3, r * c)))
}

/// k-th smallest distance from each point to the others, by full sort.
fn brute_force_sigma(x: &Array2<f64>, k: usize) -> f64 {
    let n = x.nrows();
    let mut total = 0.0;
    for i in 0..n {
        let mut d: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let diff = &x.row(i) - &x.row(j);
                diff.dot(&diff).sqrt()
            })
            .collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        total += d[k - 1];
    }
    total / n as f64
}

proptest! {
    #[test]
    fn standardized_columns_have_zero_mean_unit_variance((r, c, v) in matrix_strategy()) {
        let ds = dataset(r, c, &v, Task::Regression);
        let (s, p) = standardize(&ds).unwrap();
        for (j, col) in s.x().columns().into_iter().enumerate() {
            let mean = col.sum() / r as f64;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / r as f64;
            prop_assert!(mean.abs() < 1e-9);
            if p.zero_variance[j] {
                prop_assert!(col.iter().all(|&x| x == 0.0));
            } else {
                prop_assert!((var - 1.0).abs() < 1e-9);
            }
        }
        prop_assert!(s.y().iter().all(|&y| (-1.0..=1.0).contains(&y)));
    }

    #[test]
    fn standardize_is_idempotent((r, c, v) in matrix_strategy()) {
        let ds = dataset(r, c, &v, Task::Classification);
        let (once, p) = standardize(&ds).unwrap();
        let (twice, _) = standardize(&once).unwrap();
        for j in 0..c {
            if p.zero_variance[j] {
                continue;
            }
            for i in 0..r {
                prop_assert!((once.x()[[i, j]] - twice.x()[[i, j]]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn standardize_then_invert_recovers_raw((r, c, v) in matrix_strategy()) {
        let ds = dataset(r, c, &v, Task::Regression);
        let (s, p) = standardize(&ds).unwrap();
        let back = p.invert(&s).unwrap();
        for (a, b) in back.x().iter().zip(ds.x().iter()) {
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{a} vs {b}");
        }
        for (a, b) in back.y().iter().zip(ds.y().iter()) {
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn bandwidth_matches_brute_force(n in 3usize..60, k in 1usize..3, seed in any::<u64>()) {
        let x = eerf::theory::InputDist::isotropic(eerf::theory::InputFamily::Gaussian, 1.0, 3).unwrap().sample(n, seed);
        let ds = Dataset::new(x.clone(), Array1::zeros(n), Task::Regression).unwrap();
        let k = k.min(n - 1);
        let cfg = BandwidthConfig { k, probe_size: n, seed: 0 };
        let sigma = bandwidth_heuristic(&ds, &cfg).unwrap();
        prop_assert!((sigma - brute_force_sigma(&x, k)).abs() <= 1e-12 * sigma);
    }

    #[test]
    fn csv_round_trip((r, c, v) in matrix_strategy()) {
        let ds = dataset(r, c, &v, Task::Regression);
        let mut text = String::new();
        for (row, y) in ds.x().rows().into_iter().zip(ds.y()) {
            let cells: Vec<String> = row.iter().chain(std::iter::once(y)).map(|v| format!("{v:?}")).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        let back = parse_csv(&text, Task::Regression, Path::new("mem.csv")).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn libsvm_round_trip((r, c, v) in matrix_strategy()) {
        let ds = dataset(r, c, &v, Task::Classification);
        let mut text = String::new();
        for (row, y) in ds.x().rows().into_iter().zip(ds.y()) {
            text.push_str(if *y > 0.0 { "+1" } else { "-1" });
            for (j, v) in row.iter().enumerate() {
                if *v != 0.0 {
                    text.push_str(&format!(" {}:{v:?}", j + 1));
                }
            }
            text.push('\n');
        }
        let back = parse_libsvm(&text, Task::Classification, Some(c), Path::new("mem.libsvm")).unwrap();
        prop_assert_eq!(back, ds);
    }
}

#[test]
fn brute_force_bandwidth_on_a_line() {
    let x = Array2::from_shape_fn((61, 1), |(i, _)| i as f64);
    let ds = Dataset::new(x.clone(), Array1::zeros(61), Task::Regression).unwrap();
    let sigma = bandwidth_heuristic(
        &ds,
        &BandwidthConfig {
            k: 50,
            probe_size: 61,
            seed: 0,
        },
    )
    .unwrap();
    assert_eq!(sigma, brute_force_sigma(&x, 50));
}

#[test]
fn random_splits_partition_indices() {
    for seed in 0..1000u64 {
        let n = 5 + (seed as usize % 40);
        let (train, test) = SplitSpec::Random {
            test_fraction: 0.3,
            seed,
        }
        .indices(n)
        .unwrap();
        let a: BTreeSet<usize> = train.iter().copied().collect();
        let b: BTreeSet<usize> = test.iter().copied().collect();
        assert!(a.is_disjoint(&b));
        assert_eq!(a.len() + b.len(), n);
        assert_eq!(a.union(&b).copied().collect::<Vec<_>>(), (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn split_examples() {
    let ds = dataset(10, 1, &(0..10).map(f64::from).collect::<Vec<_>>(), Task::Regression);
    let spec = SplitSpec::Random {
        test_fraction: 0.3,
        seed: 42,
    };
    let (train, test) = split(&ds, &spec).unwrap();
    assert_eq!((train.n_rows(), test.n_rows()), (7, 3));
    assert_eq!(split(&ds, &spec).unwrap(), (train, test));
    assert!(split(&ds, &SplitSpec::Random { test_fraction: 0.01, seed: 1 }).is_err());
}

#[test]
fn single_row_subsample_is_uniform() {
    let n = 8;
    let ds = dataset(n, 1, &(0..n).map(|v| v as f64).collect::<Vec<_>>(), Task::Regression);
    let trials = 100_000;
    let mut counts = vec![0usize; n];
    for seed in 0..trials {
        let row = subsample(&ds, 1, seed as u64).unwrap();
        counts[row.x()[[0, 0]] as usize] += 1;
    }
    let p = 1.0 / n as f64;
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c as f64 - trials as f64 * p).abs() <= 5.0 * sd, "count {c}");
    }
}

#[test]
fn subsample_edges() {
    let ds = dataset(6, 2, &(0..12).map(f64::from).collect::<Vec<_>>(), Task::Regression);
    assert_eq!(subsample(&ds, 6, 3).unwrap(), ds);
    assert_eq!(subsample(&ds, 4, 3).unwrap(), subsample(&ds, 4, 3).unwrap());
    assert!(subsample(&ds, 0, 3).is_err());
    assert!(subsample(&ds, 7, 3).is_err());
}
