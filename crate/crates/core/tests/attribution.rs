use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use netrepr::attribution::{
    explain_rows, explain_rows_against, kernel_shap, rank_attributes, FnScorer, Scorer, ShapConfig, ShapMatrix,
};
use netrepr::learn::{MlpModel, Normalizer};
use netrepr::simplify::{LdaDirection, PipelineModel};

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn pipeline(inputs: usize, seed: u64) -> PipelineModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mlp = MlpModel::new(vec![inputs, 12, 6, 2], 0.01, seed).unwrap();
    let dir: Vec<f64> = (0..6).map(|_| -> f64 { StandardNormal.sample(&mut rng) }).collect();
    let norm = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
    PipelineModel {
        normalizer: Normalizer {
            names: (0..inputs).map(|j| format!("f{j}")).collect(),
            means: vec![0.0; inputs],
            stds: vec![1.0; inputs],
        },
        mlp,
        lda: LdaDirection {
            direction: dir.iter().map(|v| v / norm).collect(),
            offset: 0.1,
            gamma: 0.0,
            flipped: false,
        },
    }
}

fn names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("f{j}")).collect()
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn efficiency_on_random_pipelines(seed in 0u64..10_000, m in 1usize..=14) {
        let model = pipeline(m, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = normal_matrix(&mut rng, 6, m);
        let cfg = ShapConfig { background_cap: 8, seed, ..ShapConfig::default() };
        let shap = explain_rows(&model, &ids(6), &names(m), &x, &cfg).unwrap();
        prop_assert!(shap.efficiency_residual() < 1e-6);
        let scores = model.score_batch(&x).unwrap();
        for (o, s) in shap.outputs.iter().zip(&scores) {
            prop_assert!((o - s).abs() < 1e-12);
        }
    }

    #[test]
    fn ranking_is_sorted_and_complete(values in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 4), 1..20)) {
        let shap = ShapMatrix {
            instance_ids: ids(values.len()),
            attribute_names: vec!["d".into(), "c".into(), "b".into(), "a".into()],
            outputs: vec![0.0; values.len()],
            values,
            base_value: 0.0,
        };
        let r = rank_attributes(&shap);
        prop_assert_eq!(r.entries.len(), 4);
        for w in r.entries.windows(2) {
            prop_assert!(w[0].mean_abs_shap > w[1].mean_abs_shap
                || (w[0].mean_abs_shap == w[1].mean_abs_shap && w[0].name < w[1].name));
        }
    }
}

#[test]
fn seeded_runs_are_identical() {
    let model = pipeline(14, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = normal_matrix(&mut rng, 10, 14);
    let cfg = ShapConfig {
        background_cap: 5,
        seed: 9,
        ..ShapConfig::default()
    };
    let a = explain_rows(&model, &ids(10), &names(14), &x, &cfg).unwrap();
    let b = explain_rows(&model, &ids(10), &names(14), &x, &cfg).unwrap();
    assert_eq!(a, b);
}

fn ignores_attribute_five(m: usize, seed: u64) -> (impl Scorer, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let scorer = FnScorer::new(m, move |x: &[f64]| {
        let mut s = 0.0;
        for j in (0..m).filter(|&j| j != 5) {
            s += weights[j] * x[j];
        }
        s.tanh() + 0.3 * (x[0] * x[1]).sin()
    });
    (scorer, rng)
}

#[test]
fn ignored_attribute_gets_nothing_under_sampling() {
    // with 10 features the default budget reaches every coalition through
    // the sampler's complete-size path
    let (scorer, mut rng) = ignores_attribute_five(10, 21);
    let bg = normal_matrix(&mut rng, 20, 10);
    let cfg = ShapConfig {
        exact_max_features: 0,
        ..ShapConfig::default()
    };
    for _ in 0..5 {
        let x: Vec<f64> = (0..10).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); 2.0 * z }).collect();
        let e = kernel_shap(&scorer, &x, &bg, &cfg, &mut rng).unwrap();
        assert!(e.phi[5].abs() < 1e-3, "phi = {}", e.phi[5]);
    }
}

/// Genuine sampling (14 features, 2048 coalitions) leaves Monte Carlo noise
/// on the ignored attribute; it stays small next to the real attributions.
#[test]
fn ignored_attribute_stays_small_when_sampled() {
    let (scorer, mut rng) = ignores_attribute_five(14, 21);
    let bg = normal_matrix(&mut rng, 20, 14);
    let cfg = ShapConfig::default();
    for _ in 0..5 {
        let x: Vec<f64> = (0..14).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); 2.0 * z }).collect();
        let e = kernel_shap(&scorer, &x, &bg, &cfg, &mut rng).unwrap();
        let largest = e.phi.iter().fold(0.0f64, |a, p| a.max(p.abs()));
        assert!(e.phi[5].abs() < 0.02 * largest, "phi = {} next to {largest}", e.phi[5]);
    }
}

/// With 14 features a 2048-coalition budget cannot enumerate every subset
/// size, so the sampler really samples. Its estimates must stay close to
/// exact enumeration relative to the size of the attributions.
#[test]
fn sampled_regime_tracks_exact_enumeration() {
    let m = 14;
    let model = pipeline(m, 77);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let x = normal_matrix(&mut rng, 8, m);
    let bg = normal_matrix(&mut rng, 15, m);
    let exact = ShapConfig {
        exact_max_features: 14,
        ..ShapConfig::default()
    };
    let sampled = ShapConfig {
        exact_max_features: 12,
        n_samples: 2048,
        seed: 5,
        ..ShapConfig::default()
    };
    let a = explain_rows_against(&model, &ids(8), &names(m), &x, &bg, &exact).unwrap();
    let b = explain_rows_against(&model, &ids(8), &names(m), &x, &bg, &sampled).unwrap();
    let mut diff = 0.0;
    let mut scale = 0.0;
    for (ra, rb) in a.values.iter().zip(&b.values) {
        for (p, q) in ra.iter().zip(rb) {
            diff += (p - q).abs();
            scale += p.abs();
        }
    }
    let relative = diff / scale;
    assert!(b.efficiency_residual() < 1e-6);
    assert!(relative < 0.05, "relative MAD {relative}");
    assert_eq!(
        rank_attributes(&a).names()[..3],
        rank_attributes(&b).names()[..3],
        "top attributes differ"
    );
}
