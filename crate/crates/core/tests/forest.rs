mod common;

use common::table;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segval_core::cart::{grow, predict_tree, GrowthControls};
use segval_core::forest::{fit_forest, predict_forest, Bootstrap, ForestConfig, ForestModel};
use segval_core::Error;

fn noisy_table(n: usize, seed: u64) -> segval_core::DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0).collect();
    let x1: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let y: Vec<f64> = (0..n).map(|i| x0[i].floor() * 2.0 + x1[i] + rng.random::<f64>()).collect();
    let c: Vec<Option<String>> = (0..n).map(|i| Some(format!("k{}", i % 3))).collect();
    table(
        &y,
        &[x0.iter().map(|&v| Some(v)).collect(), x1.iter().map(|&v| Some(v)).collect()],
        &[c],
    )
}

#[test]
fn config_is_echoed() {
    let t = noisy_table(200, 1);
    let model = fit_forest(&t, "y", &["x0", "x1", "c0"], &ForestConfig::new(25, 2, 4)).unwrap();
    assert_eq!((model.n_trees, model.mtry, model.seed), (25, 2, 4));
    assert_eq!(model.trees.len(), 25);
    assert_eq!(model.oob_scored + model.oob_skipped, 200);
    assert!(model.pct_var_explained > 50.0);
}

#[test]
fn identity_bootstrap_with_all_predictors_is_a_single_tree() {
    let t = noisy_table(120, 2);
    let mut config = ForestConfig::new(3, 3, 9);
    config.bootstrap = Bootstrap::Identity;
    let model = fit_forest(&t, "y", &["x0", "x1", "c0"], &config).unwrap();
    let single = grow(
        &t,
        "y",
        &["x0", "x1", "c0"],
        &GrowthControls {
            cp_min: 0.0,
            ..config.controls.clone()
        },
    )
    .unwrap();
    for r in 0..t.n_rows() {
        let rec = t.record(r);
        let (a, b) = (predict_forest(&model, &rec).unwrap(), predict_tree(&single, &rec).unwrap().value);
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
    assert_eq!(model.oob_scored, 0);
}

#[test]
fn trees_do_not_depend_on_ensemble_size() {
    let t = noisy_table(150, 3);
    let small = fit_forest(&t, "y", &["x0", "x1", "c0"], &ForestConfig::new(5, 1, 12)).unwrap();
    let large = fit_forest(&t, "y", &["x0", "x1", "c0"], &ForestConfig::new(9, 1, 12)).unwrap();
    assert_eq!(small.trees[..], large.trees[..5]);
    assert_eq!(small.bootstrap[..], large.bootstrap[..5]);
}

#[test]
fn cardinality_limit() {
    let n = 116;
    let y: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let city: Vec<Option<String>> = (0..n).map(|i| Some(format!("city_{}", i % 58))).collect();
    let t = table(&y, &[], &[city]);
    let err = fit_forest(&t, "y", &["c0"], &ForestConfig::new(10, 1, 1)).unwrap_err();
    assert!(matches!(
        err,
        Error::Cardinality {
            levels: 58,
            limit: 53,
            ..
        }
    ));
    assert!(err.to_string().contains("53"));

    let mut raised = ForestConfig::new(10, 1, 1);
    raised.max_categories = 60;
    let model = fit_forest(&t, "y", &["c0"], &raised).unwrap();
    assert_eq!(model.warnings.len(), 1);
}

#[test]
fn invalid_mtry() {
    let t = noisy_table(50, 4);
    for mtry in [0, 4] {
        assert!(matches!(
            fit_forest(&t, "y", &["x0", "x1", "c0"], &ForestConfig::new(10, mtry, 1)),
            Err(Error::Config(_))
        ));
    }
    assert!(matches!(
        fit_forest(&t, "y", &["x0"], &ForestConfig::new(0, 1, 1)),
        Err(Error::Config(_))
    ));
}

#[test]
fn pure_noise_may_explain_negative_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 150;
    let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let x: Vec<Option<f64>> = (0..n).map(|_| Some(rng.random())).collect();
    let t = table(&y, &[x], &[]);
    let model = fit_forest(&t, "y", &["x0"], &ForestConfig::new(50, 1, 5)).unwrap();
    assert!(model.pct_var_explained < 20.0);
    assert!(model.pct_var_explained.is_finite());
}

#[test]
fn json_round_trip() {
    let t = noisy_table(80, 6);
    let model = fit_forest(&t, "y", &["x0", "x1", "c0"], &ForestConfig::new(4, 2, 2)).unwrap();
    let back = ForestModel::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(back, model);
    assert_eq!(back.predict_table(&t).unwrap(), model.predict_table(&t).unwrap());
}
