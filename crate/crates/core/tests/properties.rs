mod common;

use common::{names, table};
use proptest::prelude::*;
use segval_core::cart::{cp_table, grow, predict_tree, variable_importance, GrowthControls};
use segval_core::dataset::DataTable;
use segval_core::linmod::{encode_design, fit_ols};
use segval_core::scorecard::tree_to_scorecard;

/// Rows of (y, x0, x1, category code) with some missing x0 cells.
fn rows() -> impl Strategy<Value = Vec<(f64, Option<f64>, f64, u8)>> {
    prop::collection::vec(
        (
            -50.0..50.0f64,
            prop::option::weighted(0.9, -10.0..10.0f64),
            0.0..1.0f64,
            0u8..5,
        ),
        12..60,
    )
}

fn to_table(rows: &[(f64, Option<f64>, f64, u8)]) -> DataTable {
    let y: Vec<f64> = rows.iter().map(|r| r.0).collect();
    table(
        &y,
        &[
            rows.iter().map(|r| r.1).collect(),
            rows.iter().map(|r| Some(r.2)).collect(),
        ],
        &[rows.iter().map(|r| Some(format!("L{}", r.3))).collect()],
    )
}

fn controls() -> GrowthControls {
    GrowthControls {
        cp_min: 0.001,
        minsplit: 4,
        minbucket: 2,
        cv_folds: 3,
        ..GrowthControls::default()
    }
}

fn varies(rows: &[(f64, Option<f64>, f64, u8)]) -> bool {
    rows.iter().any(|r| r.0 != rows[0].0)
}

const PREDICTORS: [&str; 3] = ["x0", "x1", "c0"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cp_identity_holds(rows in rows()) {
        prop_assume!(varies(&rows));
        let t = to_table(&rows);
        let tree = grow(&t, "y", &PREDICTORS, &controls()).unwrap();
        let cp = cp_table(&tree, &t, &controls()).unwrap();
        prop_assert!(cp.identity_residual() < 1e-9);
        prop_assert_eq!(cp.rows[0].nsplit, 0);
        prop_assert_eq!(cp.rows[0].rel_error, 1.0);
        prop_assert!(cp.rows.windows(2).all(|w| w[1].rel_error < w[0].rel_error));
        prop_assert!(cp.rows.iter().all(|r| r.xerror >= 0.0 && r.xstd >= 0.0));
    }

    #[test]
    fn leaves_respect_minbucket_and_conserve_mean(rows in rows()) {
        prop_assume!(varies(&rows));
        let complete: Vec<_> = rows.iter().map(|r| (r.0, Some(r.1.unwrap_or(0.0)), r.2, r.3)).collect();
        let t = to_table(&complete);
        let tree = grow(&t, "y", &PREDICTORS, &controls()).unwrap();
        let n = complete.len() as f64;
        let mean = complete.iter().map(|r| r.0).sum::<f64>() / n;
        let weighted: f64 = tree.leaves().map(|(_, l)| l.prediction * l.n as f64).sum::<f64>() / n;
        prop_assert!((weighted - mean).abs() < 1e-9 * (1.0 + mean.abs()));
        prop_assert!(tree.leaves().all(|(_, l)| l.n >= 2));
        prop_assert_eq!(tree.leaves().map(|(_, l)| l.n).sum::<usize>(), complete.len());
    }

    #[test]
    fn predictions_are_piecewise_constant(rows in rows()) {
        prop_assume!(varies(&rows));
        let t = to_table(&rows);
        let tree = grow(&t, "y", &PREDICTORS, &controls()).unwrap();
        let mut values: Vec<u64> = (0..t.n_rows())
            .map(|r| predict_tree(&tree, &t.record(r)).unwrap().value.to_bits())
            .collect();
        values.sort_unstable();
        values.dedup();
        prop_assert!(values.len() <= tree.n_leaves());
    }

    #[test]
    fn permuting_rows_keeps_predictions(rows in rows(), rot in 1usize..11) {
        prop_assume!(varies(&rows));
        let t = to_table(&rows);
        let mut shifted = rows.clone();
        shifted.rotate_left(rot % rows.len());
        let u = to_table(&shifted);
        let a = grow(&t, "y", &PREDICTORS, &controls()).unwrap();
        let b = grow(&u, "y", &PREDICTORS, &controls()).unwrap();
        prop_assert_eq!(a.n_leaves(), b.n_leaves());
        for r in 0..t.n_rows() {
            let record = t.record(r);
            let pa = predict_tree(&a, &record).unwrap().value;
            let pb = predict_tree(&b, &record).unwrap().value;
            prop_assert!((pa - pb).abs() < 1e-9 * (1.0 + pa.abs()));
        }
    }

    #[test]
    fn importance_sums_to_100(rows in rows()) {
        prop_assume!(varies(&rows));
        let t = to_table(&rows);
        let tree = grow(&t, "y", &PREDICTORS, &controls()).unwrap();
        let imp = variable_importance(&tree);
        if tree.n_splits() == 0 {
            prop_assert!(imp.is_empty());
        } else {
            prop_assert_eq!(imp.iter().map(|i| i.score).sum::<u32>(), 100);
        }
    }

    #[test]
    fn segment_scorecard_reproduces_tree(rows in rows()) {
        prop_assume!(varies(&rows));
        let t = to_table(&rows);
        let tree = grow(&t, "y", &PREDICTORS, &controls()).unwrap();
        let card = tree_to_scorecard(&tree, tree.response_transform);
        prop_assert_eq!(card.segments.len(), tree.n_leaves());
        for r in 0..t.n_rows() {
            let record = t.record(r);
            let direct = predict_tree(&tree, &record).unwrap();
            let seg = card.find(&record).unwrap().unwrap();
            prop_assert_eq!(seg.leaf, direct.leaf);
            prop_assert_eq!(seg.predicted.to_bits(), direct.value.to_bits());
        }
    }

    #[test]
    fn adding_a_predictor_never_lowers_r2(
        data in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64), 8..40)
    ) {
        let y: Vec<f64> = data.iter().map(|r| r.0).collect();
        let xs: Vec<Vec<Option<f64>>> = (0..3)
            .map(|j| data.iter().map(|r| Some([r.1, r.2, r.3][j])).collect())
            .collect();
        let t = table(&y, &xs, &[]);
        let all = names("x", 3);
        let mut last = 0.0;
        for k in 1..=3 {
            let fit = fit_ols(&encode_design(&t, "y", &all[..k], &[] as &[&str]).unwrap()).unwrap();
            prop_assert!(fit.r2 >= last - 1e-10);
            prop_assert!(fit.r2 <= 1.0 + 1e-12);
            last = fit.r2;
        }
    }
}
