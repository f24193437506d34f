use segval_core::cart::{grow, predict_tree, GrowthControls};
use segval_core::dataset::{synth_deals, synth_schema, Cell, SynthConfig};
use segval_core::report::{render_block_scorecard, render_segment_scorecard};
use segval_core::scorecard::{compose_meta, fit_staged, tree_to_scorecard, BlockAssignment, Condition};
use segval_core::{DataTable, Transform};

fn deals(n: usize, seed: u64, missing: f64) -> DataTable {
    let config = SynthConfig {
        n,
        missing_revenue: missing,
        ..SynthConfig::default()
    };
    synth_deals(&config, seed)
        .unwrap()
        .apply_transforms(&synth_schema(&config))
        .unwrap()
}

fn r2(y: &[f64], fitted: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    let tss: f64 = y.iter().map(|v| (v - m).powi(2)).sum();
    let rss: f64 = y.iter().zip(fitted).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - rss / tss
}

#[test]
fn staged_composition_does_not_lower_fit() {
    let t = deals(400, 3, 0.0);
    let startup = BlockAssignment {
        non_financial: vec!["sector".into()],
        financial: vec!["ln_revenue".into()],
        deal_characteristics: vec![],
    };
    let deal = BlockAssignment {
        deal_characteristics: vec!["ln_beta".into(), "crp".into(), "country".into()],
        ..BlockAssignment::default()
    };
    let staged = fit_staged(&t, "ln_valuation", &startup, &deal).unwrap();
    let y = t.column("ln_valuation").unwrap().numeric_values().unwrap().to_vec();
    let mut stage1 = Vec::new();
    let mut composed = Vec::new();
    for r in 0..t.n_rows() {
        let rec = t.record(r);
        let m = compose_meta(&staged.startup, &staged.deal, &rec).unwrap();
        stage1.push(m.startup_score);
        composed.push(m.value);
        assert!((m.back_transformed - m.value.exp()).abs() <= 1e-9 * m.back_transformed);
    }
    assert!(r2(&y, &composed) >= r2(&y, &stage1) - 1e-12);
    assert!(render_block_scorecard(&staged.startup).contains("financial"));
}

#[test]
fn overlapping_blocks_are_rejected() {
    let t = deals(50, 1, 0.0);
    let blocks = BlockAssignment {
        financial: vec!["ln_revenue".into()],
        deal_characteristics: vec!["revenue".into()],
        ..BlockAssignment::default()
    };
    assert!(segval_core::scorecard::fit_block_scorecard(&t, "ln_valuation", &blocks).is_err());
}

#[test]
fn segments_flag_missing_routes_and_unknown_levels() {
    let t = deals(300, 8, 0.15);
    let controls = GrowthControls {
        cp_min: 0.005,
        ..GrowthControls::default()
    };
    let tree = grow(&t, "ln_valuation", &["ln_revenue", "sector"], &controls).unwrap();
    let card = tree_to_scorecard(&tree, Transform::NaturalLog);
    let mut rec = t.record(0);
    rec.insert("ln_revenue".into(), Cell::Missing);
    rec.insert("sector".into(), Cell::Level("never_seen".into()));
    let direct = predict_tree(&tree, &rec).unwrap();
    assert!(direct.flagged());
    let seg = card.find(&rec).unwrap().unwrap();
    assert_eq!(seg.leaf, direct.leaf);
    assert!(seg.rule.iter().all(|c| match c {
        Condition::Numeric { missing, .. } => *missing,
        Condition::Categorical { unknown, .. } => *unknown,
    }));
    for s in &card.segments {
        assert!((s.predicted_valuation_eur - s.predicted.exp()).abs() <= 1e-9 * s.predicted_valuation_eur);
    }
    let text = render_segment_scorecard(&card);
    assert_eq!(text.lines().take_while(|l| !l.is_empty()).count(), card.segments.len() + 1);
}
