use anyhow::{bail, Context, Result};
use segval_core::cart::{cp_table, grow, prune_at};
use segval_core::forest::{fit_forest, ForestConfig};
use segval_core::linmod::{encode_design, fit_fixed_effects, fit_ols, joint_category};
use segval_core::report::ComparisonRow;
use segval_core::scorecard::{compose_meta, fit_block_scorecard, fit_staged, tree_to_scorecard, StagedModel};
use segval_core::{
    BlockScorecard, CpTable, DataTable, FixedEffectsFit, ForestModel, LinearFit, RegressionTree, Schema,
    SegmentScorecard,
};

use crate::config::{Family, ModelSpec, Prune, RunConfig};

pub fn response(spec: &ModelSpec, schema: &Schema) -> String {
    spec.response.clone().unwrap_or_else(|| schema.response().name.clone())
}

fn context(spec: &ModelSpec) -> String {
    format!("model \"{}\"", spec.name)
}

pub fn fit_ols_model(table: &DataTable, schema: &Schema, spec: &ModelSpec) -> Result<LinearFit> {
    let resp = response(spec, schema);
    let fit = (|| {
        let mut used = vec![resp.as_str()];
        used.extend(spec.all_predictors());
        let complete = table.complete_cases(&used)?;
        fit_ols(&encode_design(&complete, &resp, &spec.predictors, &spec.categoricals)?)
    })();
    fit.with_context(|| context(spec))
}

pub fn fit_fe_model(table: &DataTable, schema: &Schema, spec: &ModelSpec) -> Result<FixedEffectsFit> {
    let resp = response(spec, schema);
    let fit = (|| {
        if spec.group.is_empty() {
            return Err(segval_core::Error::Config("fixed_effects needs a \"group\" list".into()));
        }
        if spec.group.len() == 1 {
            return fit_fixed_effects(table, &resp, &spec.predictors, &spec.group[0]);
        }
        let joint = joint_category(table, &spec.group)?;
        let name = joint.name.clone();
        fit_fixed_effects(&table.with_column(joint)?, &resp, &spec.predictors, &name)
    })();
    fit.with_context(|| context(spec))
}

/// A grown tree, its CP table and the subtree kept by the model's prune rule.
pub struct TreeRun {
    pub grown: RegressionTree,
    pub cp: CpTable,
    pub kept: RegressionTree,
}

pub fn fit_tree_model(table: &DataTable, schema: &Schema, spec: &ModelSpec, seed: u64) -> Result<TreeRun> {
    let resp = response(spec, schema);
    let run = (|| -> Result<TreeRun> {
        let mut controls = spec.controls.clone().unwrap_or_default();
        controls.seed = seed;
        let grown = grow(table, &resp, &spec.all_predictors(), &controls)?;
        let cp = cp_table(&grown, table, &controls)?;
        let kept = match spec.prune {
            Prune::None => grown.clone(),
            Prune::MinXerror => prune_at(&grown, cp.min_xerror_cp()),
            Prune::Cp(c) => {
                if !(0.0..=1.0).contains(&c) {
                    bail!("prune cp {c} is outside [0, 1]");
                }
                prune_at(&grown, c)
            }
        };
        Ok(TreeRun { grown, cp, kept })
    })();
    run.with_context(|| context(spec))
}

pub fn fit_forest_model(table: &DataTable, schema: &Schema, spec: &ModelSpec, seed: u64) -> Result<ForestModel> {
    let resp = response(spec, schema);
    let predictors = spec.all_predictors();
    let mut config = ForestConfig::new(
        spec.n_trees.unwrap_or(500),
        spec.mtry.unwrap_or((predictors.len() / 3).max(1)),
        seed,
    );
    if let Some(controls) = &spec.controls {
        config.controls = controls.clone();
    }
    if let Some(limit) = spec.max_categories {
        config.max_categories = limit;
    }
    fit_forest(table, &resp, &predictors, &config).with_context(|| context(spec))
}

pub enum ScorecardFit {
    Block(BlockScorecard),
    Staged(StagedModel),
    Segments(SegmentScorecard, RegressionTree),
}

pub fn fit_scorecard_model(
    table: &DataTable,
    schema: &Schema,
    config: &RunConfig,
    spec: &ModelSpec,
    seed: Option<u64>,
) -> Result<ScorecardFit> {
    if let Some(tree_name) = &spec.tree {
        let tree_spec = config.model(tree_name).expect("validated reference");
        let seed = seed.context(crate::commands::SEED_REQUIRED)?;
        let run = fit_tree_model(table, schema, tree_spec, seed)?;
        let card = tree_to_scorecard(&run.kept, run.kept.response_transform);
        return Ok(ScorecardFit::Segments(card, run.kept));
    }
    let resp = response(spec, schema);
    let blocks = spec
        .blocks
        .as_ref()
        .with_context(|| format!("{} needs \"blocks\" or \"tree\"", context(spec)))?;
    let fit = match &spec.deal_blocks {
        Some(deal) => fit_staged(table, &resp, blocks, deal).map(ScorecardFit::Staged),
        None => fit_block_scorecard(table, &resp, blocks).map(ScorecardFit::Block),
    };
    fit.with_context(|| context(spec))
}

/// R² of the composed staged estimate over rows both stages can score.
fn staged_r2(table: &DataTable, resp: &str, staged: &StagedModel) -> Result<(f64, usize)> {
    let y = table.numeric(resp)?;
    let mut pairs = Vec::new();
    for r in 0..table.n_rows() {
        let Some(v) = y.value(r) else { continue };
        if let Ok(m) = compose_meta(&staged.startup, &staged.deal, &table.record(r)) {
            pairs.push((v, m.value));
        }
    }
    if pairs.len() < 2 {
        bail!("staged scorecard scores fewer than two rows");
    }
    let mean = pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len() as f64;
    let tss: f64 = pairs.iter().map(|p| (p.0 - mean).powi(2)).sum();
    let rss: f64 = pairs.iter().map(|p| (p.0 - p.1).powi(2)).sum();
    Ok((1.0 - rss / tss, pairs.len()))
}

/// Fits one model of any family and summarises it for ranking.
pub fn comparison_row(
    table: &DataTable,
    schema: &Schema,
    config: &RunConfig,
    spec: &ModelSpec,
    seed: Option<u64>,
) -> Result<ComparisonRow> {
    let name = spec.name.as_str();
    Ok(match spec.family {
        Family::Ols => ComparisonRow::ols(name, &fit_ols_model(table, schema, spec)?),
        Family::FixedEffects => ComparisonRow::fixed_effects(name, &fit_fe_model(table, schema, spec)?),
        Family::Cart => {
            let seed = seed.context(crate::commands::SEED_REQUIRED)?;
            ComparisonRow::cart(name, &fit_tree_model(table, schema, spec, seed)?.kept)
        }
        Family::Forest => {
            let seed = seed.context(crate::commands::SEED_REQUIRED)?;
            ComparisonRow::forest(name, &fit_forest_model(table, schema, spec, seed)?)
        }
        Family::Scorecard => match fit_scorecard_model(table, schema, config, spec, seed)? {
            ScorecardFit::Block(card) => {
                ComparisonRow::scorecard(name, card.fit.as_ref().expect("fitted scorecard keeps its fit"))
            }
            ScorecardFit::Staged(staged) => {
                // categories are taken from stage 1; the fit is that of the composed estimate
                let mut row =
                    ComparisonRow::scorecard(name, staged.startup.fit.as_ref().expect("fitted scorecard keeps its fit"));
                (row.fit, row.n) = staged_r2(table, &staged.startup.response, &staged)?;
                row
            }
            ScorecardFit::Segments(_, tree) => {
                let mut row = ComparisonRow::cart(name, &tree);
                row.family = segval_core::report::ModelFamily::Scorecard;
                row
            }
        },
    })
}
