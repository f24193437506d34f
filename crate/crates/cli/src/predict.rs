use anyhow::{bail, Context, Result};
use segval_core::cart::{back_transform, predict_tree};
use segval_core::forest::predict_forest;
use segval_core::linmod::TermSource;
use segval_core::scorecard::{compose_meta, StagedModel};
use segval_core::{
    BlockScorecard, Cell, FixedEffectsFit, ForestModel, LinearFit, Record, RegressionTree, SegmentScorecard,
    Transform,
};
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

/// Any model file the fit commands write.
pub enum SavedModel {
    Tree(RegressionTree),
    Forest(ForestModel),
    Segments(SegmentScorecard),
    Staged(StagedModel),
    Block(BlockScorecard),
    /// Slopes only; validated on load but not scorable.
    FixedEffects,
    Linear(LinearFit),
}

fn parse<T: DeserializeOwned>(value: Value) -> Result<T> {
    Ok(serde_json::from_value(value)?)
}

impl SavedModel {
    /// Recognises the model kind by its top-level keys.
    pub fn from_json(text: &str) -> Result<SavedModel> {
        let value: Value = serde_json::from_str(text)?;
        let Some(obj) = value.as_object() else {
            bail!("model file is not a JSON object");
        };
        let has = |k: &str| obj.contains_key(k);
        Ok(if has("nodes") {
            SavedModel::Tree(RegressionTree::from_json(text)?)
        } else if has("trees") {
            SavedModel::Forest(parse(value)?)
        } else if has("segments") {
            SavedModel::Segments(parse(value)?)
        } else if has("startup") && has("deal") {
            SavedModel::Staged(parse(value)?)
        } else if has("non_financial") {
            SavedModel::Block(parse(value)?)
        } else if has("group_var") {
            parse::<FixedEffectsFit>(value)?;
            SavedModel::FixedEffects
        } else if has("coefficients") {
            SavedModel::Linear(parse(value)?)
        } else {
            bail!("unrecognised model file")
        })
    }

    pub fn tree(self) -> Result<RegressionTree> {
        match self {
            SavedModel::Tree(t) => Ok(t),
            _ => bail!("this command needs a tree model"),
        }
    }
}

/// Adds `ln_x` for every raw `x` the record supplies, so linear models fitted
/// on logged columns can score raw EUR inputs.
fn with_logged(record: &Record, terms: &[TermSource]) -> Result<Record> {
    let mut out = record.clone();
    for term in terms {
        let Some(name) = term.variable() else { continue };
        if out.contains_key(name) {
            continue;
        }
        let Some(source) = name.strip_prefix("ln_") else { continue };
        match record.get(source) {
            Some(Cell::Number(v)) if *v > 0.0 => {
                out.insert(name.to_string(), Cell::Number(v.ln()));
            }
            Some(Cell::Number(v)) => bail!("cannot take natural_log of {source} = {v}"),
            _ => {}
        }
    }
    Ok(out)
}

fn linear_value(fit: &LinearFit, record: &Record) -> Result<f64> {
    let record = with_logged(record, &fit.terms)?;
    fit.predict(&record)
        .context("record is missing a value the linear model needs")
}

fn block_terms(card: &BlockScorecard) -> Vec<TermSource> {
    card.non_financial
        .iter()
        .chain(&card.financial)
        .chain(&card.deal_characteristics)
        .map(|t| t.term.clone())
        .collect()
}

fn guess_transform(response: &str) -> Transform {
    if response.starts_with("ln_") {
        Transform::NaturalLog
    } else {
        Transform::None
    }
}

/// Scores one record and returns the JSON report.
pub fn predict(model: &SavedModel, record: &Record) -> Result<Value> {
    let mut out = Map::new();
    let (kind, value, transform) = match model {
        SavedModel::Tree(tree) => {
            let p = predict_tree(tree, record)?;
            out.insert("leaf".into(), json!(p.leaf));
            out.insert("routed_missing".into(), json!(p.routed_missing));
            out.insert("unseen_levels".into(), json!(p.unseen_levels));
            out.insert("flagged".into(), json!(p.flagged()));
            ("cart", p.value, tree.response_transform)
        }
        SavedModel::Forest(forest) => ("forest", predict_forest(forest, record)?, forest.response_transform),
        SavedModel::Segments(card) => {
            let seg = card
                .find(record)?
                .context("record falls in no segment")?;
            out.insert("segment".into(), json!(seg.text));
            out.insert("leaf".into(), json!(seg.leaf));
            ("segment_scorecard", seg.predicted, card.response_transform)
        }
        SavedModel::Staged(staged) => {
            let mut terms = block_terms(&staged.startup);
            terms.extend(block_terms(&staged.deal));
            let m = compose_meta(&staged.startup, &staged.deal, &with_logged(record, &terms)?)?;
            out.insert("startup_score".into(), json!(m.startup_score));
            out.insert("deal_adjustment".into(), json!(m.deal_adjustment));
            ("staged_scorecard", m.value, staged.startup.response_transform)
        }
        SavedModel::Block(card) => {
            let scores = card.sub_scores(&with_logged(record, &block_terms(card))?)?;
            out.insert("sub_scores".into(), serde_json::to_value(scores)?);
            ("block_scorecard", scores.total(), card.response_transform)
        }
        SavedModel::FixedEffects => {
            bail!("fixed-effects fits hold slopes only and cannot score a record")
        }
        SavedModel::Linear(fit) => ("ols", linear_value(fit, record)?, guess_transform(&fit.response)),
    };
    out.insert("model".into(), json!(kind));
    out.insert("value".into(), json!(value));
    out.insert("valuation".into(), json!(back_transform(value, transform)));
    Ok(Value::Object(out))
}
