//! Bagged regression trees with per-split variable subsampling.
//!
//! Tree `i` draws its bootstrap sample and its split candidates from a ChaCha
//! stream keyed by `(seed, i)`, so a model does not depend on how trees are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cart::{
    back_transform, grow_rows, resolve_record, FeatureRow, Features, GrowthControls, PredictorKind,
    RegressionTree, Subsample, TrainingSet, TreeNode, TREE_SCHEMA_VERSION,
};
use crate::dataset::{DataTable, Record, Transform};
use crate::error::{Error, Result};

/// Default cap on categorical cardinality.
pub const DEFAULT_MAX_CATEGORIES: usize = 53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bootstrap {
    /// n draws with replacement.
    #[default]
    Resample,
    /// Every tree sees each row exactly once (no out-of-bag rows).
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub mtry: usize,
    pub seed: u64,
    #[serde(default)]
    pub controls: GrowthControls,
    #[serde(default = "default_max_categories")]
    pub max_categories: usize,
    #[serde(default)]
    pub bootstrap: Bootstrap,
}

fn default_max_categories() -> usize {
    DEFAULT_MAX_CATEGORIES
}

impl ForestConfig {
    pub fn new(n_trees: usize, mtry: usize, seed: u64) -> Self {
        Self {
            n_trees,
            mtry,
            seed,
            controls: GrowthControls {
                minsplit: 10,
                minbucket: 5,
                ..GrowthControls::default()
            },
            max_categories: DEFAULT_MAX_CATEGORIES,
            bootstrap: Bootstrap::Resample,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OobStats {
    pub oob_mse: f64,
    pub pct_var_explained: f64,
    /// Rows with at least one out-of-bag tree.
    pub scored: usize,
    /// Rows that were in every bootstrap sample.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_trees: usize,
    pub mtry: usize,
    pub seed: u64,
    pub max_categories: usize,
    pub response: String,
    pub response_transform: Transform,
    pub trees: Vec<RegressionTree>,
    /// Bootstrap row indices per tree.
    pub bootstrap: Vec<Vec<u32>>,
    pub oob_mse: f64,
    pub pct_var_explained: f64,
    pub oob_scored: usize,
    pub oob_skipped: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

fn tree_stream(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

fn constant_tree(data: &TrainingSet, rows: &[usize], controls: &GrowthControls) -> RegressionTree {
    let mean = rows.iter().map(|&r| data.y[r]).sum::<f64>() / rows.len() as f64;
    RegressionTree {
        schema_version: TREE_SCHEMA_VERSION,
        response: data.response.clone(),
        response_transform: data.response_transform,
        predictors: data.features.predictors.clone(),
        controls: controls.clone(),
        nodes: vec![TreeNode {
            prediction: mean,
            n: rows.len(),
            sse: 0.0,
            depth: 0,
            split: None,
        }],
    }
}

/// Fits `config.n_trees` unpruned trees on bootstrap samples and scores them out of bag.
pub fn fit_forest<S: AsRef<str>>(
    table: &DataTable,
    response: &str,
    predictors: &[S],
    config: &ForestConfig,
) -> Result<ForestModel> {
    if config.n_trees < 1 {
        return Err(Error::Config("n_trees must be at least 1".into()));
    }
    let p = predictors.len();
    if config.mtry < 1 || config.mtry > p {
        return Err(Error::Config(format!(
            "mtry {} outside 1..={p}",
            config.mtry
        )));
    }
    let mut warnings = Vec::new();
    if config.max_categories > DEFAULT_MAX_CATEGORIES {
        warnings.push(format!(
            "max_categories raised to {} (default {DEFAULT_MAX_CATEGORIES})",
            config.max_categories
        ));
    }
    for name in predictors {
        let col = table.column(name.as_ref())?;
        if col.levels().is_some() {
            let levels = col.observed_levels().len();
            if levels > config.max_categories {
                return Err(Error::Cardinality {
                    variable: col.name.clone(),
                    levels,
                    limit: config.max_categories,
                });
            }
        }
    }
    let member = GrowthControls {
        cp_min: 0.0,
        ..config.controls.clone()
    };
    member.validate()?;
    let data = TrainingSet::from_table(table, response, predictors)?;
    let n = data.n();

    let grown: Vec<Result<(RegressionTree, Vec<u32>)>> = (0..config.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = tree_stream(config.seed, i);
            let rows: Vec<usize> = match config.bootstrap {
                Bootstrap::Resample => (0..n).map(|_| rng.random_range(0..n)).collect(),
                Bootstrap::Identity => (0..n).collect(),
            };
            let bag: Vec<u32> = rows.iter().map(|&r| r as u32).collect();
            let tree = match grow_rows(
                &data,
                rows.clone(),
                &member,
                Some(Subsample {
                    mtry: config.mtry,
                    rng: &mut rng,
                }),
            ) {
                Ok(t) => t,
                Err(Error::DegenerateResponse(_)) => constant_tree(&data, &rows, &member),
                Err(e) => return Err(e),
            };
            Ok((tree, bag))
        })
        .collect();
    let mut trees = Vec::with_capacity(config.n_trees);
    let mut bootstrap = Vec::with_capacity(config.n_trees);
    for g in grown {
        let (t, b) = g?;
        trees.push(t);
        bootstrap.push(b);
    }

    let mut model = ForestModel {
        n_trees: config.n_trees,
        mtry: config.mtry,
        seed: config.seed,
        max_categories: config.max_categories,
        response: data.response.clone(),
        response_transform: data.response_transform,
        trees,
        bootstrap,
        oob_mse: f64::NAN,
        pct_var_explained: f64::NAN,
        oob_scored: 0,
        oob_skipped: n,
        warnings,
    };
    if config.bootstrap == Bootstrap::Resample {
        let stats = oob_stats(&model, table, response)?;
        model.oob_mse = stats.oob_mse;
        model.pct_var_explained = stats.pct_var_explained;
        model.oob_scored = stats.scored;
        model.oob_skipped = stats.skipped;
    }
    Ok(model)
}

/// Out-of-bag error on the training table: each row is predicted by the
/// trees whose bootstrap sample missed it.
pub fn oob_stats(model: &ForestModel, table: &DataTable, response: &str) -> Result<OobStats> {
    let rcol = table.numeric(response)?;
    if let Some(row) = rcol.missing.iter().position(|&m| m) {
        return Err(Error::MissingResponse(row + 1));
    }
    let y = rcol.numeric_values().expect("numeric");
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return Err(Error::DegenerateResponse(format!(
            "\"{}\" has zero variance",
            rcol.name
        )));
    }
    let features = Features::for_model(table, &model.trees[0].predictors)?;
    let in_bag: Vec<Vec<bool>> = model
        .bootstrap
        .iter()
        .map(|bag| {
            let mut m = vec![false; n];
            for &r in bag {
                if (r as usize) < n {
                    m[r as usize] = true;
                }
            }
            m
        })
        .collect();

    let preds: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let row = FeatureRow {
                features: &features,
                row: r,
            };
            let (mut sum, mut count) = (0.0, 0usize);
            for (tree, bag) in model.trees.iter().zip(&in_bag) {
                if !bag[r] {
                    sum += tree.predict_values(&row);
                    count += 1;
                }
            }
            (count > 0).then(|| sum / count as f64)
        })
        .collect();

    let (mut sse, mut scored) = (0.0, 0usize);
    for (p, &yv) in preds.iter().zip(y) {
        if let Some(p) = p {
            sse += (yv - p).powi(2);
            scored += 1;
        }
    }
    if scored == 0 {
        return Err(Error::InsufficientData("no row is out of bag for any tree".into()));
    }
    let oob_mse = sse / scored as f64;
    Ok(OobStats {
        oob_mse,
        pct_var_explained: 100.0 * (1.0 - oob_mse / var),
        scored,
        skipped: n - scored,
    })
}

/// Mean of member-tree predictions, in tree order.
pub fn predict_forest(model: &ForestModel, record: &Record) -> Result<f64> {
    let resolved = resolve_record(&model.trees[0].predictors, record)?;
    let total: f64 = model.trees.iter().map(|t| t.predict_values(&resolved)).sum();
    Ok(total / model.trees.len() as f64)
}

impl ForestModel {
    pub fn predictor_kinds(&self) -> Vec<(String, PredictorKind)> {
        self.trees[0]
            .predictors
            .iter()
            .map(|p| (p.name.clone(), p.kind))
            .collect()
    }

    pub fn back_transform(&self, value: f64) -> f64 {
        back_transform(value, self.response_transform)
    }

    /// Predictions for every row of `table`.
    pub fn predict_table(&self, table: &DataTable) -> Result<Vec<f64>> {
        let features = Features::for_model(table, &self.trees[0].predictors)?;
        Ok((0..table.n_rows())
            .into_par_iter()
            .map(|r| {
                let row = FeatureRow {
                    features: &features,
                    row: r,
                };
                self.trees.iter().map(|t| t.predict_values(&row)).sum::<f64>() / self.trees.len() as f64
            })
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<ForestModel> {
        let m: ForestModel = serde_json::from_str(text)?;
        if m.trees.is_empty() {
            return Err(Error::Schema("forest has no trees".into()));
        }
        Ok(m)
    }
}
