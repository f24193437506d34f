use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use super::controls::GrowthControls;
use super::features::{FeatureValues, TrainingSet, MISSING};
use super::prune::prune_at;
use super::split::{scan_categorical, scan_numeric, LevelStats};
use super::tree::{RegressionTree, Split, SplitRule, TreeNode, TREE_SCHEMA_VERSION};
use crate::dataset::DataTable;
use crate::error::{Error, Result};

/// Per-split variable subsampling for ensemble members.
pub(crate) struct Subsample<'a> {
    pub mtry: usize,
    pub rng: &'a mut ChaCha8Rng,
}

struct Candidate {
    variable: usize,
    rule: SplitRule,
    score: f64,
}

struct Grower<'a, 'r> {
    data: &'a TrainingSet,
    controls: &'a GrowthControls,
    min_gain: f64,
    floor: f64,
    subsample: Option<Subsample<'r>>,
    nodes: Vec<TreeNode>,
}

fn mean_sse(y: &[f64], rows: &[usize]) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|&r| y[r]).sum::<f64>() / n;
    let sse = rows.iter().map(|&r| (y[r] - mean).powi(2)).sum();
    (mean, sse)
}

impl Grower<'_, '_> {
    fn candidates(&mut self) -> Vec<usize> {
        let p = self.data.features.len();
        match &mut self.subsample {
            Some(s) if s.mtry < p => {
                let mut v = sample(s.rng, p, s.mtry).into_vec();
                v.sort_unstable();
                v
            }
            _ => (0..p).collect(),
        }
    }

    fn best_candidate(&mut self, rows: &[usize]) -> Option<Candidate> {
        let minbucket = self.controls.minbucket;
        let y = &self.data.y;
        let mut best: Option<Candidate> = None;
        for var in self.candidates() {
            let found = match &self.data.features.values[var] {
                FeatureValues::Numeric(x) => {
                    let mut pairs: Vec<(f64, f64)> = rows
                        .iter()
                        .filter(|&&r| !x[r].is_nan())
                        .map(|&r| (x[r], y[r]))
                        .collect();
                    scan_numeric(&mut pairs, minbucket).map(|s| Candidate {
                        variable: var,
                        rule: SplitRule::Numeric {
                            threshold: s.threshold,
                        },
                        score: s.improvement,
                    })
                }
                FeatureValues::Categorical(codes) => {
                    let k = self.data.features.predictors[var].levels.len();
                    let mut stats = vec![LevelStats::default(); k];
                    for &r in rows {
                        let c = codes[r];
                        if c != MISSING {
                            stats[c as usize].count += 1;
                            stats[c as usize].sum += y[r];
                        }
                    }
                    scan_categorical(&stats, minbucket).map(|s| Candidate {
                        variable: var,
                        rule: SplitRule::Categorical {
                            left: s.left.iter().map(|&c| c as u32).collect(),
                            right: s.right.iter().map(|&c| c as u32).collect(),
                        },
                        score: s.improvement,
                    })
                }
            };
            if let Some(c) = found {
                if best.as_ref().is_none_or(|b| c.score > b.score) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let (mean, sse) = mean_sse(&self.data.y, &rows);
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            prediction: mean,
            n: rows.len(),
            sse,
            depth,
            split: None,
        });
        if rows.len() < self.controls.minsplit
            || depth >= self.controls.max_depth
            || sse <= self.floor
        {
            return id;
        }
        let Some(cand) = self.best_candidate(&rows) else {
            return id;
        };

        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut missing = Vec::new();
        let probe = Split {
            variable: cand.variable,
            rule: cand.rule,
            improvement: 0.0,
            left: 0,
            right: 0,
            n_left: 0,
            n_right: 0,
            n_missing: 0,
            missing_left: true,
        };
        for &r in &rows {
            let row = super::features::FeatureRow {
                features: &self.data.features,
                row: r,
            };
            match probe.route(&row) {
                super::tree::Route::Left => left.push(r),
                super::tree::Route::Right => right.push(r),
                _ => missing.push(r),
            }
        }
        let (n_left, n_right, n_missing) = (left.len(), right.len(), missing.len());
        let missing_left = n_left >= n_right;
        if missing_left {
            left.extend_from_slice(&missing);
            left.sort_unstable();
        } else {
            right.extend_from_slice(&missing);
            right.sort_unstable();
        }
        let (_, sse_left) = mean_sse(&self.data.y, &left);
        let (_, sse_right) = mean_sse(&self.data.y, &right);
        let improvement = sse - sse_left - sse_right;
        if improvement < self.min_gain || improvement <= self.floor {
            return id;
        }

        let left_id = self.build(left, depth + 1);
        let right_id = self.build(right, depth + 1);
        self.nodes[id].split = Some(Split {
            left: left_id,
            right: right_id,
            improvement,
            n_left,
            n_right,
            n_missing,
            missing_left,
            ..probe
        });
        id
    }
}

/// Grows a tree on `rows` (indices into `data`, repeats allowed).
pub(crate) fn grow_rows(
    data: &TrainingSet,
    rows: Vec<usize>,
    controls: &GrowthControls,
    subsample: Option<Subsample<'_>>,
) -> Result<RegressionTree> {
    if rows.is_empty() {
        return Err(Error::InsufficientData("no rows to grow a tree on".into()));
    }
    let (_, root_sse) = mean_sse(&data.y, &rows);
    let scale: f64 = rows.iter().map(|&r| data.y[r] * data.y[r]).sum::<f64>();
    // Reductions at rounding level are not real splits.
    let floor = 1e-12 * root_sse.max(1e-300) + 1e-24 * scale;
    if root_sse <= 1e-24 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateResponse(format!(
            "\"{}\" has zero variance",
            data.response
        )));
    }
    let mut grower = Grower {
        data,
        controls,
        min_gain: controls.cp_min * root_sse,
        floor,
        subsample,
        nodes: Vec::new(),
    };
    grower.build(rows, 0);
    let tree = RegressionTree {
        schema_version: TREE_SCHEMA_VERSION,
        response: data.response.clone(),
        response_transform: data.response_transform,
        predictors: data.features.predictors.clone(),
        controls: controls.clone(),
        nodes: grower.nodes,
    };
    // Collapse subtrees whose average gain does not exceed cp_min, so the
    // first pruning threshold is strictly above it.
    Ok(if controls.cp_min > 0.0 {
        prune_at(&tree, controls.cp_min)
    } else {
        tree
    })
}

/// Grows a regression tree by recursive binary partitioning.
///
/// Rows missing a split variable are left out of that split's scoring and
/// follow the child that received more scored rows.
pub fn grow<S: AsRef<str>>(
    table: &DataTable,
    response: &str,
    predictors: &[S],
    controls: &GrowthControls,
) -> Result<RegressionTree> {
    controls.validate()?;
    let data = TrainingSet::from_table(table, response, predictors)?;
    grow_rows(&data, (0..data.n()).collect(), controls, None)
}

pub(crate) fn grow_training(data: &TrainingSet, controls: &GrowthControls) -> Result<RegressionTree> {
    grow_rows(data, (0..data.n()).collect(), controls, None)
}
