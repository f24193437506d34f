use serde::{Deserialize, Serialize};

use super::controls::GrowthControls;
use super::features::{PredictorInfo, PredictorKind, RowValues, MISSING, UNKNOWN};
use crate::dataset::{Cell, Record, Transform};
use crate::error::{Error, Result};

pub const TREE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum SplitRule {
    /// `x <= threshold` goes left.
    Numeric { threshold: f64 },
    /// Level codes (into the predictor's level list) observed at the node.
    Categorical { left: Vec<u32>, right: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    /// Index into the tree's predictor list.
    pub variable: usize,
    pub rule: SplitRule,
    /// SSE(node) − SSE(left) − SSE(right), in squared response units.
    pub improvement: f64,
    pub left: usize,
    pub right: usize,
    /// Non-missing training rows sent each way.
    pub n_left: usize,
    pub n_right: usize,
    /// Training rows missing the split variable, routed to the majority side.
    pub n_missing: usize,
    pub missing_left: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Mean response of the training rows reaching this node.
    pub prediction: f64,
    pub n: usize,
    pub sse: f64,
    pub depth: usize,
    pub split: Option<Split>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

/// How a row passed one split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Route {
    Left,
    Right,
    /// Missing value sent to the majority side.
    MajorityMissing(bool),
    /// Level not observed at the node, sent to the majority side.
    MajorityUnseen(bool),
}

impl Route {
    pub fn goes_left(self) -> bool {
        match self {
            Route::Left => true,
            Route::Right => false,
            Route::MajorityMissing(l) | Route::MajorityUnseen(l) => l,
        }
    }
}

impl Split {
    pub(crate) fn route(&self, row: &impl RowValues) -> Route {
        match &self.rule {
            SplitRule::Numeric { threshold } => match row.number(self.variable) {
                None => Route::MajorityMissing(self.missing_left),
                Some(x) if x <= *threshold => Route::Left,
                Some(_) => Route::Right,
            },
            SplitRule::Categorical { left, right } => {
                let code = row.code(self.variable);
                if code == MISSING {
                    Route::MajorityMissing(self.missing_left)
                } else if code != UNKNOWN && left.binary_search(&code).is_ok() {
                    Route::Left
                } else if code != UNKNOWN && right.binary_search(&code).is_ok() {
                    Route::Right
                } else {
                    Route::MajorityUnseen(self.missing_left)
                }
            }
        }
    }
}

/// A fitted regression tree. `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub schema_version: u32,
    pub response: String,
    pub response_transform: Transform,
    pub predictors: Vec<PredictorInfo>,
    pub controls: GrowthControls,
    pub nodes: Vec<TreeNode>,
}

/// Result of routing a record through a tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreePrediction {
    /// Leaf mean on the response's modelling scale.
    pub value: f64,
    /// `exp(value)` for log-transformed responses, otherwise `value`.
    pub back_transformed: f64,
    pub leaf: usize,
    /// Variables whose missing value was routed by the majority rule.
    pub routed_missing: Vec<String>,
    /// Variables whose level was not seen at the splitting node.
    pub unseen_levels: Vec<String>,
}

impl TreePrediction {
    pub fn flagged(&self) -> bool {
        !self.routed_missing.is_empty() || !self.unseen_levels.is_empty()
    }
}

/// Maps a response-scale value back to EUR when the response was logged.
pub fn back_transform(value: f64, transform: Transform) -> f64 {
    match transform {
        Transform::None => value,
        Transform::NaturalLog => value.exp(),
    }
}

/// A record resolved against a model's predictor list.
pub(crate) struct ResolvedRecord {
    numbers: Vec<Option<f64>>,
    codes: Vec<u32>,
}

impl RowValues for ResolvedRecord {
    fn number(&self, var: usize) -> Option<f64> {
        self.numbers[var]
    }

    fn code(&self, var: usize) -> u32 {
        self.codes[var]
    }
}

/// Looks each predictor up by its column name, then by its source variable
/// name (applying the training transform to raw values).
pub(crate) fn resolve_record(predictors: &[PredictorInfo], record: &Record) -> Result<ResolvedRecord> {
    let mut numbers = vec![None; predictors.len()];
    let mut codes = vec![MISSING; predictors.len()];
    for (i, p) in predictors.iter().enumerate() {
        let (cell, raw) = match record.get(&p.name) {
            Some(c) => (Some(c), false),
            None => (record.get(&p.source), p.source != p.name),
        };
        match (p.kind, cell) {
            (_, None) | (_, Some(Cell::Missing)) => {}
            (PredictorKind::Numeric, Some(Cell::Number(v))) => {
                let v = if raw && p.transform == Transform::NaturalLog {
                    if *v <= 0.0 {
                        return Err(Error::Domain {
                            row: 1,
                            variable: p.source.clone(),
                            message: format!("natural_log of nonpositive value {v}"),
                        });
                    }
                    v.ln()
                } else {
                    *v
                };
                numbers[i] = Some(v);
            }
            (PredictorKind::Categorical, Some(Cell::Level(l))) => {
                codes[i] = p
                    .levels
                    .iter()
                    .position(|m| m == l)
                    .map_or(UNKNOWN, |c| c as u32);
            }
            (kind, Some(_)) => {
                return Err(Error::WrongKind {
                    variable: p.name.clone(),
                    expected: match kind {
                        PredictorKind::Numeric => "numeric",
                        PredictorKind::Categorical => "categorical",
                    },
                    found: match kind {
                        PredictorKind::Numeric => "categorical",
                        PredictorKind::Categorical => "numeric",
                    },
                })
            }
        }
    }
    Ok(ResolvedRecord { numbers, codes })
}

impl RegressionTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn root_sse(&self) -> f64 {
        self.nodes[0].sse
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.len() - self.n_leaves()
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, &TreeNode)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.is_leaf())
    }

    /// Sum of leaf SSE over the training rows.
    pub fn leaf_sse(&self) -> f64 {
        self.leaves().map(|(_, n)| n.sse).sum()
    }

    pub fn predictor_names(&self) -> Vec<String> {
        self.predictors.iter().map(|p| p.name.clone()).collect()
    }

    pub(crate) fn leaf_index(&self, row: &impl RowValues) -> usize {
        let mut id = 0;
        while let Some(split) = &self.nodes[id].split {
            id = if split.route(row).goes_left() {
                split.left
            } else {
                split.right
            };
        }
        id
    }

    /// Leaf reached when nodes marked in `collapsed` are treated as leaves.
    pub(crate) fn leaf_index_masked(&self, row: &impl RowValues, collapsed: &[bool]) -> usize {
        let mut id = 0;
        while let Some(split) = &self.nodes[id].split {
            if collapsed[id] {
                break;
            }
            id = if split.route(row).goes_left() {
                split.left
            } else {
                split.right
            };
        }
        id
    }

    pub(crate) fn predict_values(&self, row: &impl RowValues) -> f64 {
        self.nodes[self.leaf_index(row)].prediction
    }

    /// Routes a record to its leaf. Missing values and unseen levels follow
    /// the majority side and are reported in the result.
    pub fn predict(&self, record: &Record) -> Result<TreePrediction> {
        let resolved = resolve_record(&self.predictors, record)?;
        let mut routed_missing = Vec::new();
        let mut unseen_levels = Vec::new();
        let mut id = 0;
        while let Some(split) = &self.nodes[id].split {
            let route = split.route(&resolved);
            let name = &self.predictors[split.variable].name;
            match route {
                Route::MajorityMissing(_) if !routed_missing.contains(name) => {
                    routed_missing.push(name.clone())
                }
                Route::MajorityUnseen(_) if !unseen_levels.contains(name) => {
                    unseen_levels.push(name.clone())
                }
                _ => {}
            }
            id = if route.goes_left() { split.left } else { split.right };
        }
        let value = self.nodes[id].prediction;
        Ok(TreePrediction {
            value,
            back_transformed: back_transform(value, self.response_transform),
            leaf: id,
            routed_missing,
            unseen_levels,
        })
    }

    /// Human-readable condition for the left (`true`) or right branch of a split.
    pub fn condition_text(&self, split: &Split, left: bool) -> String {
        let p = &self.predictors[split.variable];
        match &split.rule {
            SplitRule::Numeric { threshold } => {
                let op = if left { "≤" } else { ">" };
                format!("{} {op} {}", p.name, format_threshold(*threshold))
            }
            SplitRule::Categorical { left: l, right: r } => {
                let codes = if left { l } else { r };
                let names: Vec<&str> = codes.iter().map(|&c| p.levels[c as usize].as_str()).collect();
                format!("{} ∈ {{{}}}", p.name, names.join(", "))
            }
        }
    }

    /// Copy of the tree with nodes in `collapsed` turned into leaves and
    /// unreachable nodes removed (pre-order renumbering).
    pub(crate) fn snip(&self, collapsed: &[bool]) -> RegressionTree {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        self.copy_node(0, collapsed, &mut nodes);
        RegressionTree {
            nodes,
            ..self.clone_header()
        }
    }

    fn copy_node(&self, id: usize, collapsed: &[bool], out: &mut Vec<TreeNode>) -> usize {
        let new_id = out.len();
        let mut node = self.nodes[id].clone();
        let split = if collapsed[id] { None } else { node.split.take() };
        node.split = None;
        out.push(node);
        if let Some(mut split) = split {
            split.left = self.copy_node(split.left, collapsed, out);
            split.right = self.copy_node(split.right, collapsed, out);
            out[new_id].split = Some(split);
        }
        new_id
    }

    fn clone_header(&self) -> RegressionTree {
        RegressionTree {
            schema_version: self.schema_version,
            response: self.response.clone(),
            response_transform: self.response_transform,
            predictors: self.predictors.clone(),
            controls: self.controls.clone(),
            nodes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<RegressionTree> {
        let tree: RegressionTree = serde_json::from_str(text)?;
        if tree.schema_version != TREE_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported tree schema version {}",
                tree.schema_version
            )));
        }
        if tree.nodes.is_empty() {
            return Err(Error::Schema("tree has no nodes".into()));
        }
        Ok(tree)
    }
}

/// Display form of a split threshold: six significant digits, trailing zeros
/// dropped. The model file keeps the exact value.
pub fn format_threshold(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (5 - x.abs().log10().floor() as i32).clamp(0, 15) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::format_threshold;

    #[test]
    fn threshold_display() {
        assert_eq!(format_threshold(2.5), "2.5");
        assert_eq!(format_threshold(10.423185976045664), "10.4232");
        assert_eq!(format_threshold(0.021455201215044337), "0.0214552");
        assert_eq!(format_threshold(-3.0), "-3");
        assert_eq!(format_threshold(1234567.5), "1234568");
        assert_eq!(format_threshold(0.0), "0");
    }
}
