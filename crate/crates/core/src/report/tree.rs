use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::tabbed;
use crate::cart::{CpRow, CpTable, Importance, RegressionTree};
use crate::forest::ForestModel;

/// Header facts printed above a CP table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeMeta {
    pub obs: usize,
    pub end_nodes: usize,
}

impl TreeMeta {
    pub fn of(tree: &RegressionTree) -> Self {
        Self {
            obs: tree.root().n,
            end_nodes: tree.n_leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpReport {
    pub obs: usize,
    pub end_nodes: usize,
    pub rows: Vec<CpRow>,
    pub importance: Vec<Importance>,
}

pub fn cp_report(cp: &CpTable, importance: &[Importance], meta: TreeMeta) -> CpReport {
    CpReport {
        obs: meta.obs,
        end_nodes: meta.end_nodes,
        rows: cp.rows.clone(),
        importance: importance.to_vec(),
    }
}

/// CP table with the importance block beneath it.
pub fn render_cp_table(cp: &CpTable, importance: &[Importance], meta: TreeMeta) -> String {
    let mut out = format!("OBS: {}\tEnd Nodes: {}\n", meta.obs, meta.end_nodes);
    let mut rows = vec![vec![
        "Complexity parameter".to_string(),
        "No. of Split".to_string(),
        "rel error".to_string(),
        "Crossvalidation error".to_string(),
        "Crossvalidation St. Dev.".to_string(),
    ]];
    for r in &cp.rows {
        rows.push(vec![
            format!("{:.5}", r.cp),
            r.nsplit.to_string(),
            format!("{:.4}", r.rel_error),
            format!("{:.5}", r.xerror),
            format!("{:.5}", r.xstd),
        ]);
    }
    out.push_str(&tabbed(&rows));
    out.push_str("\nrel error: SSE of the pruned tree relative to the root SSE; 1 - rel error is the share of variance explained.\n");
    out.push_str("\nVariable Importance\n");
    if importance.is_empty() {
        out.push_str("(no splits)\n");
    } else {
        let names: Vec<String> = importance.iter().map(|i| i.variable.clone()).collect();
        let scores: Vec<String> = importance.iter().map(|i| i.score.to_string()).collect();
        out.push_str(&tabbed(&[names, scores]));
    }
    out
}

pub fn render_forest_summary(model: &ForestModel) -> String {
    tabbed(&[
        vec!["Type of random forest :".into(), "Regression".into()],
        vec!["Number of trees :".into(), model.n_trees.to_string()],
        vec![
            "No. of variables tried at each split:".into(),
            model.mtry.to_string(),
        ],
        vec!["Mean of squared residuals :".into(), format!("{:.6}", model.oob_mse)],
        vec!["% Var explained :".into(), format!("{:.2}", model.pct_var_explained)],
    ])
}

pub fn forest_summary_json(model: &ForestModel) -> Value {
    json!({
        "type": "regression",
        "n_trees": model.n_trees,
        "mtry": model.mtry,
        "seed": model.seed,
        "oob_mse": model.oob_mse,
        "pct_var_explained": model.pct_var_explained,
        "oob_scored": model.oob_scored,
        "oob_skipped": model.oob_skipped,
        "warnings": model.warnings,
    })
}

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz digraph; node ids follow the tree's pre-order numbering.
pub fn export_tree_dot(tree: &RegressionTree) -> String {
    let mut out = String::from("digraph tree {\n  node [shape=box];\n");
    for (id, node) in tree.nodes.iter().enumerate() {
        let mut label = format!("{} = {:.4}\\nn = {}", escape(&tree.response), node.prediction, node.n);
        if let Some(split) = &node.split {
            label.push_str("\\n");
            label.push_str(&escape(&tree.condition_text(split, true)));
        }
        out.push_str(&format!("  n{id} [label=\"{label}\"];\n"));
    }
    for (id, node) in tree.nodes.iter().enumerate() {
        if let Some(split) = &node.split {
            out.push_str(&format!("  n{id} -> n{} [label=\"yes\"];\n", split.left));
            out.push_str(&format!("  n{id} -> n{} [label=\"no\"];\n", split.right));
        }
    }
    out.push_str("}\n");
    out
}
