//! Weakest-link cost-complexity pruning and the CP table.

use serde::{Deserialize, Serialize};

use super::controls::GrowthControls;
use super::cv::cv_errors;
use super::features::TrainingSet;
use super::tree::RegressionTree;
use crate::dataset::DataTable;
use crate::error::Result;

/// Relative slack when collecting nodes tied for the weakest link.
const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpRow {
    pub cp: f64,
    pub nsplit: usize,
    /// SSE of the pruned tree over SSE of the root.
    pub rel_error: f64,
    pub xerror: f64,
    pub xstd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpTable {
    pub rows: Vec<CpRow>,
}

impl CpTable {
    pub fn cps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.cp).collect()
    }

    /// Largest absolute deviation from rel[i+1] = rel[i] − cp[i]·(nsplit[i+1] − nsplit[i]).
    pub fn identity_residual(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| {
                let predicted = w[0].rel_error - w[0].cp * (w[1].nsplit - w[0].nsplit) as f64;
                (predicted - w[1].rel_error).abs()
            })
            .fold(0.0, f64::max)
    }

    /// cp of the row with the lowest cross-validated error; the smaller
    /// tree wins ties.
    pub fn min_xerror_cp(&self) -> f64 {
        let mut best = &self.rows[0];
        for r in &self.rows[1..] {
            if r.xerror < best.xerror {
                best = r;
            }
        }
        best.cp
    }
}

/// One step of the pruning sequence: the link strength at which it happens
/// and the nodes collapsed once it has.
#[derive(Debug, Clone)]
pub(crate) struct PruneStep {
    pub alpha: f64,
    pub collapsed: Vec<bool>,
}

/// (leaf SSE sum, leaf count) of the subtree below `id` under `collapsed`;
/// pushes g(t) for every active internal node onto `out`.
fn walk(
    tree: &RegressionTree,
    id: usize,
    collapsed: &[bool],
    root_sse: f64,
    out: &mut Vec<(usize, f64)>,
) -> (f64, usize) {
    let node = &tree.nodes[id];
    match &node.split {
        Some(split) if !collapsed[id] => {
            let (rl, ll) = walk(tree, split.left, collapsed, root_sse, out);
            let (rr, lr) = walk(tree, split.right, collapsed, root_sse, out);
            let (r, l) = (rl + rr, ll + lr);
            out.push((id, (node.sse - r) / (l - 1) as f64 / root_sse));
            (r, l)
        }
        _ => (node.sse, 1),
    }
}

pub(crate) fn link_strengths(tree: &RegressionTree, collapsed: &[bool]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    walk(tree, 0, collapsed, tree.root_sse(), &mut out);
    out
}

/// (nsplit, rel_error) of the tree under `collapsed`.
pub(crate) fn size_and_error(tree: &RegressionTree, collapsed: &[bool]) -> (usize, f64) {
    let mut out = Vec::new();
    let (r, leaves) = walk(tree, 0, collapsed, tree.root_sse(), &mut out);
    (leaves - 1, r / tree.root_sse())
}

/// Successively collapses every node tied for the smallest g(t) until only
/// the root remains.
pub(crate) fn pruning_sequence(tree: &RegressionTree) -> Vec<PruneStep> {
    let mut collapsed = vec![false; tree.nodes.len()];
    let mut steps = Vec::new();
    loop {
        let strengths = link_strengths(tree, &collapsed);
        let Some(min) = strengths.iter().map(|s| s.1).reduce(f64::min) else {
            break;
        };
        let bar = min + TIE_TOL * min.abs();
        for &(id, g) in &strengths {
            if g <= bar {
                collapsed[id] = true;
            }
        }
        steps.push(PruneStep {
            alpha: min,
            collapsed: collapsed.clone(),
        });
    }
    steps
}

/// Optimal subtree for complexity `cp`: follows the weakest-link sequence
/// while the next link strength is at most `cp`.
pub fn prune_at(tree: &RegressionTree, cp: f64) -> RegressionTree {
    match pruning_sequence(tree).iter().take_while(|s| s.alpha <= cp).last() {
        Some(step) => tree.snip(&step.collapsed),
        None => tree.clone(),
    }
}

/// Pruning rows without cross-validation columns: (cp, nsplit, rel_error),
/// ordered from the root upward.
pub(crate) fn pruning_rows(tree: &RegressionTree) -> Vec<CpRow> {
    let steps = pruning_sequence(tree);
    let mut masks = vec![vec![false; tree.nodes.len()]];
    masks.extend(steps.iter().map(|s| s.collapsed.clone()));
    let m = masks.len();
    (0..m)
        .map(|j| {
            let t = m - 1 - j;
            let (nsplit, rel_error) = size_and_error(tree, &masks[t]);
            let cp = if t >= 1 {
                steps[t - 1].alpha
            } else if m == 1 {
                1.0
            } else {
                tree.controls.cp_min
            };
            CpRow {
                cp,
                nsplit,
                rel_error,
                xerror: 0.0,
                xstd: 0.0,
            }
        })
        .collect()
}

/// Weakest-link pruning sequence of `tree` with cross-validated error
/// columns computed on `table`.
pub fn cp_table(tree: &RegressionTree, table: &DataTable, controls: &GrowthControls) -> Result<CpTable> {
    controls.validate()?;
    let mut rows = pruning_rows(tree);
    let data = TrainingSet::from_table(table, &tree.response, &tree.predictor_names())?;
    let cps: Vec<f64> = rows.iter().map(|r| r.cp).collect();
    let cv = cv_errors(&data, &cps, controls)?;
    for (row, (xerror, xstd)) in rows.iter_mut().zip(cv) {
        row.xerror = xerror;
        row.xstd = xstd;
    }
    Ok(CpTable { rows })
}
