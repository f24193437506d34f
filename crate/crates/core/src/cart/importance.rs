use serde::{Deserialize, Serialize};

use super::tree::RegressionTree;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Importance {
    pub variable: String,
    pub score: u32,
}

/// Rounds nonnegative shares to integers summing to `total`, giving the
/// leftover units to the largest remainders (earlier index on ties).
pub(crate) fn round_to_total(shares: &[f64], total: u32) -> Vec<u32> {
    let sum: f64 = shares.iter().sum();
    if sum <= 0.0 {
        return vec![0; shares.len()];
    }
    let exact: Vec<f64> = shares.iter().map(|s| s / sum * total as f64).collect();
    let mut out: Vec<u32> = exact.iter().map(|e| e.floor() as u32).collect();
    let assigned: u32 = out.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned) as usize) {
        out[i] += 1;
    }
    out
}

/// Split improvements summed per variable and scaled to integers summing to
/// 100, sorted by score then name. Empty for a root-only tree.
pub fn variable_importance(tree: &RegressionTree) -> Vec<Importance> {
    let mut totals = vec![0.0; tree.predictors.len()];
    let mut used = vec![false; tree.predictors.len()];
    for node in &tree.nodes {
        if let Some(split) = &node.split {
            totals[split.variable] += split.improvement;
            used[split.variable] = true;
        }
    }
    let vars: Vec<usize> = (0..totals.len()).filter(|&v| used[v]).collect();
    if vars.is_empty() {
        return Vec::new();
    }
    let shares: Vec<f64> = vars.iter().map(|&v| totals[v]).collect();
    let scores = round_to_total(&shares, 100);
    let mut out: Vec<Importance> = vars
        .iter()
        .zip(scores)
        .map(|(&v, score)| Importance {
            variable: tree.predictors[v].name.clone(),
            score,
        })
        .collect();
    out.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.variable.cmp(&b.variable)));
    out
}
