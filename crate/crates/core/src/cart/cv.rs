//! K-fold cross-validation of the pruning sequence.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::controls::GrowthControls;
use super::features::{FeatureRow, TrainingSet};
use super::grow::{grow_rows, grow_training};
use super::prune::{pruning_rows, pruning_sequence};
use crate::dataset::DataTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub cp: f64,
    pub xerror: f64,
    pub xstd: f64,
}

/// Fold id per row from a seeded shuffle.
pub(crate) fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut fold = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % folds;
    }
    fold
}

/// Pruning points between consecutive CP rows: ∞ for the root row, then the
/// geometric mean of each cp with its predecessor.
pub(crate) fn pruning_points(cps: &[f64]) -> Vec<f64> {
    (0..cps.len())
        .map(|i| {
            if i == 0 {
                f64::INFINITY
            } else {
                (cps[i] * cps[i - 1]).sqrt()
            }
        })
        .collect()
}

/// (xerror, xstd) per cp value, scaled by the full-data root SSE.
pub(crate) fn cv_errors(data: &TrainingSet, cps: &[f64], controls: &GrowthControls) -> Result<Vec<(f64, f64)>> {
    let n = data.n();
    if controls.cv_folds > n {
        return Err(Error::InsufficientData(format!(
            "{} folds for {n} rows",
            controls.cv_folds
        )));
    }
    let mean = data.y.iter().sum::<f64>() / n as f64;
    let root_sse: f64 = data.y.iter().map(|v| (v - mean).powi(2)).sum();
    if root_sse <= 0.0 {
        return Err(Error::DegenerateResponse(format!(
            "\"{}\" has zero variance",
            data.response
        )));
    }
    let betas = pruning_points(cps);
    let fold_of = fold_assignment(n, controls.cv_folds, controls.seed);

    // Each fold is a pure function of its index; results are merged in fold order.
    let per_fold: Vec<Result<Vec<(usize, Vec<f64>)>>> = (0..controls.cv_folds)
        .into_par_iter()
        .map(|fold| {
            let train: Vec<usize> = (0..n).filter(|&r| fold_of[r] != fold).collect();
            let test: Vec<usize> = (0..n).filter(|&r| fold_of[r] == fold).collect();
            let tree = match grow_rows(data, train, controls, None) {
                Ok(t) => t,
                Err(Error::DegenerateResponse(_)) => return Err(Error::DegenerateFold { fold: fold + 1 }),
                Err(e) => return Err(e),
            };
            let steps = pruning_sequence(&tree);
            let no_cut = vec![false; tree.nodes.len()];
            let masks: Vec<&[bool]> = betas
                .iter()
                .map(|&beta| {
                    steps
                        .iter()
                        .take_while(|s| s.alpha <= beta)
                        .last()
                        .map_or(no_cut.as_slice(), |s| s.collapsed.as_slice())
                })
                .collect();
            Ok(test
                .iter()
                .map(|&r| {
                    let row = FeatureRow {
                        features: &data.features,
                        row: r,
                    };
                    let errs = masks
                        .iter()
                        .map(|mask| {
                            let leaf = tree.leaf_index_masked(&row, mask);
                            (data.y[r] - tree.nodes[leaf].prediction).powi(2)
                        })
                        .collect();
                    (r, errs)
                })
                .collect())
        })
        .collect();

    let mut errors = vec![Vec::new(); n];
    for fold in per_fold {
        for (r, e) in fold? {
            errors[r] = e;
        }
    }

    Ok((0..cps.len())
        .map(|j| {
            let total: f64 = errors.iter().map(|e| e[j]).sum();
            let m = total / n as f64;
            let spread: f64 = errors.iter().map(|e| (e[j] - m).powi(2)).sum();
            (total / root_sse, spread.sqrt() / root_sse)
        })
        .collect())
}

/// Grows the full tree, derives its CP values, and cross-validates each.
pub fn cross_validate<S: AsRef<str>>(
    table: &DataTable,
    response: &str,
    predictors: &[S],
    controls: &GrowthControls,
) -> Result<Vec<CvPoint>> {
    controls.validate()?;
    let data = TrainingSet::from_table(table, response, predictors)?;
    let tree = grow_training(&data, controls)?;
    let cps: Vec<f64> = pruning_rows(&tree).iter().map(|r| r.cp).collect();
    let errs = cv_errors(&data, &cps, controls)?;
    Ok(cps
        .into_iter()
        .zip(errs)
        .map(|(cp, (xerror, xstd))| CvPoint { cp, xerror, xstd })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_balanced_and_seeded() {
        let a = fold_assignment(23, 5, 9);
        let mut counts = [0; 5];
        for &f in &a {
            counts[f] += 1;
        }
        assert!(counts.iter().all(|&c| c == 4 || c == 5));
        assert_eq!(a, fold_assignment(23, 5, 9));
        assert_ne!(a, fold_assignment(23, 5, 10));
    }

    #[test]
    fn geometric_means() {
        let b = pruning_points(&[1.0, 0.25, 0.01]);
        assert!(b[0].is_infinite());
        assert_eq!(b[1], 0.5);
        assert!((b[2] - 0.05).abs() < 1e-15);
    }
}
