//! Regression trees: exact split search, weakest-link pruning, cross-validated
//! CP tables, variable importance and prediction.

mod controls;
mod cv;
pub(crate) mod features;
mod grow;
mod importance;
mod prune;
mod split;
mod tree;

pub use controls::GrowthControls;
pub use cv::{cross_validate, CvPoint};
pub use features::{PredictorInfo, PredictorKind};
pub use grow::grow;
pub use importance::{variable_importance, Importance};
pub use prune::{cp_table, prune_at, CpRow, CpTable};
pub use split::{best_split_categorical, best_split_numeric, split_gain, CategoricalSplit, NumericSplit};
pub use tree::{
    back_transform, format_threshold, RegressionTree, Split, SplitRule, TreeNode, TreePrediction,
    TREE_SCHEMA_VERSION,
};

pub(crate) use features::{FeatureRow, Features, TrainingSet};
pub(crate) use grow::{grow_rows, Subsample};
pub(crate) use tree::resolve_record;

use crate::dataset::{DataTable, Record};
use crate::error::Result;

/// Leaf prediction for one record; see [`RegressionTree::predict`].
pub fn predict_tree(tree: &RegressionTree, record: &Record) -> Result<TreePrediction> {
    tree.predict(record)
}

impl RegressionTree {
    /// Predictions for every row of `table`.
    pub fn predict_table(&self, table: &DataTable) -> Result<Vec<f64>> {
        let features = Features::for_model(table, &self.predictors)?;
        Ok((0..table.n_rows())
            .map(|r| {
                self.predict_values(&FeatureRow {
                    features: &features,
                    row: r,
                })
            })
            .collect())
    }
}
