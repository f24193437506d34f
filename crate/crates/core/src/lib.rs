//! Startup-valuation model fitting and comparison.
//!
//! Linear models (OLS, fixed effects), regression trees with cost-complexity
//! pruning and categorical splits, random forests, and scorecards extracted
//! from fitted models.

pub mod cart;
pub mod dataset;
mod error;
pub mod forest;
pub mod linmod;
pub mod report;
pub mod scorecard;

pub use cart::{CpRow, CpTable, GrowthControls, RegressionTree};
pub use dataset::{Cell, DataTable, Record, Schema, Transform, VariableKind, VariableSpec};
pub use error::{Error, Result};
pub use forest::{ForestConfig, ForestModel};
pub use linmod::{FixedEffectsFit, LinearFit};
pub use scorecard::{BlockScorecard, SegmentScorecard};
