use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping and validation settings for tree growth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowthControls {
    /// A split must reduce SSE by at least `cp_min · SSE(root)`.
    pub cp_min: f64,
    /// Nodes with fewer rows are not split.
    pub minsplit: usize,
    /// Every leaf keeps at least this many rows.
    pub minbucket: usize,
    pub max_depth: usize,
    pub cv_folds: usize,
    pub seed: u64,
}

impl Default for GrowthControls {
    fn default() -> Self {
        Self {
            cp_min: 0.01,
            minsplit: 20,
            minbucket: 7,
            max_depth: 30,
            cv_folds: 10,
            seed: 0,
        }
    }
}

impl GrowthControls {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.minbucket < 1 {
            return Err(Error::Config("minbucket must be at least 1".into()));
        }
        if self.minsplit < 2 * self.minbucket {
            return Err(Error::Config(format!(
                "minsplit ({}) must be at least 2·minbucket ({})",
                self.minsplit,
                2 * self.minbucket
            )));
        }
        if !(0.0..=1.0).contains(&self.cp_min) {
            return Err(Error::Config(format!(
                "cp_min {} outside [0, 1]",
                self.cp_min
            )));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = GrowthControls::default();
        c.validate().unwrap();
        assert_eq!((c.minsplit, c.minbucket, c.cv_folds), (20, 7, 10));
    }

    #[test]
    fn rejects_bad_settings() {
        let bad = [
            GrowthControls { minbucket: 0, ..Default::default() },
            GrowthControls { minsplit: 10, minbucket: 7, ..Default::default() },
            GrowthControls { cp_min: 1.5, ..Default::default() },
            GrowthControls { cv_folds: 1, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
