use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use segval_core::dataset::SynthConfig;
use segval_core::scorecard::BlockAssignment;
use segval_core::GrowthControls;
use serde::Deserialize;

/// A run driven by one JSON file. Relative paths resolve against the file's
/// directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub schema: Option<PathBuf>,
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// Generator settings used when no data file is given.
    #[serde(default)]
    pub synth: Option<SynthConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Model on raw EUR values instead of natural logs.
    #[serde(default)]
    pub raw: bool,
    #[serde(default)]
    pub models: Vec<ModelSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ols,
    FixedEffects,
    Cart,
    Forest,
    Scorecard,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Ols => "ols",
            Family::FixedEffects => "fixed_effects",
            Family::Cart => "cart",
            Family::Forest => "forest",
            Family::Scorecard => "scorecard",
        }
    }
}

/// Which subtree of the grown tree is kept.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prune {
    /// Keep the tree grown down to `cp_min`.
    #[default]
    None,
    /// Prune at the CP row with the lowest cross-validation error.
    MinXerror,
    Cp(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub family: Family,
    /// Defaults to the schema's response.
    #[serde(default)]
    pub response: Option<String>,
    #[serde(default)]
    pub predictors: Vec<String>,
    #[serde(default)]
    pub categoricals: Vec<String>,
    /// Fixed-effects grouping; several variables form a joint category.
    #[serde(default)]
    pub group: Vec<String>,
    #[serde(default)]
    pub controls: Option<GrowthControls>,
    #[serde(default)]
    pub prune: Prune,
    #[serde(default)]
    pub n_trees: Option<usize>,
    #[serde(default)]
    pub mtry: Option<usize>,
    #[serde(default)]
    pub max_categories: Option<usize>,
    #[serde(default)]
    pub blocks: Option<BlockAssignment>,
    /// Second-stage blocks fitted on first-stage residuals.
    #[serde(default)]
    pub deal_blocks: Option<BlockAssignment>,
    /// Name of a cart model whose tree is turned into a segment scorecard.
    #[serde(default)]
    pub tree: Option<String>,
}

impl ModelSpec {
    /// Numeric and categorical predictors in declaration order.
    pub fn all_predictors(&self) -> Vec<&str> {
        self.predictors
            .iter()
            .chain(&self.categoricals)
            .map(String::as_str)
            .collect()
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.schema, &mut config.data, &mut config.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for m in &self.models {
            if !seen.insert(m.name.as_str()) {
                bail!("model name \"{}\" is used twice", m.name);
            }
            if m.name.is_empty() || m.name.contains(['/', '\\']) {
                bail!("model name \"{}\" is not a valid file stem", m.name);
            }
        }
        for m in &self.models {
            if let Some(tree) = &m.tree {
                match self.models.iter().find(|o| &o.name == tree) {
                    Some(o) if o.family == Family::Cart => {}
                    _ => bail!("model \"{}\" refers to \"{tree}\", which is not a cart model", m.name),
                }
            }
        }
        Ok(())
    }

    pub fn models_of(&self, family: Family) -> Vec<&ModelSpec> {
        self.models.iter().filter(|m| m.family == family).collect()
    }

    pub fn model(&self, name: &str) -> Option<&ModelSpec> {
        self.models.iter().find(|m| m.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        let config: RunConfig = serde_json::from_str(
            r#"{"models": [{"name": "a", "family": "ols"}, {"name": "a", "family": "cart"}]}"#,
        )
        .unwrap();
        assert!(config.validate().unwrap_err().to_string().contains("twice"));
    }

    #[test]
    fn prune_forms() {
        let m: ModelSpec =
            serde_json::from_str(r#"{"name": "t", "family": "cart", "prune": {"cp": 0.02}}"#).unwrap();
        assert_eq!(m.prune, Prune::Cp(0.02));
        let m: ModelSpec = serde_json::from_str(r#"{"name": "t", "family": "cart", "prune": "min_xerror"}"#).unwrap();
        assert_eq!(m.prune, Prune::MinXerror);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 3}"#).is_err());
    }

    #[test]
    fn scorecard_tree_must_be_cart() {
        let config: RunConfig = serde_json::from_str(
            r#"{"models": [{"name": "a", "family": "ols"}, {"name": "s", "family": "scorecard", "tree": "a"}]}"#,
        )
        .unwrap();
        assert!(config.validate().is_err());
    }
}
