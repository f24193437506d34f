use serde::{Deserialize, Serialize};

use super::tabbed;
use crate::cart::{PredictorKind, RegressionTree};
use crate::error::{Error, Result};
use crate::forest::ForestModel;
use crate::linmod::{FixedEffectsFit, LinearFit, TermSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Ols,
    FixedEffects,
    Cart,
    Forest,
    Scorecard,
}

impl ModelFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::Ols => "ols",
            ModelFamily::FixedEffects => "fixed_effects",
            ModelFamily::Cart => "cart",
            ModelFamily::Forest => "forest",
            ModelFamily::Scorecard => "scorecard",
        }
    }
}

/// Goodness of fit on a common scale: R² for linear models, 1 − rel error
/// for trees, %Var/100 for forests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub family: ModelFamily,
    pub fit: f64,
    pub n: usize,
    /// Categorical variables the model uses.
    pub categories: Vec<String>,
    /// True when every predictor is categorical.
    pub categorical_only: bool,
}

fn linear_categories(fit: &LinearFit) -> (Vec<String>, bool) {
    let mut cats: Vec<String> = Vec::new();
    let mut numeric = false;
    for t in fit.terms.iter().chain(&fit.dropped_terms) {
        match t {
            TermSource::Dummy { variable, .. } if !cats.contains(variable) => cats.push(variable.clone()),
            TermSource::Numeric { .. } => numeric = true,
            _ => {}
        }
    }
    let only = !numeric && !cats.is_empty();
    (cats, only)
}

impl ComparisonRow {
    pub fn ols(name: impl Into<String>, fit: &LinearFit) -> Self {
        let (categories, categorical_only) = linear_categories(fit);
        Self {
            name: name.into(),
            family: ModelFamily::Ols,
            fit: fit.r2,
            n: fit.n,
            categories,
            categorical_only,
        }
    }

    /// Uses the overall R² so the row is comparable with pooled models.
    pub fn fixed_effects(name: impl Into<String>, fit: &FixedEffectsFit) -> Self {
        let (mut categories, _) = linear_categories(&fit.base);
        categories.insert(0, fit.group_var.clone());
        Self {
            name: name.into(),
            family: ModelFamily::FixedEffects,
            fit: fit.r2_overall,
            n: fit.base.n,
            categories,
            categorical_only: fit.base.terms.iter().all(|t| !matches!(t, TermSource::Numeric { .. })),
        }
    }

    pub fn cart(name: impl Into<String>, tree: &RegressionTree) -> Self {
        let categories: Vec<String> = tree
            .predictors
            .iter()
            .filter(|p| p.kind == PredictorKind::Categorical)
            .map(|p| p.name.clone())
            .collect();
        Self {
            name: name.into(),
            family: ModelFamily::Cart,
            fit: 1.0 - tree.leaf_sse() / tree.root_sse(),
            n: tree.root().n,
            categorical_only: categories.len() == tree.predictors.len(),
            categories,
        }
    }

    pub fn forest(name: impl Into<String>, model: &ForestModel) -> Self {
        let predictors = &model.trees[0].predictors;
        let categories: Vec<String> = predictors
            .iter()
            .filter(|p| p.kind == PredictorKind::Categorical)
            .map(|p| p.name.clone())
            .collect();
        Self {
            name: name.into(),
            family: ModelFamily::Forest,
            fit: model.pct_var_explained / 100.0,
            n: model.trees[0].root().n,
            categorical_only: categories.len() == predictors.len(),
            categories,
        }
    }

    pub fn scorecard(name: impl Into<String>, fit: &LinearFit) -> Self {
        Self {
            family: ModelFamily::Scorecard,
            ..Self::ols(name, fit)
        }
    }
}

/// A categorical-only tree fitting at least as well as a fixed-effects regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub tree: String,
    pub tree_fit: f64,
    pub fixed_effects: String,
    pub fixed_effects_fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Sorted by fit, best first; ties by name.
    pub rows: Vec<ComparisonRow>,
    pub contrasts: Vec<Contrast>,
}

impl Comparison {
    pub fn contrast(&self) -> bool {
        !self.contrasts.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut rows = vec![vec![
            "Rank".to_string(),
            "Model".to_string(),
            "Family".to_string(),
            "Fit".to_string(),
            "N".to_string(),
            "Categories".to_string(),
        ]];
        for (i, r) in self.rows.iter().enumerate() {
            rows.push(vec![
                (i + 1).to_string(),
                r.name.clone(),
                r.family.as_str().to_string(),
                format!("{:.4}", r.fit),
                r.n.to_string(),
                r.categories.join(", "),
            ]);
        }
        let mut out = tabbed(&rows);
        out.push_str("\nFit: R-squared (ols, scorecard), overall R-squared (fixed_effects), 1 - rel error (cart), % Var explained / 100 (forest)\n");
        for c in &self.contrasts {
            out.push_str(&format!(
                "Contrast: categorical-only tree {} ({:.4}) >= fixed effects {} ({:.4})\n",
                c.tree, c.tree_fit, c.fixed_effects, c.fixed_effects_fit
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Ranks models by fit and flags categorical-only trees that tie or beat a
/// fixed-effects regression.
pub fn compare_models(rows: Vec<ComparisonRow>) -> Result<Comparison> {
    if rows.len() < 2 {
        return Err(Error::Config("comparison needs at least two models".into()));
    }
    let mut rows = rows;
    rows.sort_by(|a, b| b.fit.total_cmp(&a.fit).then_with(|| a.name.cmp(&b.name)));
    let mut contrasts = Vec::new();
    for t in rows
        .iter()
        .filter(|r| r.family == ModelFamily::Cart && r.categorical_only)
    {
        for fe in rows.iter().filter(|r| r.family == ModelFamily::FixedEffects) {
            if t.fit >= fe.fit {
                contrasts.push(Contrast {
                    tree: t.name.clone(),
                    tree_fit: t.fit,
                    fixed_effects: fe.name.clone(),
                    fixed_effects_fit: fe.fit,
                });
            }
        }
    }
    Ok(Comparison { rows, contrasts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(name: &str, family: ModelFamily, fit: f64, categorical_only: bool) -> ComparisonRow {
        ComparisonRow {
            name: name.into(),
            family,
            fit,
            n: 10,
            categories: vec![],
            categorical_only,
        }
    }

    #[test]
    fn tree_ranked_above_ols() {
        let c = compare_models(vec![
            row("ols", ModelFamily::Ols, 0.41, false),
            row("tree", ModelFamily::Cart, 0.50, false),
        ])
        .unwrap();
        assert_eq!(c.rows[0].name, "tree");
        assert!(!c.contrast());
    }

    #[test]
    fn ties_by_name() {
        let c = compare_models(vec![
            row("b", ModelFamily::Ols, 0.3, false),
            row("a", ModelFamily::Forest, 0.3, false),
        ])
        .unwrap();
        assert_eq!(c.rows[0].name, "a");
    }

    #[test]
    fn contrast_flag() {
        let c = compare_models(vec![
            row("fe", ModelFamily::FixedEffects, 0.282, false),
            row("cat_tree", ModelFamily::Cart, 0.55, true),
            row("full_tree", ModelFamily::Cart, 0.6, false),
        ])
        .unwrap();
        assert_eq!(c.contrasts.len(), 1);
        assert_eq!(c.contrasts[0].tree, "cat_tree");
        assert!(c.to_text().contains("Contrast: categorical-only tree cat_tree"));
    }

    #[test]
    fn needs_two_rows() {
        assert!(compare_models(vec![row("a", ModelFamily::Ols, 0.1, false)]).is_err());
    }
}
