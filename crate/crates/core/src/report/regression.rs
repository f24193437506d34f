use serde_json::{json, Value};

use super::tabbed;
use crate::linmod::{significance_stars, FixedEffectsFit, LinearFit, TermSource, SMALL_GROUP};

/// One column of a regression table.
#[derive(Debug, Clone, Copy)]
pub enum ModelFit<'a> {
    Ols(&'a LinearFit),
    FixedEffects(&'a FixedEffectsFit),
}

impl<'a> ModelFit<'a> {
    fn linear(&self) -> &'a LinearFit {
        match self {
            ModelFit::Ols(f) => f,
            ModelFit::FixedEffects(fe) => &fe.base,
        }
    }
}

fn stars(p: f64) -> &'static str {
    significance_stars(p).unwrap_or("")
}

fn cell(fit: &LinearFit, i: usize) -> String {
    format!(
        "{:.4}{} [{:.3}]",
        fit.coefficients[i],
        stars(fit.p_values[i]),
        fit.std_errors[i]
    )
}

/// Row labels in first-appearance order across columns, intercept last.
fn row_terms(fits: &[ModelFit]) -> Vec<TermSource> {
    let mut terms: Vec<TermSource> = Vec::new();
    for f in fits {
        for t in &f.linear().terms {
            if *t != TermSource::Intercept && !terms.contains(t) {
                terms.push(t.clone());
            }
        }
    }
    if fits.iter().any(|f| f.linear().terms.contains(&TermSource::Intercept)) {
        terms.push(TermSource::Intercept);
    }
    terms
}

/// Side-by-side coefficient table: cells read "coef<stars> [se]".
pub fn render_regression_table(fits: &[ModelFit]) -> String {
    let mut rows = Vec::new();
    let mut header = vec!["VARIABLES".to_string()];
    for (i, f) in fits.iter().enumerate() {
        header.push(format!("({}) {}", i + 1, f.linear().response));
    }
    rows.push(header);

    for term in row_terms(fits) {
        let mut row = vec![term.label()];
        for f in fits {
            let lin = f.linear();
            row.push(
                lin.terms
                    .iter()
                    .position(|t| *t == term)
                    .map(|i| cell(lin, i))
                    .unwrap_or_default(),
            );
        }
        rows.push(row);
    }

    let any_ols = fits.iter().any(|f| matches!(f, ModelFit::Ols(_)));
    let any_fe = fits.iter().any(|f| matches!(f, ModelFit::FixedEffects(_)));
    let footer = |label: &str, ols: &dyn Fn(&LinearFit) -> String, fe: &dyn Fn(&FixedEffectsFit) -> String| {
        let mut row = vec![label.to_string()];
        for f in fits {
            row.push(match f {
                ModelFit::Ols(l) => ols(l),
                ModelFit::FixedEffects(e) => fe(e),
            });
        }
        row
    };
    rows.push(footer("Observations", &|l| l.n.to_string(), &|e| e.base.n.to_string()));
    if any_ols {
        rows.push(footer("R-squared", &|l| format!("{:.4}", l.r2), &|_| String::new()));
        rows.push(footer(
            "Adjusted R-squared",
            &|l| format!("{:.4}", l.adj_r2),
            &|_| String::new(),
        ));
    }
    if any_fe {
        rows.push(footer("Number of groups", &|_| String::new(), &|e| e.n_groups.to_string()));
        rows.push(footer(
            "Within-R-squared",
            &|_| String::new(),
            &|e| format!("{:.4}", e.r2_within),
        ));
        rows.push(footer(
            "Between-R-squared",
            &|_| String::new(),
            &|e| format!("{:.4}", e.r2_between),
        ));
        rows.push(footer(
            "Overall-R-squared",
            &|_| String::new(),
            &|e| format!("{:.4}", e.r2_overall),
        ));
    }

    let mut out = tabbed(&rows);
    out.push_str("\nStandard errors in brackets\n *** p<0.01, ** p<0.05, * p<0.1\n");
    for (i, f) in fits.iter().enumerate() {
        let dropped = &f.linear().dropped_terms;
        if !dropped.is_empty() {
            let names: Vec<String> = dropped.iter().map(TermSource::label).collect();
            out.push_str(&format!(
                "({}) omitted for collinearity: {}\n",
                i + 1,
                names.join(", ")
            ));
        }
        if let ModelFit::FixedEffects(fe) = f {
            if !fe.small_groups.is_empty() {
                let names: Vec<String> = fe
                    .small_groups
                    .iter()
                    .map(|(level, n)| format!("{level} (n={n})"))
                    .collect();
                out.push_str(&format!(
                    "({}) {} groups with fewer than {SMALL_GROUP} observations: {}\n",
                    i + 1,
                    fe.small_groups.len(),
                    names.join(", ")
                ));
            }
        }
    }
    out
}

/// Structured mirror of [`render_regression_table`] at full precision.
pub fn regression_table_json(fits: &[ModelFit]) -> Value {
    let columns: Vec<Value> = fits
        .iter()
        .map(|f| {
            let lin = f.linear();
            let terms: Vec<Value> = lin
                .terms
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    json!({
                        "term": t.label(),
                        "coefficient": lin.coefficients[i],
                        "std_error": lin.std_errors[i],
                        "p_value": lin.p_values[i],
                        "stars": stars(lin.p_values[i]),
                    })
                })
                .collect();
            let dropped: Vec<String> = lin.dropped_terms.iter().map(TermSource::label).collect();
            let mut col = json!({
                "response": lin.response,
                "terms": terms,
                "observations": lin.n,
                "dropped_terms": dropped,
            });
            match f {
                ModelFit::Ols(l) => {
                    col["family"] = json!("ols");
                    col["r2"] = json!(l.r2);
                    col["adj_r2"] = json!(l.adj_r2);
                }
                ModelFit::FixedEffects(e) => {
                    col["family"] = json!("fixed_effects");
                    col["group"] = json!(e.group_var);
                    col["n_groups"] = json!(e.n_groups);
                    col["r2_within"] = json!(e.r2_within);
                    col["r2_between"] = json!(e.r2_between);
                    col["r2_overall"] = json!(e.r2_overall);
                    col["small_groups"] = json!(e.small_groups);
                }
            }
            col
        })
        .collect();
    json!({ "columns": columns })
}
