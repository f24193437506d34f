use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::design::{Design, TermSource};
use super::qr::least_squares;
use crate::dataset::Record;
use crate::error::{Error, Result};

/// Ordinary least squares estimates with classical (homoskedastic) inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub response: String,
    /// Retained terms; collinear ones are listed in `dropped_terms` instead.
    pub terms: Vec<TermSource>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub p_values: Vec<f64>,
    pub n: usize,
    pub df_resid: usize,
    pub rss: f64,
    pub r2: f64,
    pub adj_r2: f64,
    pub dropped_terms: Vec<TermSource>,
}

impl LinearFit {
    pub fn term_labels(&self) -> Vec<String> {
        self.terms.iter().map(TermSource::label).collect()
    }

    pub fn coefficient(&self, label: &str) -> Option<f64> {
        self.terms
            .iter()
            .position(|t| t.label() == label)
            .map(|i| self.coefficients[i])
    }

    /// Fitted value for a record, or `None` when it lacks a used variable.
    pub fn predict(&self, record: &Record) -> Option<f64> {
        let mut total = 0.0;
        for (term, coef) in self.terms.iter().zip(&self.coefficients) {
            total += coef * term.evaluate(record)?;
        }
        Some(total)
    }

    /// Fitted value for a row of design values aligned with the full design
    /// (including dropped columns).
    pub(crate) fn fitted(design: &Design, kept: &[usize], coefficients: &[f64], row: usize) -> f64 {
        kept.iter()
            .zip(coefficients)
            .map(|(&c, b)| design.columns[c][row] * b)
            .sum()
    }
}

fn two_sided_p(t: f64, df: usize) -> f64 {
    if t.is_nan() {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("positive df");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

/// OLS fit of `design`. `absorbed` counts parameters estimated outside the
/// design (group means in the within estimator); it reduces residual degrees
/// of freedom.
pub(crate) fn fit_with_absorbed(design: &Design, absorbed: usize) -> Result<LinearFit> {
    let n = design.n();
    let mean = design.y.iter().sum::<f64>() / n.max(1) as f64;
    let tss: f64 = design.y.iter().map(|v| (v - mean).powi(2)).sum();
    let scale: f64 = design.y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    if n == 0 || tss <= 1e-24 * scale {
        return Err(Error::DegenerateResponse(format!(
            "\"{}\" has zero variance",
            design.response
        )));
    }

    let ls = least_squares(&design.columns, &design.y);
    let k = ls.kept.len() + absorbed;
    if n <= k {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {k} parameters"
        )));
    }
    let df = n - k;

    let rss: f64 = (0..n)
        .map(|r| (design.y[r] - LinearFit::fitted(design, &ls.kept, &ls.coefficients, r)).powi(2))
        .sum();
    let sigma2 = rss / df as f64;
    let std_errors: Vec<f64> = ls.xtx_inv_diag.iter().map(|d| (sigma2 * d).sqrt()).collect();
    let p_values = ls
        .coefficients
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| {
            if *se == 0.0 {
                if *b == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                two_sided_p(b / se, df)
            }
        })
        .collect();
    let r2 = (1.0 - rss / tss).clamp(0.0, 1.0);
    let adj_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / df as f64;

    Ok(LinearFit {
        response: design.response.clone(),
        terms: ls.kept.iter().map(|&c| design.terms[c].clone()).collect(),
        coefficients: ls.coefficients,
        std_errors,
        p_values,
        n,
        df_resid: df,
        rss,
        r2,
        adj_r2,
        dropped_terms: ls.dropped.iter().map(|&c| design.terms[c].clone()).collect(),
    })
}

/// Least squares via Householder QR; later collinear columns are dropped and reported.
pub fn fit_ols(design: &Design) -> Result<LinearFit> {
    fit_with_absorbed(design, 0)
}

/// "***" below 0.01, "**" below 0.05, "*" below 0.1. Boundaries are strict.
pub fn significance_stars(p: f64) -> Result<&'static str> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            row: 0,
            variable: "p".into(),
            message: format!("p-value {p} outside [0, 1]"),
        });
    }
    Ok(if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    })
}
