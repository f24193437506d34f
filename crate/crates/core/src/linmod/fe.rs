use serde::{Deserialize, Serialize};

use super::design::{Design, TermSource};
use super::ols::{fit_with_absorbed, LinearFit};
use crate::dataset::{Column, ColumnData, DataTable, VariableKind};
use crate::error::{Error, Result};

/// Groups smaller than this are flagged in reports.
pub const SMALL_GROUP: usize = 5;

/// Within (group-demeaned) estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedEffectsFit {
    /// Slope estimates from the demeaned regression; `r2` is the within R².
    pub base: LinearFit,
    pub group_var: String,
    pub n_groups: usize,
    pub r2_within: f64,
    pub r2_between: f64,
    pub r2_overall: f64,
    /// (level, rows) for groups with fewer than [`SMALL_GROUP`] rows.
    pub small_groups: Vec<(String, usize)>,
}

fn squared_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    if a.len() < 2 {
        return 0.0;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    (sab * sab / (saa * sbb)).clamp(0.0, 1.0)
}

/// Fits slopes on group-demeaned data. Rows missing the response, a slope or
/// the group are dropped first.
pub fn fit_fixed_effects<S: AsRef<str>>(
    table: &DataTable,
    response: &str,
    slopes: &[S],
    group: &str,
) -> Result<FixedEffectsFit> {
    let mut used: Vec<&str> = vec![response, group];
    used.extend(slopes.iter().map(AsRef::as_ref));
    let table = table.complete_cases(&used)?;
    let n = table.n_rows();

    let gcol = table.categorical(group)?;
    let ColumnData::Categorical { levels, codes } = &gcol.data else {
        unreachable!("categorical column")
    };
    // Dense group ids in first-appearance order.
    let mut dense = vec![usize::MAX; levels.len()];
    let mut group_levels = Vec::new();
    let ids: Vec<usize> = codes
        .iter()
        .map(|&c| {
            let c = c as usize;
            if dense[c] == usize::MAX {
                dense[c] = group_levels.len();
                group_levels.push(levels[c].clone());
            }
            dense[c]
        })
        .collect();
    let g = group_levels.len();
    if g < 2 {
        return Err(Error::InsufficientData(format!(
            "fixed effects on \"{}\" need at least 2 groups, found {g}",
            gcol.name
        )));
    }
    let mut counts = vec![0usize; g];
    for &id in &ids {
        counts[id] += 1;
    }

    let group_means = |v: &[f64]| {
        let mut sums = vec![0.0; g];
        for (x, &id) in v.iter().zip(&ids) {
            sums[id] += x;
        }
        sums.iter()
            .zip(&counts)
            .map(|(s, &c)| s / c as f64)
            .collect::<Vec<f64>>()
    };
    let demean = |v: &[f64]| {
        let means = group_means(v);
        v.iter()
            .zip(&ids)
            .map(|(x, &id)| x - means[id])
            .collect::<Vec<f64>>()
    };

    let rcol = table.numeric(response)?;
    let y = rcol.numeric_values().expect("numeric").to_vec();
    let y_within = demean(&y);
    let y_scale: f64 = y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    if y_within.iter().map(|v| v * v).sum::<f64>() <= 1e-24 * y_scale {
        return Err(Error::DegenerateResponse(format!(
            "\"{}\" has no within-group variation",
            rcol.name
        )));
    }
    if slopes.is_empty() {
        return Err(Error::Config(
            "fixed effects need at least one slope variable".into(),
        ));
    }

    let mut raw = Vec::with_capacity(slopes.len());
    let mut terms = Vec::with_capacity(slopes.len());
    let mut columns = Vec::with_capacity(slopes.len());
    for s in slopes {
        let col = table.numeric(s.as_ref())?;
        let x = col.numeric_values().expect("numeric").to_vec();
        let within = demean(&x);
        let scale: f64 = x.iter().map(|v| v * v).sum::<f64>();
        let residual: f64 = within.iter().map(|v| v * v).sum();
        if residual <= 1e-20 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::WithinCollinearity(col.name.clone()));
        }
        terms.push(TermSource::Numeric {
            variable: col.name.clone(),
        });
        columns.push(within);
        raw.push(x);
    }

    let design = Design {
        response: rcol.name.clone(),
        terms,
        columns,
        y: y_within,
    };
    let base = fit_with_absorbed(&design, g)?;

    // Slope-only predictions on raw data.
    let mut yhat = vec![0.0; n];
    for (term, coef) in base.terms.iter().zip(&base.coefficients) {
        let idx = design.terms.iter().position(|t| t == term).expect("kept term");
        for (h, x) in yhat.iter_mut().zip(&raw[idx]) {
            *h += coef * x;
        }
    }
    let r2_overall = squared_correlation(&yhat, &y);
    let r2_between = squared_correlation(&group_means(&yhat), &group_means(&y));

    let small_groups = group_levels
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c < SMALL_GROUP)
        .map(|(l, &c)| (l.clone(), c))
        .collect();

    Ok(FixedEffectsFit {
        r2_within: base.r2,
        base,
        group_var: gcol.name.clone(),
        n_groups: g,
        r2_between,
        r2_overall,
        small_groups,
    })
}

pub const JOINT_SEPARATOR: &str = "×";

/// Cross-product categorical over `vars`. Only observed combinations become
/// levels; rows missing any member are missing.
pub fn joint_category<S: AsRef<str>>(table: &DataTable, vars: &[S]) -> Result<Column> {
    if vars.is_empty() {
        return Err(Error::Config("joint category needs at least one variable".into()));
    }
    let cols = vars
        .iter()
        .map(|v| table.categorical(v.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let name = cols
        .iter()
        .map(|c| c.name.as_str())
        .collect::<Vec<_>>()
        .join(JOINT_SEPARATOR);
    let cells: Vec<Option<String>> = (0..table.n_rows())
        .map(|r| {
            cols.iter()
                .map(|c| c.level(r))
                .collect::<Option<Vec<&str>>>()
                .map(|parts| parts.join(JOINT_SEPARATOR))
        })
        .collect();
    let spec = crate::dataset::VariableSpec::new(name, VariableKind::Categorical);
    Ok(Column::categorical(&spec, &cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Schema, VariableKind::*, VariableSpec};
    use crate::linmod::{encode_design, fit_ols};

    fn schema() -> Schema {
        Schema::new(vec![
            VariableSpec::new("y", Response),
            VariableSpec::new("x", Continuous),
            VariableSpec::new("g", Categorical),
            VariableSpec::new("h", Categorical),
        ])
        .unwrap()
    }

    #[test]
    fn equal_within_slopes() {
        // y = x + 5·[g=b]
        let csv = "y,x,g,h\n1,1,a,p\n2,2,a,q\n3,3,a,p\n6,1,b,q\n7,2,b,p\n8,3,b,q\n";
        let t = DataTable::from_csv_str(csv, &schema()).unwrap();
        let fe = fit_fixed_effects(&t, "y", &["x"], "g").unwrap();
        assert!((fe.base.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fe.r2_within - 1.0).abs() < 1e-12);
        assert_eq!(fe.n_groups, 2);
        assert_eq!(fe.small_groups.len(), 2);
    }

    #[test]
    fn matches_dummy_regression() {
        let csv = "y,x,g,h\n1.3,1,a,p\n2.1,2,a,q\n2.2,3,a,p\n6,1,b,q\n7.7,2.5,b,p\n8,3,b,q\n4,0.5,c,p\n3.1,2,c,p\n";
        let t = DataTable::from_csv_str(csv, &schema()).unwrap();
        let fe = fit_fixed_effects(&t, "y", &["x"], "g").unwrap();
        let lsdv = fit_ols(&encode_design(&t, "y", &["x"], &["g"]).unwrap()).unwrap();
        let slope = lsdv.coefficient("x").unwrap();
        assert!((fe.base.coefficients[0] - slope).abs() < 1e-10);
        assert!((fe.base.std_errors[0] - lsdv.std_errors[1]).abs() < 1e-10);
    }

    #[test]
    fn within_constant_slope_is_rejected() {
        let csv = "y,x,g,h\n1,1,a,p\n2,1,a,q\n3,2,b,p\n5,2,b,q\n";
        let t = DataTable::from_csv_str(csv, &schema()).unwrap();
        assert!(matches!(
            fit_fixed_effects(&t, "y", &["x"], "g"),
            Err(Error::WithinCollinearity(ref v)) if v == "x"
        ));
    }

    #[test]
    fn group_means_explain_everything() {
        let csv = "y,x,g,h\n1,1,a,p\n1,2,a,q\n3,2,b,p\n3,5,b,q\n";
        let t = DataTable::from_csv_str(csv, &schema()).unwrap();
        let none: [&str; 0] = [];
        assert!(matches!(
            fit_fixed_effects(&t, "y", &none, "g"),
            Err(Error::DegenerateResponse(_))
        ));
    }

    #[test]
    fn joint_levels_observed_only() {
        let csv = "y,x,g,h\n1,1,a,p\n2,2,a,q\n3,3,b,p\n4,1,b,p\n5,1,,q\n";
        let t = DataTable::from_csv_str(csv, &schema()).unwrap();
        let joint = joint_category(&t, &["g", "h"]).unwrap();
        assert_eq!(joint.name, "g×h");
        assert_eq!(joint.levels().unwrap(), ["a×p", "a×q", "b×p"]);
        assert!(joint.is_missing(4));
    }
}
