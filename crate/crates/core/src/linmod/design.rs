use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, DataTable, Record};
use crate::error::{Error, Result};

pub const INTERCEPT: &str = "Constant";

/// Where a design column comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum TermSource {
    Intercept,
    Numeric { variable: String },
    Dummy { variable: String, level: String },
}

impl TermSource {
    pub fn label(&self) -> String {
        match self {
            TermSource::Intercept => INTERCEPT.to_string(),
            TermSource::Numeric { variable } => variable.clone(),
            TermSource::Dummy { variable, level } => format!("{variable}={level}"),
        }
    }

    /// The declared variable this term belongs to, if any.
    pub fn variable(&self) -> Option<&str> {
        match self {
            TermSource::Intercept => None,
            TermSource::Numeric { variable } | TermSource::Dummy { variable, .. } => Some(variable),
        }
    }

    /// Value of this term for a record; `None` when the record lacks the variable.
    pub fn evaluate(&self, record: &Record) -> Option<f64> {
        match self {
            TermSource::Intercept => Some(1.0),
            TermSource::Numeric { variable } => match record.get(variable) {
                Some(Cell::Number(v)) => Some(*v),
                _ => None,
            },
            TermSource::Dummy { variable, level } => match record.get(variable) {
                Some(Cell::Level(l)) => Some(if l == level { 1.0 } else { 0.0 }),
                _ => None,
            },
        }
    }
}

/// Design matrix (column-major) with its response vector.
#[derive(Debug, Clone)]
pub struct Design {
    pub response: String,
    pub terms: Vec<TermSource>,
    pub columns: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Design {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn has_intercept(&self) -> bool {
        self.terms.contains(&TermSource::Intercept)
    }
}

fn require_complete(table: &DataTable, name: &str) -> Result<usize> {
    let idx = table.column_index(name)?;
    let col = &table.columns()[idx];
    if let Some(row) = col.missing.iter().position(|&m| m) {
        return Err(Error::InsufficientData(format!(
            "\"{}\" is missing at row {}; filter complete cases first",
            col.name,
            row + 1
        )));
    }
    Ok(idx)
}

/// Builds an intercept-first design: numeric predictors as given, then each
/// categorical expanded to one indicator per non-baseline level. The baseline
/// is the first level observed in `table`.
pub fn encode_design<S: AsRef<str>, T: AsRef<str>>(
    table: &DataTable,
    response: &str,
    predictors: &[S],
    dummies: &[T],
) -> Result<Design> {
    let n = table.n_rows();
    require_complete(table, response)?;
    let rcol = table.numeric(response)?;
    let y = rcol.numeric_values().expect("numeric").to_vec();

    let mut terms = vec![TermSource::Intercept];
    let mut columns = vec![vec![1.0; n]];

    for p in predictors {
        require_complete(table, p.as_ref())?;
        let col = table.numeric(p.as_ref())?;
        terms.push(TermSource::Numeric {
            variable: col.name.clone(),
        });
        columns.push(col.numeric_values().expect("numeric").to_vec());
    }

    for d in dummies {
        require_complete(table, d.as_ref())?;
        let col = table.categorical(d.as_ref())?;
        let observed = col.observed_levels();
        if observed.len() < 2 {
            return Err(Error::DegenerateCategory(col.name.clone()));
        }
        for level in &observed[1..] {
            let values = (0..n)
                .map(|r| if col.level(r) == Some(level.as_str()) { 1.0 } else { 0.0 })
                .collect();
            terms.push(TermSource::Dummy {
                variable: col.name.clone(),
                level: level.clone(),
            });
            columns.push(values);
        }
    }

    Ok(Design {
        response: rcol.name.clone(),
        terms,
        columns,
        y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Schema, VariableKind::*, VariableSpec};

    fn table() -> DataTable {
        let schema = Schema::new(vec![
            VariableSpec::new("y", Response),
            VariableSpec::new("a", Continuous),
            VariableSpec::new("b", Continuous),
            VariableSpec::new("model", Categorical),
            VariableSpec::new("region", Categorical),
        ])
        .unwrap();
        let csv = "y,a,b,model,region\n\
                   1,1,2,B2B,N\n2,2,1,B2C,S\n3,1,1,B2G,E\n4,3,2,B2B,W\n5,2,2,B2C,N\n6,1,3,B2G,S\n";
        DataTable::from_csv_str(csv, &schema).unwrap()
    }

    #[test]
    fn k_minus_one_indicators() {
        let d = encode_design(&table(), "y", &[] as &[&str], &["model"]).unwrap();
        assert_eq!(d.width(), 3);
        let labels: Vec<_> = d.terms.iter().map(TermSource::label).collect();
        assert_eq!(labels, ["Constant", "model=B2C", "model=B2G"]);
        assert_eq!(d.columns[1], [0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn intercept_only() {
        let none: [&str; 0] = [];
        let d = encode_design(&table(), "y", &none, &none).unwrap();
        assert_eq!(d.width(), 1);
    }

    #[test]
    fn width_formula() {
        // 1 + 2 continuous + (3-1) + (4-1)
        let d = encode_design(&table(), "y", &["a", "b"], &["model", "region"]).unwrap();
        assert_eq!(d.width(), 8);
    }

    #[test]
    fn single_level_categorical_is_degenerate() {
        let t = table().complete_cases(&["y"]).unwrap();
        let rows: Vec<usize> = vec![0, 3];
        let sub = t.select_rows(&rows);
        let err = encode_design(&sub, "y", &[] as &[&str], &["model"]).unwrap_err();
        assert!(matches!(err, Error::DegenerateCategory(ref v) if v == "model"));
    }
}
