use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnData, DataTable, Transform, VariableKind};
use crate::error::{Error, Result};

pub(crate) const MISSING: u32 = u32::MAX;
pub(crate) const UNKNOWN: u32 = u32::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorKind {
    Numeric,
    Categorical,
}

/// A tree predictor as seen at training time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorInfo {
    pub name: String,
    /// Declared variable the column was derived from.
    pub source: String,
    pub transform: Transform,
    pub kind: PredictorKind,
    /// Training level list for categoricals; split rules index into it.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<String>,
}

/// Column values in the encoding trees route on: NaN for a missing number,
/// `MISSING`/`UNKNOWN` sentinels for categorical codes.
#[derive(Debug, Clone)]
pub(crate) enum FeatureValues {
    Numeric(Vec<f64>),
    Categorical(Vec<u32>),
}

#[derive(Debug, Clone)]
pub(crate) struct Features {
    pub predictors: Vec<PredictorInfo>,
    pub values: Vec<FeatureValues>,
}

/// Response plus predictors extracted from a table for growth.
#[derive(Debug, Clone)]
pub(crate) struct TrainingSet {
    pub response: String,
    pub response_transform: Transform,
    pub y: Vec<f64>,
    pub features: Features,
}

impl Features {
    /// Extracts predictors by name, taking level lists from the table.
    pub fn from_table<S: AsRef<str>>(table: &DataTable, predictors: &[S]) -> Result<Features> {
        let mut infos = Vec::with_capacity(predictors.len());
        let mut values = Vec::with_capacity(predictors.len());
        for p in predictors {
            let col = table.column(p.as_ref())?;
            if infos.iter().any(|i: &PredictorInfo| i.name == col.name) {
                return Err(Error::Config(format!("predictor \"{}\" listed twice", col.name)));
            }
            let (kind, levels, vals) = match (&col.data, col.kind) {
                (ColumnData::Numeric { values }, k) if k != VariableKind::Categorical => (
                    PredictorKind::Numeric,
                    Vec::new(),
                    FeatureValues::Numeric(
                        values
                            .iter()
                            .zip(&col.missing)
                            .map(|(&v, &m)| if m { f64::NAN } else { v })
                            .collect(),
                    ),
                ),
                (ColumnData::Categorical { levels, codes }, _) => (
                    PredictorKind::Categorical,
                    levels.clone(),
                    FeatureValues::Categorical(
                        codes
                            .iter()
                            .zip(&col.missing)
                            .map(|(&c, &m)| if m { MISSING } else { c })
                            .collect(),
                    ),
                ),
                _ => {
                    return Err(Error::Schema(format!(
                        "column \"{}\" has inconsistent kind",
                        col.name
                    )))
                }
            };
            infos.push(PredictorInfo {
                name: col.name.clone(),
                source: col.source.clone(),
                transform: col.applied,
                kind,
                levels,
            });
            values.push(vals);
        }
        Ok(Features {
            predictors: infos,
            values,
        })
    }

    /// Extracts the columns a fitted model expects, re-coding categorical
    /// levels into the model's level lists (unseen levels become `UNKNOWN`).
    pub fn for_model(table: &DataTable, predictors: &[PredictorInfo]) -> Result<Features> {
        let names: Vec<&str> = predictors.iter().map(|p| p.name.as_str()).collect();
        let mut f = Features::from_table(table, &names)?;
        for (i, info) in predictors.iter().enumerate() {
            if f.predictors[i].kind != info.kind {
                return Err(Error::WrongKind {
                    variable: info.name.clone(),
                    expected: match info.kind {
                        PredictorKind::Numeric => "numeric",
                        PredictorKind::Categorical => "categorical",
                    },
                    found: match f.predictors[i].kind {
                        PredictorKind::Numeric => "numeric",
                        PredictorKind::Categorical => "categorical",
                    },
                });
            }
            if let FeatureValues::Categorical(codes) = &mut f.values[i] {
                let table_levels = &f.predictors[i].levels;
                let map: Vec<u32> = table_levels
                    .iter()
                    .map(|l| {
                        info.levels
                            .iter()
                            .position(|m| m == l)
                            .map_or(UNKNOWN, |p| p as u32)
                    })
                    .collect();
                for c in codes.iter_mut() {
                    if *c != MISSING {
                        *c = map[*c as usize];
                    }
                }
            }
        }
        f.predictors = predictors.to_vec();
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.predictors.len()
    }
}

impl TrainingSet {
    pub fn from_table<S: AsRef<str>>(table: &DataTable, response: &str, predictors: &[S]) -> Result<TrainingSet> {
        let rcol = table.numeric(response)?;
        if let Some(row) = rcol.missing.iter().position(|&m| m) {
            return Err(Error::MissingResponse(row + 1));
        }
        let features = Features::from_table(table, predictors)?;
        if features.predictors.iter().any(|p| p.name == rcol.name) {
            return Err(Error::Config(format!(
                "response \"{}\" cannot also be a predictor",
                rcol.name
            )));
        }
        Ok(TrainingSet {
            response: rcol.name.clone(),
            response_transform: rcol.applied,
            y: rcol.numeric_values().expect("numeric").to_vec(),
            features,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }
}

/// Access to one row's predictor values for routing.
pub(crate) trait RowValues {
    fn number(&self, var: usize) -> Option<f64>;
    /// Level code, `MISSING` or `UNKNOWN`.
    fn code(&self, var: usize) -> u32;
}

pub(crate) struct FeatureRow<'a> {
    pub features: &'a Features,
    pub row: usize,
}

impl RowValues for FeatureRow<'_> {
    fn number(&self, var: usize) -> Option<f64> {
        match &self.features.values[var] {
            FeatureValues::Numeric(v) => {
                let x = v[self.row];
                (!x.is_nan()).then_some(x)
            }
            FeatureValues::Categorical(_) => None,
        }
    }

    fn code(&self, var: usize) -> u32 {
        match &self.features.values[var] {
            FeatureValues::Categorical(c) => c[self.row],
            FeatureValues::Numeric(_) => MISSING,
        }
    }
}
