use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableKind {
    Response,
    Continuous,
    Categorical,
}

impl VariableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariableKind::Response => "response",
            VariableKind::Continuous => "continuous",
            VariableKind::Categorical => "categorical",
        }
    }

    pub fn is_numeric(self) -> bool {
        !matches!(self, VariableKind::Categorical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    None,
    NaturalLog,
}

impl Transform {
    /// Column name after the transform has been applied.
    pub fn rename(self, name: &str) -> String {
        match self {
            Transform::None => name.to_string(),
            Transform::NaturalLog => format!("ln_{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
    #[serde(default)]
    pub transform: Transform,
    #[serde(default)]
    pub units: String,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, kind: VariableKind) -> Self {
        Self {
            name: name.into(),
            kind,
            transform: Transform::None,
            units: String::new(),
        }
    }

    pub fn log(mut self) -> Self {
        self.transform = Transform::NaturalLog;
        self
    }

    pub fn units(mut self, units: impl Into<String>) -> Self {
        self.units = units.into();
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpecEntry {
    kind: VariableKind,
    #[serde(default)]
    transform: Transform,
    #[serde(default)]
    units: String,
}

/// Ordered set of variable declarations with exactly one response.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    variables: Vec<VariableSpec>,
}

impl Schema {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        let responses = variables
            .iter()
            .filter(|v| v.kind == VariableKind::Response)
            .count();
        if responses != 1 {
            return Err(Error::Schema(format!(
                "expected exactly one response variable, found {responses}"
            )));
        }
        for (i, v) in variables.iter().enumerate() {
            if v.name.is_empty() {
                return Err(Error::Schema("empty variable name".into()));
            }
            if variables[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::Schema(format!("duplicate variable \"{}\"", v.name)));
            }
            if v.kind == VariableKind::Categorical && v.transform != Transform::None {
                return Err(Error::Schema(format!(
                    "natural_log transform on categorical \"{}\"",
                    v.name
                )));
            }
        }
        Ok(Self { variables })
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn get(&self, name: &str) -> Option<&VariableSpec> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn response(&self) -> &VariableSpec {
        self.variables
            .iter()
            .find(|v| v.kind == VariableKind::Response)
            .expect("schema invariant: one response")
    }

    /// Copy of the schema with every transform set to `none`.
    pub fn without_transforms(&self) -> Schema {
        let variables = self
            .variables
            .iter()
            .map(|v| VariableSpec {
                transform: Transform::None,
                ..v.clone()
            })
            .collect();
        Schema { variables }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let map: IndexMap<String, SpecEntry> = serde_json::from_str(text)?;
        Self::new(
            map.into_iter()
                .map(|(name, e)| VariableSpec {
                    name,
                    kind: e.kind,
                    transform: e.transform,
                    units: e.units,
                })
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let map: IndexMap<&str, SpecEntry> = self
            .variables
            .iter()
            .map(|v| {
                (
                    v.name.as_str(),
                    SpecEntry {
                        kind: v.kind,
                        transform: v.transform,
                        units: v.units.clone(),
                    },
                )
            })
            .collect();
        serde_json::to_string_pretty(&map).expect("schema serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
