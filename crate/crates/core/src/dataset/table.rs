use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::schema::{Schema, Transform, VariableKind, VariableSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ColumnData {
    /// Missing cells hold NaN.
    Numeric { values: Vec<f64> },
    /// Codes index into `levels`; missing cells hold 0 and are masked.
    Categorical { levels: Vec<String>, codes: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    /// Name of the declared variable this column was derived from.
    pub source: String,
    pub kind: VariableKind,
    /// Transform that has been applied to produce the stored values.
    pub applied: Transform,
    pub units: String,
    pub data: ColumnData,
    pub missing: Vec<bool>,
}

impl Column {
    pub fn numeric(spec: &VariableSpec, values: Vec<Option<f64>>) -> Self {
        let missing = values.iter().map(Option::is_none).collect();
        let values = values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        Self {
            name: spec.name.clone(),
            source: spec.name.clone(),
            kind: spec.kind,
            applied: Transform::None,
            units: spec.units.clone(),
            data: ColumnData::Numeric { values },
            missing,
        }
    }

    /// Builds a categorical column, recording levels in first-appearance order.
    pub fn categorical<S: AsRef<str>>(spec: &VariableSpec, cells: &[Option<S>]) -> Self {
        let mut levels: Vec<String> = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut codes = Vec::with_capacity(cells.len());
        let mut missing = Vec::with_capacity(cells.len());
        for cell in cells {
            match cell {
                Some(s) => {
                    let s = s.as_ref();
                    let code = *index.entry(s.to_string()).or_insert_with(|| {
                        levels.push(s.to_string());
                        (levels.len() - 1) as u32
                    });
                    codes.push(code);
                    missing.push(false);
                }
                None => {
                    codes.push(0);
                    missing.push(true);
                }
            }
        }
        Self {
            name: spec.name.clone(),
            source: spec.name.clone(),
            kind: VariableKind::Categorical,
            applied: Transform::None,
            units: spec.units.clone(),
            data: ColumnData::Categorical { levels, codes },
            missing,
        }
    }

    pub fn len(&self) -> usize {
        self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn is_missing(&self, row: usize) -> bool {
        self.missing[row]
    }

    pub fn numeric_values(&self) -> Option<&[f64]> {
        match &self.data {
            ColumnData::Numeric { values } => Some(values),
            ColumnData::Categorical { .. } => None,
        }
    }

    pub fn value(&self, row: usize) -> Option<f64> {
        match &self.data {
            ColumnData::Numeric { values } if !self.missing[row] => Some(values[row]),
            _ => None,
        }
    }

    pub fn level(&self, row: usize) -> Option<&str> {
        match &self.data {
            ColumnData::Categorical { levels, codes } if !self.missing[row] => {
                Some(levels[codes[row] as usize].as_str())
            }
            _ => None,
        }
    }

    pub fn levels(&self) -> Option<&[String]> {
        match &self.data {
            ColumnData::Categorical { levels, .. } => Some(levels),
            ColumnData::Numeric { .. } => None,
        }
    }

    /// Levels that occur among non-missing rows, in first-appearance order.
    pub fn observed_levels(&self) -> Vec<String> {
        let mut seen = Vec::new();
        if let ColumnData::Categorical { levels, codes } = &self.data {
            let mut flag = vec![false; levels.len()];
            for (row, &c) in codes.iter().enumerate() {
                if !self.missing[row] && !flag[c as usize] {
                    flag[c as usize] = true;
                    seen.push(levels[c as usize].clone());
                }
            }
        }
        seen
    }

    fn cell_text(&self, row: usize) -> String {
        if self.missing[row] {
            return String::new();
        }
        match &self.data {
            ColumnData::Numeric { values } => format!("{}", values[row]),
            ColumnData::Categorical { levels, codes } => levels[codes[row] as usize].clone(),
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        let data = match &self.data {
            ColumnData::Numeric { values } => ColumnData::Numeric {
                values: rows.iter().map(|&r| values[r]).collect(),
            },
            ColumnData::Categorical { levels, codes } => ColumnData::Categorical {
                levels: levels.clone(),
                codes: rows.iter().map(|&r| codes[r]).collect(),
            },
        };
        Column {
            data,
            missing: rows.iter().map(|&r| self.missing[r]).collect(),
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> Column {
        Column {
            name: self.name.clone(),
            source: self.source.clone(),
            kind: self.kind,
            applied: self.applied,
            units: self.units.clone(),
            data: ColumnData::Numeric { values: Vec::new() },
            missing: Vec::new(),
        }
    }
}

/// Immutable columnar table of deal records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    n_rows: usize,
    columns: Vec<Column>,
    provenance: String,
}

impl DataTable {
    pub fn new(columns: Vec<Column>, provenance: impl Into<String>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, Column::len);
        for (i, c) in columns.iter().enumerate() {
            if c.len() != n_rows {
                return Err(Error::Schema(format!(
                    "column \"{}\" has {} rows, expected {n_rows}",
                    c.name,
                    c.len()
                )));
            }
            if let ColumnData::Categorical { levels, codes } = &c.data {
                if codes.len() != n_rows
                    || codes
                        .iter()
                        .zip(&c.missing)
                        .any(|(&code, &m)| !m && code as usize >= levels.len())
                {
                    return Err(Error::Schema(format!(
                        "categorical \"{}\" has codes outside its level list",
                        c.name
                    )));
                }
            }
            if let ColumnData::Numeric { values } = &c.data {
                if values.len() != n_rows {
                    return Err(Error::Schema(format!("column \"{}\" length", c.name)));
                }
            }
            if columns[..i].iter().any(|d| d.name == c.name) {
                return Err(Error::Schema(format!("duplicate column \"{}\"", c.name)));
            }
        }
        Ok(Self {
            n_rows,
            columns,
            provenance: provenance.into(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Looks a column up by its current name, falling back to the name of the
    /// variable it was derived from (so `revenue` finds `ln_revenue`).
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .or_else(|| self.columns.iter().position(|c| c.source == name))
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        Ok(&self.columns[self.column_index(name)?])
    }

    pub fn numeric(&self, name: &str) -> Result<&Column> {
        let c = self.column(name)?;
        if !c.kind.is_numeric() {
            return Err(Error::WrongKind {
                variable: c.name.clone(),
                expected: "numeric",
                found: c.kind.as_str(),
            });
        }
        Ok(c)
    }

    pub fn categorical(&self, name: &str) -> Result<&Column> {
        let c = self.column(name)?;
        if c.kind != VariableKind::Categorical {
            return Err(Error::WrongKind {
                variable: c.name.clone(),
                expected: "categorical",
                found: c.kind.as_str(),
            });
        }
        Ok(c)
    }

    pub fn select_rows(&self, rows: &[usize]) -> DataTable {
        DataTable {
            n_rows: rows.len(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Returns a new table with `column` appended, or replacing a column of the same name.
    pub fn with_column(&self, column: Column) -> Result<DataTable> {
        let mut columns = self.columns.clone();
        match columns.iter().position(|c| c.name == column.name) {
            Some(i) => columns[i] = column,
            None => columns.push(column),
        }
        DataTable::new(columns, self.provenance.clone())
    }

    /// Reads a header-first CSV. Empty cells are missing; columns not in the
    /// schema are ignored.
    pub fn load(path: impl AsRef<Path>, schema: &Schema) -> Result<DataTable> {
        let path = path.as_ref();
        let reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)?;
        Self::read(reader, schema, path.display().to_string())
    }

    pub fn from_csv_str(text: &str, schema: &Schema) -> Result<DataTable> {
        let reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        Self::read(reader, schema, "<memory>".to_string())
    }

    fn read<R: std::io::Read>(
        mut reader: csv::Reader<R>,
        schema: &Schema,
        provenance: String,
    ) -> Result<DataTable> {
        let headers = reader.headers()?.clone();
        let mut positions = Vec::with_capacity(schema.variables().len());
        for v in schema.variables() {
            let pos = headers.iter().position(|h| h.trim() == v.name).ok_or_else(|| {
                Error::Schema(format!("schema variable \"{}\" not found in CSV header", v.name))
            })?;
            positions.push(pos);
        }
        let mut raw: Vec<Vec<Option<String>>> = vec![Vec::new(); positions.len()];
        for record in reader.records() {
            let record = record?;
            for (slot, &pos) in raw.iter_mut().zip(&positions) {
                let cell = record.get(pos).unwrap_or("");
                slot.push(if cell.is_empty() {
                    None
                } else {
                    Some(cell.to_string())
                });
            }
        }
        let mut columns = Vec::with_capacity(positions.len());
        for (spec, cells) in schema.variables().iter().zip(raw) {
            let column = if spec.kind == VariableKind::Categorical {
                Column::categorical(spec, &cells)
            } else {
                let mut values = Vec::with_capacity(cells.len());
                for (i, cell) in cells.iter().enumerate() {
                    values.push(match cell {
                        None => None,
                        Some(s) => Some(s.trim().parse::<f64>().map_err(|_| Error::Parse {
                            row: i + 1,
                            column: spec.name.clone(),
                            message: format!("cannot parse \"{s}\" as a number"),
                        })?),
                    });
                }
                Column::numeric(spec, values)
            };
            columns.push(column);
        }
        DataTable::new(columns, provenance)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in 0..self.n_rows {
            w.write_record(self.columns.iter().map(|c| c.cell_text(row)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }

    /// Applies each declared transform, returning a new table. Log-transformed
    /// columns are renamed `ln_<name>`; missing cells stay missing.
    pub fn apply_transforms(&self, schema: &Schema) -> Result<DataTable> {
        let mut columns = self.columns.clone();
        for spec in schema.variables() {
            if spec.transform == Transform::None {
                continue;
            }
            let idx = self
                .columns
                .iter()
                .position(|c| c.name == spec.name)
                .ok_or_else(|| Error::UnknownVariable(spec.name.clone()))?;
            let col = &self.columns[idx];
            let values = col.numeric_values().ok_or_else(|| Error::WrongKind {
                variable: col.name.clone(),
                expected: "numeric",
                found: col.kind.as_str(),
            })?;
            let mut out = Vec::with_capacity(values.len());
            for (row, (&v, &m)) in values.iter().zip(&col.missing).enumerate() {
                if m {
                    out.push(f64::NAN);
                } else if v > 0.0 {
                    out.push(v.ln());
                } else {
                    return Err(Error::Domain {
                        row: row + 1,
                        variable: col.name.clone(),
                        message: format!("natural_log of nonpositive value {v}"),
                    });
                }
            }
            columns[idx] = Column {
                name: spec.transform.rename(&col.name),
                applied: spec.transform,
                data: ColumnData::Numeric { values: out },
                ..col.clone()
            };
        }
        DataTable::new(columns, self.provenance.clone())
    }

    /// Keeps rows with no missing cell among `vars`, preserving order.
    pub fn complete_cases<S: AsRef<str>>(&self, vars: &[S]) -> Result<DataTable> {
        let idx = vars
            .iter()
            .map(|v| self.column_index(v.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<usize> = (0..self.n_rows)
            .filter(|&r| idx.iter().all(|&c| !self.columns[c].missing[r]))
            .collect();
        Ok(self.select_rows(&rows))
    }

    /// One record per row, keyed by column name.
    pub fn record(&self, row: usize) -> super::Record {
        let mut rec = super::Record::new();
        for c in &self.columns {
            let cell = match &c.data {
                _ if c.missing[row] => super::Cell::Missing,
                ColumnData::Numeric { values } => super::Cell::Number(values[row]),
                ColumnData::Categorical { levels, codes } => {
                    super::Cell::Level(levels[codes[row] as usize].clone())
                }
            };
            rec.insert(c.name.clone(), cell);
        }
        rec
    }
}
