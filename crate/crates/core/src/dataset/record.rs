use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One cell of a prediction record. JSON numbers, strings and `null` map to
/// the three variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Level(String),
    Missing,
}

/// A single deal keyed by variable name.
pub type Record = BTreeMap<String, Cell>;

pub fn record_from_json(text: &str) -> crate::Result<Record> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_cells() {
        let r = record_from_json(r#"{"revenue": null, "beta": 1.2, "sector": "B2B"}"#).unwrap();
        assert_eq!(r["revenue"], Cell::Missing);
        assert_eq!(r["beta"], Cell::Number(1.2));
        assert_eq!(r["sector"], Cell::Level("B2B".into()));
    }
}
