//! Variable declarations, CSV ingestion, transforms and synthetic deal data.

mod record;
mod schema;
mod synth;
mod table;

pub use record::{record_from_json, Cell, Record};
pub use schema::{Schema, Transform, VariableKind, VariableSpec};
pub use synth::{level_name, planted_effects, synth_deals, synth_schema, CategoricalEffect, SynthConfig};
pub use table::{Column, ColumnData, DataTable};
