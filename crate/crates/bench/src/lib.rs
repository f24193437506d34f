//! Shared fixtures for the criterion benches.

use segval_core::dataset::{synth_deals, synth_schema, CategoricalEffect, SynthConfig};
use segval_core::DataTable;

/// Logged synthetic deals with `categories` levels in one extra categorical.
pub fn deals(n: usize, categories: usize, seed: u64) -> DataTable {
    let mut config = SynthConfig {
        n,
        ..SynthConfig::default()
    };
    config.categoricals.push(CategoricalEffect {
        name: "city".into(),
        levels: categories,
        effect_sd: 0.4,
        revenue_shift: 0.0,
    });
    synth_deals(&config, seed)
        .and_then(|t| t.apply_transforms(&synth_schema(&config)))
        .expect("synthetic deals")
}

/// Level codes and responses for a categorical split search over `k` levels.
pub fn categorical_instance(n: usize, k: usize) -> (Vec<usize>, Vec<f64>) {
    let levels: Vec<usize> = (0..n).map(|i| (i * 7 + i / 3) % k).collect();
    let y = levels
        .iter()
        .enumerate()
        .map(|(i, &l)| (l * l % 11) as f64 + ((i * 13) % 5) as f64 * 0.1)
        .collect();
    (levels, y)
}
