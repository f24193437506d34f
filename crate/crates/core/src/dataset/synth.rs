use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::schema::{Schema, VariableKind, VariableSpec};
use super::table::{Column, DataTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalEffect {
    pub name: String,
    pub levels: usize,
    /// Standard deviation of the planted per-level effects on ln valuation.
    pub effect_sd: f64,
    /// Multiplier linking a level's effect to the mean of ln revenue in that level.
    #[serde(default)]
    pub revenue_shift: f64,
}

/// Generator settings for synthetic deal data.
///
/// ln valuation = intercept + revenue_coef·ln revenue + beta_coef·ln beta
/// + crp_coef·crp + Σ level effects + N(0, noise_sd²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n: usize,
    pub intercept: f64,
    pub revenue_coef: f64,
    pub beta_coef: f64,
    pub crp_coef: f64,
    pub noise_sd: f64,
    pub categoricals: Vec<CategoricalEffect>,
    /// Fraction of rows whose revenue cell is blanked after generation.
    pub missing_revenue: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            intercept: 7.9,
            revenue_coef: 0.65,
            beta_coef: -1.1,
            crp_coef: -30.0,
            noise_sd: 1.0,
            categoricals: vec![
                CategoricalEffect {
                    name: "sector".into(),
                    levels: 6,
                    effect_sd: 0.5,
                    revenue_shift: 0.0,
                },
                CategoricalEffect {
                    name: "country".into(),
                    levels: 5,
                    effect_sd: 0.3,
                    revenue_shift: 0.0,
                },
            ],
            missing_revenue: 0.0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Config("synthetic n must be at least 1".into()));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::Config("noise standard deviation must be nonnegative".into()));
        }
        if !(0.0..=1.0).contains(&self.missing_revenue) {
            return Err(Error::Config("missing_revenue must lie in [0, 1]".into()));
        }
        for c in &self.categoricals {
            if c.levels < 1 || !(c.effect_sd >= 0.0) {
                return Err(Error::Config(format!(
                    "categorical \"{}\" needs levels >= 1 and effect_sd >= 0",
                    c.name
                )));
            }
        }
        Ok(())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn level_name(var: &str, level: usize) -> String {
    format!("{var}_{:02}", level + 1)
}

/// Planted level effects for every categorical, in config order.
pub fn planted_effects(config: &SynthConfig, seed: u64) -> Vec<Vec<f64>> {
    config
        .categoricals
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut rng = stream(seed, 1 + i as u64);
            let normal = Normal::new(0.0, c.effect_sd.max(0.0)).expect("finite sd");
            (0..c.levels).map(|_| normal.sample(&mut rng)).collect()
        })
        .collect()
}

/// Schema describing the generator's columns: valuation, revenue and beta
/// carry natural-log transforms, the country risk premium is a fraction.
pub fn synth_schema(config: &SynthConfig) -> Schema {
    let mut vars = vec![
        VariableSpec::new("valuation", VariableKind::Response)
            .log()
            .units("EUR"),
        VariableSpec::new("revenue", VariableKind::Continuous)
            .log()
            .units("EUR"),
        VariableSpec::new("beta", VariableKind::Continuous)
            .log()
            .units("unlevered sectoral beta"),
        VariableSpec::new("crp", VariableKind::Continuous).units("fraction"),
    ];
    for c in &config.categoricals {
        vars.push(VariableSpec::new(c.name.clone(), VariableKind::Categorical));
    }
    Schema::new(vars).expect("synthetic schema is valid")
}

/// Generates raw (untransformed) deal records; a pure function of `(config, seed)`.
pub fn synth_deals(config: &SynthConfig, seed: u64) -> Result<DataTable> {
    config.validate()?;
    let effects = planted_effects(config, seed);
    let schema = synth_schema(config);
    let mut rng = stream(seed, 0);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let n = config.n;
    let mut valuation = Vec::with_capacity(n);
    let mut revenue = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut crp = Vec::with_capacity(n);
    let mut levels: Vec<Vec<Option<String>>> = vec![Vec::with_capacity(n); config.categoricals.len()];

    for _ in 0..n {
        let mut category_effect = 0.0;
        let mut revenue_shift = 0.0;
        for (ci, c) in config.categoricals.iter().enumerate() {
            let level = rng.random_range(0..c.levels);
            category_effect += effects[ci][level];
            revenue_shift += c.revenue_shift * effects[ci][level];
            levels[ci].push(Some(level_name(&c.name, level)));
        }
        let ln_revenue = 12.0 + revenue_shift + 1.5 * std_normal.sample(&mut rng);
        let ln_beta = 0.25 * std_normal.sample(&mut rng);
        let premium = rng.random_range(0.0..0.06);
        let noise = config.noise_sd * std_normal.sample(&mut rng);
        let hide_revenue = config.missing_revenue > 0.0 && rng.random::<f64>() < config.missing_revenue;

        let ln_valuation = config.intercept
            + config.revenue_coef * ln_revenue
            + config.beta_coef * ln_beta
            + config.crp_coef * premium
            + category_effect
            + noise;
        valuation.push(Some(ln_valuation.exp()));
        revenue.push(if hide_revenue { None } else { Some(ln_revenue.exp()) });
        beta.push(Some(ln_beta.exp()));
        crp.push(Some(premium));
    }

    let specs = schema.variables();
    let mut columns = vec![
        Column::numeric(&specs[0], valuation),
        Column::numeric(&specs[1], revenue),
        Column::numeric(&specs[2], beta),
        Column::numeric(&specs[3], crp),
    ];
    for (spec, cells) in specs[4..].iter().zip(&levels) {
        columns.push(Column::categorical(spec, cells));
    }
    DataTable::new(columns, format!("synthetic seed={seed}"))
}
