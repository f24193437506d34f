use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use segval_core::cart::variable_importance;
use segval_core::dataset::{record_from_json, synth_deals, synth_schema, ColumnData, SynthConfig};
use segval_core::report::{
    compare_models, cp_report, export_tree_dot, forest_summary_json, regression_table_json, render_block_scorecard,
    render_cp_table, render_forest_summary, render_regression_table, render_segment_scorecard, ModelFit, TreeMeta,
};
use segval_core::{DataTable, Schema};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Family, ModelSpec, RunConfig};
use crate::fitting::{
    comparison_row, fit_fe_model, fit_forest_model, fit_ols_model, fit_scorecard_model, fit_tree_model, ScorecardFit,
};
use crate::predict::{predict, SavedModel};
use crate::{Command, Options};

pub const SEED_REQUIRED: &str = "a seed is required: pass --seed or set \"seed\" in the config";
const DEFAULT_OUT: &str = "out";

struct Run<'a> {
    config: RunConfig,
    options: &'a Options,
    stdout: String,
}

pub fn run(command: Command, options: &Options) -> Result<String> {
    let config = match &options.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut run = Run {
        config,
        options,
        stdout: String::new(),
    };
    match command {
        Command::Ingest => run.ingest()?,
        Command::Synth => run.synth()?,
        Command::FitOls => run.fit_ols()?,
        Command::FitFe => run.fit_fe()?,
        Command::FitTree => run.fit_tree()?,
        Command::FitForest => run.fit_forest()?,
        Command::FitScorecard => run.fit_scorecard()?,
        Command::CpTable => run.cp_table()?,
        Command::Importance => run.importance()?,
        Command::Predict => run.predict()?,
        Command::Compare => run.compare()?,
        Command::ExportDot => run.export_dot()?,
    }
    Ok(run.stdout)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn pretty<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn file_stem(path: &Path) -> String {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("model");
    name.strip_suffix(".json").unwrap_or(name).to_string()
}

impl Run<'_> {
    fn seed(&self) -> Option<u64> {
        self.options.seed.or(self.config.seed)
    }

    fn require_seed(&self) -> Result<u64> {
        self.seed().context(SEED_REQUIRED)
    }

    fn raw(&self) -> bool {
        self.options.no_log || self.config.raw
    }

    fn out_dir(&self) -> PathBuf {
        self.options
            .out
            .clone()
            .or_else(|| self.config.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    fn write(&self, file: &str, contents: &str) -> Result<()> {
        let dir = self.out_dir();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(file);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    fn print(&mut self, text: &str) {
        if !self.stdout.is_empty() && !self.stdout.ends_with("\n\n") {
            self.stdout.push('\n');
        }
        self.stdout.push_str(text);
    }

    fn data_path(&self) -> Option<PathBuf> {
        self.options.data.clone().or_else(|| self.config.data.clone())
    }

    fn synth_config(&self) -> SynthConfig {
        self.config.synth.clone().unwrap_or_default()
    }

    /// Declared schema, before the raw/log choice is applied.
    fn declared_schema(&self) -> Result<Schema> {
        if let Some(path) = self.options.schema.as_ref().or(self.config.schema.as_ref()) {
            return Schema::load(path).with_context(|| format!("loading schema {}", path.display()));
        }
        if self.data_path().is_none() {
            return Ok(synth_schema(&self.synth_config()));
        }
        bail!("no schema: pass --schema or set \"schema\" in the config")
    }

    fn schema(&self) -> Result<Schema> {
        let schema = self.declared_schema()?;
        Ok(if self.raw() { schema.without_transforms() } else { schema })
    }

    /// The modelling table: loaded or synthesised, then transformed.
    fn table(&self) -> Result<(DataTable, Schema)> {
        let schema = self.schema()?;
        let raw = match self.data_path() {
            Some(path) => DataTable::load(&path, &schema).with_context(|| format!("loading {}", path.display()))?,
            None => synth_deals(&self.synth_config(), self.require_seed()?)?,
        };
        Ok((raw.apply_transforms(&schema)?, schema))
    }

    fn models(&self, family: Family) -> Result<Vec<ModelSpec>> {
        let models = self.config.models_of(family);
        if models.is_empty() {
            bail!("the config declares no {} models", family.as_str());
        }
        Ok(models.into_iter().cloned().collect())
    }

    fn saved_model(&self) -> Result<(SavedModel, PathBuf)> {
        let path = self.options.model.clone().context("--model is required")?;
        let model = SavedModel::from_json(&read(&path)?).with_context(|| format!("loading model {}", path.display()))?;
        Ok((model, path))
    }

    fn ingest(&mut self) -> Result<()> {
        let (table, _) = self.table()?;
        let mut rows = vec![vec![
            "Column".to_string(),
            "Kind".into(),
            "Missing".into(),
            "Levels".into(),
            "Min".into(),
            "Max".into(),
        ]];
        let mut summary = Vec::new();
        for col in table.columns() {
            let missing = col.missing.iter().filter(|&&m| m).count();
            let (levels, range) = match &col.data {
                ColumnData::Categorical { .. } => (Some(col.observed_levels().len()), None),
                ColumnData::Numeric { values } => {
                    let seen = values.iter().zip(&col.missing).filter(|(_, &m)| !m).map(|(v, _)| *v);
                    let range = seen.fold(None, |acc: Option<(f64, f64)>, v| {
                        Some(acc.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v))))
                    });
                    (None, range)
                }
            };
            rows.push(vec![
                col.name.clone(),
                col.kind.as_str().to_string(),
                missing.to_string(),
                levels.map_or(String::new(), |l| l.to_string()),
                range.map_or(String::new(), |r| format!("{:.4}", r.0)),
                range.map_or(String::new(), |r| format!("{:.4}", r.1)),
            ]);
            summary.push(json!({
                "name": col.name,
                "source": col.source,
                "kind": col.kind.as_str(),
                "missing": missing,
                "levels": levels,
                "min": range.map(|r| r.0),
                "max": range.map(|r| r.1),
            }));
        }
        let mut text = format!("Rows: {}\n", table.n_rows());
        text.push_str(&segval_core::report::align(&rows));
        self.write("data.csv", &table.to_csv_string())?;
        self.write("ingest.txt", &text)?;
        self.write("ingest.json", &pretty(&json!({"rows": table.n_rows(), "columns": summary}))?)?;
        self.print(&text);
        Ok(())
    }

    fn synth(&mut self) -> Result<()> {
        let config = self.synth_config();
        let table = synth_deals(&config, self.require_seed()?)?;
        self.write("synth.csv", &table.to_csv_string())?;
        self.write("schema.json", &(synth_schema(&config).to_json() + "\n"))?;
        let dir = self.out_dir();
        self.print(&format!(
            "Rows: {}\nData: {}\nSchema: {}\n",
            table.n_rows(),
            dir.join("synth.csv").display(),
            dir.join("schema.json").display()
        ));
        Ok(())
    }

    fn fit_ols(&mut self) -> Result<()> {
        let (table, schema) = self.table()?;
        let mut fits = Vec::new();
        for spec in self.models(Family::Ols)? {
            let fit = fit_ols_model(&table, &schema, &spec)?;
            self.write(&format!("{}.json", spec.name), &pretty(&fit)?)?;
            fits.push(fit);
        }
        let cols: Vec<ModelFit> = fits.iter().map(ModelFit::Ols).collect();
        self.regression_outputs("ols", &cols)
    }

    fn fit_fe(&mut self) -> Result<()> {
        let (table, schema) = self.table()?;
        let mut fits = Vec::new();
        for spec in self.models(Family::FixedEffects)? {
            let fit = fit_fe_model(&table, &schema, &spec)?;
            self.write(&format!("{}.json", spec.name), &pretty(&fit)?)?;
            fits.push(fit);
        }
        let cols: Vec<ModelFit> = fits.iter().map(ModelFit::FixedEffects).collect();
        self.regression_outputs("fe", &cols)
    }

    fn regression_outputs(&mut self, stem: &str, cols: &[ModelFit]) -> Result<()> {
        let text = render_regression_table(cols);
        self.write(&format!("{stem}.txt"), &text)?;
        self.write(&format!("{stem}.table.json"), &pretty(&regression_table_json(cols))?)?;
        self.print(&text);
        Ok(())
    }

    fn fit_tree(&mut self) -> Result<()> {
        let seed = self.require_seed()?;
        let (table, schema) = self.table()?;
        for spec in self.models(Family::Cart)? {
            let run = fit_tree_model(&table, &schema, &spec, seed)?;
            let importance = variable_importance(&run.grown);
            let meta = TreeMeta::of(&run.grown);
            let text = render_cp_table(&run.cp, &importance, meta);
            self.write(&format!("{}.json", spec.name), &(run.kept.to_json()? + "\n"))?;
            self.write(&format!("{}.cp.txt", spec.name), &text)?;
            self.write(&format!("{}.cp.json", spec.name), &pretty(&cp_report(&run.cp, &importance, meta))?)?;
            self.write(&format!("{}.dot", spec.name), &export_tree_dot(&run.kept))?;
            self.print(&format!("{}\n{text}", spec.name));
        }
        Ok(())
    }

    fn fit_forest(&mut self) -> Result<()> {
        let seed = self.require_seed()?;
        let (table, schema) = self.table()?;
        for spec in self.models(Family::Forest)? {
            let model = fit_forest_model(&table, &schema, &spec, seed)?;
            for w in &model.warnings {
                eprintln!("warning: model \"{}\": {w}", spec.name);
            }
            let text = render_forest_summary(&model);
            self.write(&format!("{}.json", spec.name), &(model.to_json()? + "\n"))?;
            self.write(&format!("{}.summary.txt", spec.name), &text)?;
            self.write(&format!("{}.summary.json", spec.name), &pretty(&forest_summary_json(&model))?)?;
            self.print(&format!("{}\n{text}", spec.name));
        }
        Ok(())
    }

    fn fit_scorecard(&mut self) -> Result<()> {
        let (table, schema) = self.table()?;
        for spec in self.models(Family::Scorecard)? {
            let (json, text) = match fit_scorecard_model(&table, &schema, &self.config, &spec, self.seed())? {
                ScorecardFit::Block(card) => (pretty(&card)?, render_block_scorecard(&card)),
                ScorecardFit::Staged(staged) => (
                    pretty(&staged)?,
                    format!(
                        "Stage 1\n{}\nStage 2\n{}",
                        render_block_scorecard(&staged.startup),
                        render_block_scorecard(&staged.deal)
                    ),
                ),
                ScorecardFit::Segments(card, _) => (pretty(&card)?, render_segment_scorecard(&card)),
            };
            self.write(&format!("{}.json", spec.name), &json)?;
            self.write(&format!("{}.txt", spec.name), &text)?;
            self.print(&format!("{}\n{text}", spec.name));
        }
        Ok(())
    }

    fn cp_table(&mut self) -> Result<()> {
        let (model, path) = self.saved_model()?;
        let tree = model.tree()?;
        let (table, _) = self.table()?;
        let mut controls = tree.controls.clone();
        if let Some(seed) = self.seed() {
            controls.seed = seed;
        }
        let cp = segval_core::cart::cp_table(&tree, &table, &controls)?;
        let importance = variable_importance(&tree);
        let meta = TreeMeta::of(&tree);
        let text = render_cp_table(&cp, &importance, meta);
        let stem = file_stem(&path);
        self.write(&format!("{stem}.cp.txt"), &text)?;
        self.write(&format!("{stem}.cp.json"), &pretty(&cp_report(&cp, &importance, meta))?)?;
        self.print(&text);
        Ok(())
    }

    fn importance(&mut self) -> Result<()> {
        let (model, path) = self.saved_model()?;
        let importance = variable_importance(&model.tree()?);
        let mut text = String::from("Variable\tImportance\n");
        for i in &importance {
            text.push_str(&format!("{}\t{}\n", i.variable, i.score));
        }
        let stem = file_stem(&path);
        self.write(&format!("{stem}.importance.txt"), &text)?;
        self.write(&format!("{stem}.importance.json"), &pretty(&importance)?)?;
        self.print(&text);
        Ok(())
    }

    fn predict(&mut self) -> Result<()> {
        let (model, _) = self.saved_model()?;
        let path = self.options.record.clone().context("--record is required")?;
        let record = record_from_json(&read(&path)?).with_context(|| format!("parsing record {}", path.display()))?;
        let report: Value = predict(&model, &record)?;
        self.print(&pretty(&report)?);
        Ok(())
    }

    fn compare(&mut self) -> Result<()> {
        let (table, schema) = self.table()?;
        let rows = self
            .config
            .models
            .iter()
            .map(|spec| comparison_row(&table, &schema, &self.config, spec, self.seed()))
            .collect::<Result<Vec<_>>>()?;
        let comparison = compare_models(rows)?;
        let text = comparison.to_text();
        self.write("compare.txt", &text)?;
        self.write("compare.json", &(comparison.to_json()? + "\n"))?;
        self.print(&text);
        Ok(())
    }

    fn export_dot(&mut self) -> Result<()> {
        let (model, path) = self.saved_model()?;
        let dot = export_tree_dot(&model.tree()?);
        self.write(&format!("{}.dot", file_stem(&path)), &dot)?;
        self.print(&dot);
        Ok(())
    }
}
