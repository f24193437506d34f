//! Additive block scorecards, the two-stage composition, and segment
//! scorecards read off fitted trees.

use serde::{Deserialize, Serialize};

use crate::cart::{
    back_transform, format_threshold, resolve_record, PredictorInfo, PredictorKind, RegressionTree,
    SplitRule,
};
use crate::dataset::{Column, DataTable, Record, Transform, VariableKind, VariableSpec};
use crate::error::{Error, Result};
use crate::linmod::{encode_design, fit_ols, LinearFit, TermSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    NonFinancial,
    Financial,
    DealCharacteristics,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::NonFinancial, Block::Financial, Block::DealCharacteristics];

    pub fn label(self) -> &'static str {
        match self {
            Block::NonFinancial => "non_financial",
            Block::Financial => "financial",
            Block::DealCharacteristics => "deal_characteristics",
        }
    }
}

/// Which predictors belong to which block. Categoricals contribute their
/// indicator terms to the block they are assigned to.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlockAssignment {
    pub non_financial: Vec<String>,
    pub financial: Vec<String>,
    pub deal_characteristics: Vec<String>,
}

impl BlockAssignment {
    pub fn members(&self, block: Block) -> &[String] {
        match block {
            Block::NonFinancial => &self.non_financial,
            Block::Financial => &self.financial,
            Block::DealCharacteristics => &self.deal_characteristics,
        }
    }

    pub fn all(&self) -> impl Iterator<Item = (Block, &String)> {
        Block::ALL
            .into_iter()
            .flat_map(move |b| self.members(b).iter().map(move |v| (b, v)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTerm {
    pub term: TermSource,
    pub coefficient: f64,
}

/// intercept + Σ non-financial + Σ financial + Σ deal-characteristic terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockScorecard {
    pub response: String,
    pub response_transform: Transform,
    pub intercept: f64,
    pub non_financial: Vec<BlockTerm>,
    pub financial: Vec<BlockTerm>,
    pub deal_characteristics: Vec<BlockTerm>,
    pub fit: Option<LinearFit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockScores {
    pub intercept: f64,
    pub non_financial: f64,
    pub financial: f64,
    pub deal_characteristics: f64,
}

impl BlockScores {
    pub fn total(&self) -> f64 {
        self.intercept + self.non_financial + self.financial + self.deal_characteristics
    }
}

impl BlockScorecard {
    pub fn block(&self, block: Block) -> &[BlockTerm] {
        match block {
            Block::NonFinancial => &self.non_financial,
            Block::Financial => &self.financial,
            Block::DealCharacteristics => &self.deal_characteristics,
        }
    }

    /// Per-block sub-scores for a record.
    pub fn sub_scores(&self, record: &Record) -> Result<BlockScores> {
        let sum = |terms: &[BlockTerm]| -> Result<f64> {
            let mut total = 0.0;
            for t in terms {
                let v = t.term.evaluate(record).ok_or_else(|| {
                    Error::InsufficientData(format!(
                        "record has no usable value for \"{}\"",
                        t.term.variable().unwrap_or_default()
                    ))
                })?;
                total += t.coefficient * v;
            }
            Ok(total)
        };
        Ok(BlockScores {
            intercept: self.intercept,
            non_financial: sum(&self.non_financial)?,
            financial: sum(&self.financial)?,
            deal_characteristics: sum(&self.deal_characteristics)?,
        })
    }

    pub fn score(&self, record: &Record) -> Result<f64> {
        Ok(self.sub_scores(record)?.total())
    }
}

/// Fits one OLS over all blocks and groups the coefficients by block.
pub fn fit_block_scorecard(table: &DataTable, response: &str, blocks: &BlockAssignment) -> Result<BlockScorecard> {
    // Resolve names to columns and check disjointness.
    let mut resolved: Vec<(Block, String, VariableKind)> = Vec::new();
    for (block, name) in blocks.all() {
        let col = table.column(name)?;
        if let Some((other, _, _)) = resolved.iter().find(|(_, n, _)| *n == col.name) {
            return Err(Error::Config(format!(
                "\"{}\" assigned to both {} and {}",
                col.name,
                other.label(),
                block.label()
            )));
        }
        resolved.push((block, col.name.clone(), col.kind));
    }
    let rcol = table.numeric(response)?;
    let mut used = vec![rcol.name.clone()];
    used.extend(resolved.iter().map(|r| r.1.clone()));
    let complete = table.complete_cases(&used)?;
    let numeric: Vec<&str> = resolved
        .iter()
        .filter(|r| r.2 != VariableKind::Categorical)
        .map(|r| r.1.as_str())
        .collect();
    let categorical: Vec<&str> = resolved
        .iter()
        .filter(|r| r.2 == VariableKind::Categorical)
        .map(|r| r.1.as_str())
        .collect();
    let design = encode_design(&complete, &rcol.name, &numeric, &categorical)?;
    let fit = fit_ols(&design)?;

    let mut card = BlockScorecard {
        response: rcol.name.clone(),
        response_transform: rcol.applied,
        intercept: 0.0,
        non_financial: Vec::new(),
        financial: Vec::new(),
        deal_characteristics: Vec::new(),
        fit: None,
    };
    for (term, &coefficient) in fit.terms.iter().zip(&fit.coefficients) {
        let Some(var) = term.variable() else {
            card.intercept = coefficient;
            continue;
        };
        let block = resolved
            .iter()
            .find(|r| r.1 == var)
            .map(|r| r.0)
            .expect("term from an assigned variable");
        let entry = BlockTerm {
            term: term.clone(),
            coefficient,
        };
        match block {
            Block::NonFinancial => card.non_financial.push(entry),
            Block::Financial => card.financial.push(entry),
            Block::DealCharacteristics => card.deal_characteristics.push(entry),
        }
    }
    card.fit = Some(fit);
    Ok(card)
}

/// Stage-1 startup-value scorecard plus stage-2 deal adjustment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagedModel {
    pub startup: BlockScorecard,
    pub deal: BlockScorecard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetaEstimate {
    pub startup_score: f64,
    pub deal_adjustment: f64,
    /// Stage sum on the response's modelling scale.
    pub value: f64,
    /// `exp(value)` when the response is log-transformed.
    pub back_transformed: f64,
}

/// Additive two-stage composition on the modelling scale:
/// value = startup score + deal adjustment.
pub fn compose_meta(startup: &BlockScorecard, deal: &BlockScorecard, record: &Record) -> Result<MetaEstimate> {
    if startup.response_transform != deal.response_transform {
        return Err(Error::Composition(format!(
            "stage transforms differ: {:?} vs {:?}",
            startup.response_transform, deal.response_transform
        )));
    }
    let startup_score = startup.score(record)?;
    let deal_adjustment = deal.score(record)?;
    let value = startup_score + deal_adjustment;
    Ok(MetaEstimate {
        startup_score,
        deal_adjustment,
        value,
        back_transformed: back_transform(value, startup.response_transform),
    })
}

/// Fits stage 1 on the response and stage 2 on stage-1 residuals.
pub fn fit_staged(
    table: &DataTable,
    response: &str,
    startup: &BlockAssignment,
    deal: &BlockAssignment,
) -> Result<StagedModel> {
    let stage1 = fit_block_scorecard(table, response, startup)?;
    let rcol = table.numeric(response)?;
    let residuals: Vec<Option<f64>> = (0..table.n_rows())
        .map(|r| {
            let y = rcol.value(r)?;
            stage1.score(&table.record(r)).ok().map(|s| y - s)
        })
        .collect();
    let name = format!("{}_stage1_residual", rcol.name);
    let mut column = Column::numeric(&VariableSpec::new(name.clone(), VariableKind::Response), residuals);
    column.applied = rcol.applied;
    let with_resid = table.with_column(column)?;
    let stage2 = fit_block_scorecard(&with_resid, &name, deal)?;
    Ok(StagedModel {
        startup: stage1,
        deal: stage2,
    })
}

/// One condition of a segment rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Condition {
    /// lower < x ≤ upper.
    Numeric {
        variable: String,
        var: usize,
        lower: Option<f64>,
        upper: Option<f64>,
        missing: bool,
    },
    /// Level in `levels`; `unknown` admits levels absent from training.
    Categorical {
        variable: String,
        var: usize,
        levels: Vec<String>,
        unknown: bool,
        missing: bool,
    },
}

impl Condition {
    pub fn text(&self) -> String {
        match self {
            Condition::Numeric {
                variable,
                lower,
                upper,
                ..
            } => match (lower, upper) {
                (None, Some(u)) => format!("{variable} ≤ {}", format_threshold(*u)),
                (Some(l), None) => format!("{variable} > {}", format_threshold(*l)),
                (Some(l), Some(u)) => format!(
                    "{} < {variable} ≤ {}",
                    format_threshold(*l),
                    format_threshold(*u)
                ),
                (None, None) => format!("{variable} any"),
            },
            Condition::Categorical { variable, levels, .. } => {
                format!("{variable} ∈ {{{}}}", levels.join(", "))
            }
        }
    }

    pub fn admits_missing(&self) -> bool {
        match self {
            Condition::Numeric { missing, .. } | Condition::Categorical { missing, .. } => *missing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub rule: Vec<Condition>,
    pub text: String,
    /// Leaf mean on the modelling scale (ln EUR for logged responses).
    pub predicted: f64,
    pub predicted_valuation_eur: f64,
    pub n: usize,
    pub share: f64,
    pub leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentScorecard {
    pub response: String,
    pub response_transform: Transform,
    pub predictors: Vec<PredictorInfo>,
    pub segments: Vec<Segment>,
}

fn walk_paths(
    tree: &RegressionTree,
    id: usize,
    rule: &mut Vec<Condition>,
    transform: Transform,
    out: &mut Vec<Segment>,
) {
    let node = &tree.nodes[id];
    let Some(split) = &node.split else {
        let text = if rule.is_empty() {
            "ALL".to_string()
        } else {
            rule.iter().map(Condition::text).collect::<Vec<_>>().join(" AND ")
        };
        out.push(Segment {
            rule: rule.clone(),
            text,
            predicted: node.prediction,
            predicted_valuation_eur: back_transform(node.prediction, transform),
            n: node.n,
            share: node.n as f64 / tree.root().n as f64,
            leaf: id,
        });
        return;
    };
    let info = &tree.predictors[split.variable];
    for go_left in [true, false] {
        let saved = rule.clone();
        let admits_missing = split.missing_left == go_left;
        let pos = rule.iter().position(|c| match c {
            Condition::Numeric { var, .. } | Condition::Categorical { var, .. } => *var == split.variable,
        });
        let mut cond = match pos {
            Some(p) => rule.remove(p),
            None => match info.kind {
                PredictorKind::Numeric => Condition::Numeric {
                    variable: info.name.clone(),
                    var: split.variable,
                    lower: None,
                    upper: None,
                    missing: true,
                },
                PredictorKind::Categorical => Condition::Categorical {
                    variable: info.name.clone(),
                    var: split.variable,
                    levels: info.levels.clone(),
                    unknown: true,
                    missing: true,
                },
            },
        };
        match (&mut cond, &split.rule) {
            (
                Condition::Numeric {
                    lower,
                    upper,
                    missing,
                    ..
                },
                SplitRule::Numeric { threshold },
            ) => {
                if go_left {
                    *upper = Some(upper.map_or(*threshold, |u| u.min(*threshold)));
                } else {
                    *lower = Some(lower.map_or(*threshold, |l| l.max(*threshold)));
                }
                *missing &= admits_missing;
            }
            (
                Condition::Categorical {
                    levels,
                    unknown,
                    missing,
                    ..
                },
                SplitRule::Categorical { left, right },
            ) => {
                let side = if go_left { left } else { right };
                levels.retain(|l| {
                    let code = info.levels.iter().position(|m| m == l).expect("training level") as u32;
                    if side.contains(&code) {
                        true
                    } else {
                        // Levels not observed at this node follow the majority side.
                        admits_missing && !left.contains(&code) && !right.contains(&code)
                    }
                });
                *unknown &= admits_missing;
                *missing &= admits_missing;
            }
            _ => unreachable!("split rule matches predictor kind"),
        }
        rule.push(cond);
        walk_paths(
            tree,
            if go_left { split.left } else { split.right },
            rule,
            transform,
            out,
        );
        *rule = saved;
    }
}

/// One segment per leaf; rules merge repeated conditions on a variable.
pub fn tree_to_scorecard(tree: &RegressionTree, response_transform: Transform) -> SegmentScorecard {
    let mut segments = Vec::with_capacity(tree.n_leaves());
    walk_paths(tree, 0, &mut Vec::new(), response_transform, &mut segments);
    SegmentScorecard {
        response: tree.response.clone(),
        response_transform,
        predictors: tree.predictors.clone(),
        segments,
    }
}

impl SegmentScorecard {
    /// The segment whose rule admits `record`.
    pub fn find(&self, record: &Record) -> Result<Option<&Segment>> {
        let row = resolve_record(&self.predictors, record)?;
        use crate::cart::features::{RowValues, MISSING, UNKNOWN};
        let admits = |c: &Condition| match c {
            Condition::Numeric {
                var,
                lower,
                upper,
                missing,
                ..
            } => match row.number(*var) {
                None => *missing,
                Some(x) => lower.is_none_or(|l| x > l) && upper.is_none_or(|u| x <= u),
            },
            Condition::Categorical {
                var,
                levels,
                unknown,
                missing,
                ..
            } => match row.code(*var) {
                MISSING => *missing,
                UNKNOWN => *unknown,
                code => levels.contains(&self.predictors[*var].levels[code as usize]),
            },
        };
        Ok(self.segments.iter().find(|s| s.rule.iter().all(admits)))
    }

    pub fn score(&self, record: &Record) -> Result<f64> {
        self.find(record)?
            .map(|s| s.predicted)
            .ok_or_else(|| Error::InsufficientData("record matches no segment".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cart::{grow, GrowthControls};
    use crate::dataset::{Cell, Schema, VariableKind::*};

    fn controls() -> GrowthControls {
        GrowthControls {
            minsplit: 2,
            minbucket: 1,
            ..GrowthControls::default()
        }
    }

    #[test]
    fn step_tree_segments() {
        let schema = Schema::new(vec![
            VariableSpec::new("y", Response),
            VariableSpec::new("x", Continuous),
        ])
        .unwrap();
        let t = DataTable::from_csv_str("y,x\n0,1\n0,2\n10,3\n10,4\n", &schema).unwrap();
        let tree = grow(&t, "y", &["x"], &controls()).unwrap();
        let card = tree_to_scorecard(&tree, Transform::None);
        let got: Vec<_> = card
            .segments
            .iter()
            .map(|s| (s.text.as_str(), s.predicted, s.n, s.share))
            .collect();
        assert_eq!(got, [("x ≤ 2.5", 0.0, 2, 0.5), ("x > 2.5", 10.0, 2, 0.5)]);
    }

    #[test]
    fn root_only_is_all() {
        let schema = Schema::new(vec![
            VariableSpec::new("y", Response),
            VariableSpec::new("x", Continuous),
        ])
        .unwrap();
        let t = DataTable::from_csv_str("y,x\n1,1\n3,1\n", &schema).unwrap();
        let tree = grow(&t, "y", &["x"], &controls()).unwrap();
        let card = tree_to_scorecard(&tree, Transform::None);
        assert_eq!(card.segments.len(), 1);
        assert_eq!(card.segments[0].text, "ALL");
        assert_eq!(card.segments[0].predicted, 2.0);
    }

    #[test]
    fn nested_upper_bounds_merge() {
        let schema = Schema::new(vec![
            VariableSpec::new("y", Response),
            VariableSpec::new("x", Continuous),
        ])
        .unwrap();
        // Splits at 5.5 first, then 3.5 inside the left side.
        let t = DataTable::from_csv_str(
            "y,x\n0,1\n0,2\n0,3\n20,4\n20,5\n50,6\n50,7\n50,8\n",
            &schema,
        )
        .unwrap();
        let tree = grow(&t, "y", &["x"], &controls()).unwrap();
        let card = tree_to_scorecard(&tree, Transform::None);
        let texts: Vec<_> = card.segments.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, ["x ≤ 3.5", "3.5 < x ≤ 5.5", "x > 5.5"]);
    }

    #[test]
    fn zero_stage_two_is_identity() {
        let stage1 = BlockScorecard {
            response: "ln_valuation".into(),
            response_transform: Transform::NaturalLog,
            intercept: 2.0,
            non_financial: vec![],
            financial: vec![BlockTerm {
                term: TermSource::Numeric {
                    variable: "x".into(),
                },
                coefficient: 0.5,
            }],
            deal_characteristics: vec![],
            fit: None,
        };
        let zero = BlockScorecard {
            intercept: 0.0,
            financial: vec![BlockTerm {
                term: TermSource::Numeric {
                    variable: "x".into(),
                },
                coefficient: 0.0,
            }],
            ..stage1.clone()
        };
        let mut r = Record::new();
        r.insert("x".into(), Cell::Number(1.0));
        let m = compose_meta(&stage1, &zero, &r).unwrap();
        assert_eq!(m.value, stage1.score(&r).unwrap());
        assert_eq!(m.value, 2.5);
        assert!((m.back_transformed - 2.5f64.exp()).abs() < 1e-12);

        let raw = BlockScorecard {
            response_transform: Transform::None,
            ..zero
        };
        assert!(matches!(compose_meta(&stage1, &raw, &r), Err(Error::Composition(_))));
    }
}
