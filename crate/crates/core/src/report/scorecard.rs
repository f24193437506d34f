use super::align;
use crate::scorecard::{Block, BlockScorecard, SegmentScorecard};

/// One line per segment: rule, size, share and predicted values.
pub fn render_segment_scorecard(card: &SegmentScorecard) -> String {
    let mut rows = vec![vec![
        "Segment".to_string(),
        "Rule".to_string(),
        "n".to_string(),
        "Share".to_string(),
        format!("Predicted {}", card.response),
        "Predicted valuation".to_string(),
    ]];
    for (i, s) in card.segments.iter().enumerate() {
        rows.push(vec![
            (i + 1).to_string(),
            s.text.clone(),
            s.n.to_string(),
            format!("{:.4}", s.share),
            format!("{:.4}", s.predicted),
            format!("{:.2}", s.predicted_valuation_eur),
        ]);
    }
    let mut out = align(&rows);
    let missing: Vec<String> = card
        .segments
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            s.rule
                .iter()
                .filter(|c| c.admits_missing())
                .map(move |c| (i, c))
        })
        .map(|(i, c)| {
            let var = match c {
                crate::scorecard::Condition::Numeric { variable, .. }
                | crate::scorecard::Condition::Categorical { variable, .. } => variable,
            };
            format!("{var} -> segment {}", i + 1)
        })
        .collect();
    if !missing.is_empty() {
        out.push_str(&format!("\nMissing values routed: {}\n", missing.join("; ")));
    }
    out
}

/// Coefficients grouped by block.
pub fn render_block_scorecard(card: &BlockScorecard) -> String {
    let mut rows = vec![vec![
        "Block".to_string(),
        "Term".to_string(),
        "Coefficient".to_string(),
    ]];
    rows.push(vec!["intercept".into(), "Constant".into(), format!("{:.4}", card.intercept)]);
    for block in Block::ALL {
        for t in card.block(block) {
            rows.push(vec![
                block.label().to_string(),
                t.term.label(),
                format!("{:.4}", t.coefficient),
            ]);
        }
    }
    let mut out = align(&rows);
    if let Some(fit) = &card.fit {
        out.push_str(&format!(
            "\nObservations: {}\nR-squared: {:.4}\n",
            fit.n, fit.r2
        ));
    }
    out
}
