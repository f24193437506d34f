//! Text tables, DOT export and model comparison. Every renderer is a pure
//! function of its inputs and has a JSON mirror.

mod compare;
mod regression;
mod scorecard;
mod tree;

pub use compare::{compare_models, Comparison, ComparisonRow, Contrast, ModelFamily};
pub use regression::{regression_table_json, render_regression_table, ModelFit};
pub use scorecard::{render_block_scorecard, render_segment_scorecard};
pub use tree::{
    cp_report, export_tree_dot, forest_summary_json, render_cp_table, render_forest_summary, CpReport,
    TreeMeta,
};

/// Pads cells so columns line up; the first column is left-aligned and the
/// rest right-aligned. Widths count characters, not bytes.
pub fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0; cols];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            let pad = widths[i] - cell.chars().count();
            if i == 0 {
                line.push_str(cell);
                line.extend(std::iter::repeat_n(' ', pad));
            } else {
                line.push_str("  ");
                line.extend(std::iter::repeat_n(' ', pad));
                line.push_str(cell);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Joins cells with tabs, one line per row.
pub(crate) fn tabbed(rows: &[Vec<String>]) -> String {
    rows.iter().map(|r| r.join("\t") + "\n").collect()
}
