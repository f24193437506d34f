#![allow(dead_code)]

use segval_core::dataset::{Column, DataTable, VariableKind, VariableSpec};

/// Table with response `y`, numeric predictors `x0..` and categoricals `c0..`.
pub fn table(y: &[f64], numeric: &[Vec<Option<f64>>], categorical: &[Vec<Option<String>>]) -> DataTable {
    let mut columns = vec![Column::numeric(
        &VariableSpec::new("y", VariableKind::Response),
        y.iter().map(|&v| Some(v)).collect(),
    )];
    for (i, x) in numeric.iter().enumerate() {
        columns.push(Column::numeric(
            &VariableSpec::new(format!("x{i}"), VariableKind::Continuous),
            x.clone(),
        ));
    }
    for (i, c) in categorical.iter().enumerate() {
        columns.push(Column::categorical(
            &VariableSpec::new(format!("c{i}"), VariableKind::Categorical),
            c,
        ));
    }
    DataTable::new(columns, "test").unwrap()
}

pub fn names(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|i| format!("{prefix}{i}")).collect()
}

/// Solves `a · x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Inverse of a small dense matrix, column by column.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            solve(a.to_vec(), e)
        })
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}
