//! Householder least squares that drops linearly dependent columns in entry order.

/// Relative residual norm below which a column counts as dependent on the
/// columns already retained.
const DEPENDENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) struct LeastSquares {
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    /// Coefficients for `kept`, in order.
    pub coefficients: Vec<f64>,
    /// Diagonal of (XᵀX)⁻¹ restricted to `kept`.
    pub xtx_inv_diag: Vec<f64>,
}

/// Solves min ‖y − Xb‖ for column-major `columns`. A column whose component
/// orthogonal to the earlier retained columns is negligible is dropped, so of
/// two collinear columns the later one goes.
pub(crate) fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> LeastSquares {
    let n = y.len();
    let mut work: Vec<Vec<f64>> = columns.to_vec();
    let mut qty = y.to_vec();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();

    for j in 0..work.len() {
        let r = kept.len();
        let original = norm(&columns[j]);
        if r >= n {
            dropped.push(j);
            continue;
        }
        let tail = norm(&work[j][r..]);
        if original == 0.0 || tail <= DEPENDENCE_TOL * original {
            dropped.push(j);
            continue;
        }
        // Reflector mapping work[j][r..] onto -sign(x0)·‖x‖·e1.
        let x0 = work[j][r];
        let alpha = if x0 >= 0.0 { -tail } else { tail };
        let mut v: Vec<f64> = work[j][r..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|a| a * a).sum();
        let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
        for col in work.iter_mut().skip(j) {
            apply(&v, beta, &mut col[r..]);
        }
        apply(&v, beta, &mut qty[r..]);
        kept.push(j);
    }

    let k = kept.len();
    // R[i][c] = work[kept[c]][i] for i <= c.
    let r_at = |i: usize, c: usize| work[kept[c]][i];
    let mut coefficients = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for c in i + 1..k {
            s -= r_at(i, c) * coefficients[c];
        }
        coefficients[i] = s / r_at(i, i);
    }

    // Rinv is upper triangular; (XᵀX)⁻¹ = Rinv·Rinvᵀ.
    let mut rinv = vec![vec![0.0; k]; k];
    for c in 0..k {
        rinv[c][c] = 1.0 / r_at(c, c);
        for i in (0..c).rev() {
            let mut s = 0.0;
            for m in i + 1..=c {
                s += r_at(i, m) * rinv[m][c];
            }
            rinv[i][c] = -s / r_at(i, i);
        }
    }
    let xtx_inv_diag = (0..k)
        .map(|i| (i..k).map(|c| rinv[i][c] * rinv[i][c]).sum())
        .collect();

    LeastSquares {
        kept,
        dropped,
        coefficients,
        xtx_inv_diag,
    }
}

fn apply(v: &[f64], beta: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let s = beta * dot;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}

fn norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let cols = vec![vec![1.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]];
        let ls = least_squares(&cols, &[1.0, 3.0, 5.0]);
        assert!((ls.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((ls.coefficients[1] - 2.0).abs() < 1e-12);
        // (XᵀX)⁻¹ for [[3,3],[3,5]] has diagonal 5/6, 1/2
        assert!((ls.xtx_inv_diag[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((ls.xtx_inv_diag[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn later_duplicate_is_dropped() {
        let x = vec![0.3, 1.0, 2.5, 4.0];
        let cols = vec![vec![1.0; 4], x.clone(), vec![2.0, 7.0, 1.0, 3.0], x];
        let ls = least_squares(&cols, &[1.0, 2.0, 3.0, 5.0]);
        assert_eq!(ls.kept, [0, 1, 2]);
        assert_eq!(ls.dropped, [3]);
    }
}
