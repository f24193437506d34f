//! Exhaustive split search for squared-error loss.

/// SSE reduction from splitting a node into two sides with the given counts
/// and response sums: nL·nR/n·(ȳL − ȳR)².
#[inline]
pub fn split_gain(n_left: f64, sum_left: f64, n_right: f64, sum_right: f64) -> f64 {
    let d = sum_left / n_left - sum_right / n_right;
    n_left * n_right / (n_left + n_right) * d * d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericSplit {
    /// Rows with `x <= threshold` go left.
    pub threshold: f64,
    pub improvement: f64,
    pub n_left: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalSplit {
    /// Level codes sent left, ascending.
    pub left: Vec<usize>,
    /// Remaining observed level codes, ascending.
    pub right: Vec<usize>,
    pub improvement: f64,
    pub n_left: usize,
}

/// Scans `(x, y)` pairs sorted in place by `x`. Candidate thresholds are the
/// midpoints of consecutive distinct values; ties keep the lower threshold.
pub(crate) fn scan_numeric(pairs: &mut [(f64, f64)], minbucket: usize) -> Option<NumericSplit> {
    let n = pairs.len();
    let minbucket = minbucket.max(1);
    if n < 2 * minbucket {
        return None;
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut best: Option<NumericSplit> = None;
    let mut sum_left = 0.0;
    for i in 1..n {
        sum_left += pairs[i - 1].1;
        if i < minbucket || n - i < minbucket {
            continue;
        }
        let (lo, hi) = (pairs[i - 1].0, pairs[i].0);
        if lo >= hi {
            continue;
        }
        let gain = split_gain(i as f64, sum_left, (n - i) as f64, total - sum_left);
        if gain > 0.0 && best.is_none_or(|b| gain > b.improvement) {
            let mid = lo + (hi - lo) / 2.0;
            // Adjacent floats: the midpoint may round up onto `hi`.
            let threshold = if mid < hi { mid } else { lo };
            best = Some(NumericSplit {
                threshold,
                improvement: gain,
                n_left: i,
            });
        }
    }
    best
}

/// Best binary split of a numeric predictor. `x` and `y` hold non-missing rows.
pub fn best_split_numeric(x: &[f64], y: &[f64], minbucket: usize) -> Option<NumericSplit> {
    assert_eq!(x.len(), y.len(), "x and y lengths differ");
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    scan_numeric(&mut pairs, minbucket)
}

/// Per-level (count, sum) aggregated in row order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct LevelStats {
    pub count: usize,
    pub sum: f64,
}

/// Orders observed levels by mean response and scans the k − 1 prefix cuts.
/// For squared error the best of these equals the best of all 2^(k−1) − 1
/// binary partitions. Side sums are accumulated in level-code order.
pub(crate) fn scan_categorical(stats: &[LevelStats], minbucket: usize) -> Option<CategoricalSplit> {
    let minbucket = minbucket.max(1);
    let observed: Vec<usize> = (0..stats.len()).filter(|&c| stats[c].count > 0).collect();
    if observed.len() < 2 {
        return None;
    }
    let mut order = observed.clone();
    order.sort_by(|&a, &b| {
        let ma = stats[a].sum / stats[a].count as f64;
        let mb = stats[b].sum / stats[b].count as f64;
        ma.total_cmp(&mb).then(a.cmp(&b))
    });

    let mut in_left = vec![false; stats.len()];
    let mut best: Option<CategoricalSplit> = None;
    for cut in 1..order.len() {
        in_left[order[cut - 1]] = true;
        let (mut nl, mut sl, mut nr, mut sr) = (0usize, 0.0, 0usize, 0.0);
        for &c in &observed {
            if in_left[c] {
                nl += stats[c].count;
                sl += stats[c].sum;
            } else {
                nr += stats[c].count;
                sr += stats[c].sum;
            }
        }
        if nl < minbucket || nr < minbucket {
            continue;
        }
        let gain = split_gain(nl as f64, sl, nr as f64, sr);
        if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.improvement) {
            let left: Vec<usize> = observed.iter().copied().filter(|&c| in_left[c]).collect();
            let right: Vec<usize> = observed.iter().copied().filter(|&c| !in_left[c]).collect();
            best = Some(CategoricalSplit {
                left,
                right,
                improvement: gain,
                n_left: nl,
            });
        }
    }
    best
}

/// Best binary partition of a categorical predictor. `levels[i]` is the level
/// code of row `i`.
pub fn best_split_categorical(levels: &[usize], y: &[f64], minbucket: usize) -> Option<CategoricalSplit> {
    assert_eq!(levels.len(), y.len(), "levels and y lengths differ");
    let k = levels.iter().copied().max().map_or(0, |m| m + 1);
    let mut stats = vec![LevelStats::default(); k];
    for (&l, &v) in levels.iter().zip(y) {
        stats[l].count += 1;
        stats[l].sum += v;
    }
    scan_categorical(&stats, minbucket)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_data_splits_at_midpoint() {
        let s = best_split_numeric(&[1.0, 2.0, 3.0, 4.0], &[0.0, 0.0, 10.0, 10.0], 1).unwrap();
        assert_eq!(s.threshold, 2.5);
        assert_eq!(s.improvement, 100.0);
        assert_eq!(s.n_left, 2);
    }

    #[test]
    fn unsorted_input() {
        let s = best_split_numeric(&[4.0, 1.0, 3.0, 2.0], &[10.0, 0.0, 10.0, 0.0], 1).unwrap();
        assert_eq!(s.threshold, 2.5);
    }

    #[test]
    fn constant_inputs_give_none() {
        assert!(best_split_numeric(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0], 1).is_none());
        assert!(best_split_numeric(&[2.0, 2.0, 2.0], &[1.0, 5.0, 3.0], 1).is_none());
    }

    #[test]
    fn minbucket_limits_candidates() {
        // Best unconstrained cut isolates the last row; minbucket 2 forbids it.
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [0.0, 0.0, 0.0, 0.0, 50.0];
        assert_eq!(best_split_numeric(&x, &y, 1).unwrap().threshold, 4.5);
        assert_eq!(best_split_numeric(&x, &y, 2).unwrap().threshold, 3.5);
        assert!(best_split_numeric(&x, &y, 3).is_none());
    }

    #[test]
    fn three_level_example() {
        // A:{1,1} B:{4,4} C:{9,9}
        let s = best_split_categorical(&[0, 0, 1, 1, 2, 2], &[1.0, 1.0, 4.0, 4.0, 9.0, 9.0], 1).unwrap();
        assert_eq!(s.left, [0, 1]);
        assert_eq!(s.right, [2]);
        assert!((s.improvement - 507.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn equal_means_give_none() {
        assert!(best_split_categorical(&[0, 0, 1, 1], &[1.0, 3.0, 2.0, 2.0], 1).is_none());
    }

    #[test]
    fn unobserved_codes_are_skipped() {
        let s = best_split_categorical(&[3, 3, 1, 1], &[5.0, 5.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(s.left, [1]);
        assert_eq!(s.right, [3]);
    }
}
