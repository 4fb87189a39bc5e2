//! Exact greedy split search on second-order statistics.

/// Regularization and stopping parameters that shape a split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitParams {
    pub lambda: f64,
    pub gamma: f64,
    pub min_samples_leaf: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    /// Midpoint between the two neighbouring distinct values.
    pub threshold: f64,
    pub gain: f64,
}

/// Structure score of one side, `G² / (H + λ)`.
#[inline]
fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// `½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ`
#[inline]
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> f64 {
    0.5 * (score(gl, hl, lambda) + score(gr, hr, lambda) - score(gl + gr, hl + hr, lambda)) - gamma
}

/// Threshold between `lo < hi` as stored in a model file.
///
/// Thresholds are kept in single precision; a candidate is only usable when
/// the rounded midpoint still separates the two values under the
/// `x < threshold` routing rule.
#[inline]
pub fn storable_threshold(lo: f64, hi: f64) -> Option<f32> {
    let t = ((lo + hi) / 2.0) as f32;
    let t64 = f64::from(t);
    (lo < t64 && t64 <= hi).then_some(t)
}

/// Best split over values already sorted ascending, with `g`/`h` aligned to
/// `values`. Strict improvement is required to replace the incumbent, so the
/// smallest threshold wins ties. The single-precision threshold stored in
/// the tree is returned alongside.
pub(crate) fn best_split_sorted(
    values: &[f64],
    g: &[f64],
    h: &[f64],
    g_total: f64,
    h_total: f64,
    params: &SplitParams,
) -> Option<(Split, f32)> {
    let n = values.len();
    let min_leaf = params.min_samples_leaf.max(1);
    if n < 2 * min_leaf {
        return None;
    }
    let mut best: Option<(Split, f32)> = None;
    let (mut gl, mut hl) = (0.0, 0.0);
    for i in 0..n - 1 {
        gl += g[i];
        hl += h[i];
        let (lo, hi) = (values[i], values[i + 1]);
        if lo == hi {
            continue;
        }
        let n_left = i + 1;
        if n_left < min_leaf {
            continue;
        }
        if n - n_left < min_leaf {
            break;
        }
        let Some(stored) = storable_threshold(lo, hi) else {
            continue;
        };
        let gain = split_gain(gl, hl, g_total - gl, h_total - hl, params.lambda, params.gamma);
        if gain > 0.0 && best.is_none_or(|(b, _)| gain > b.gain) {
            let split = Split {
                threshold: (lo + hi) / 2.0,
                gain,
            };
            best = Some((split, stored));
        }
    }
    best
}

/// Best split of one feature column for the given gradients and hessians.
///
/// Candidates are midpoints between consecutive distinct values; both sides
/// must hold at least `min_samples_leaf` rows. Returns `None` when no
/// candidate has positive gain.
pub fn find_best_split(g: &[f64], h: &[f64], feature_values: &[f64], params: &SplitParams) -> Option<Split> {
    assert_eq!(g.len(), h.len(), "gradient and hessian lengths differ");
    assert_eq!(g.len(), feature_values.len(), "gradient and feature lengths differ");
    let mut order: Vec<usize> = (0..feature_values.len()).collect();
    order.sort_by(|&a, &b| feature_values[a].total_cmp(&feature_values[b]).then(a.cmp(&b)));
    let values: Vec<f64> = order.iter().map(|&i| feature_values[i]).collect();
    let gs: Vec<f64> = order.iter().map(|&i| g[i]).collect();
    let hs: Vec<f64> = order.iter().map(|&i| h[i]).collect();
    let g_total = gs.iter().sum();
    let h_total = hs.iter().sum();
    best_split_sorted(&values, &gs, &hs, g_total, h_total, params).map(|(s, _)| s)
}
