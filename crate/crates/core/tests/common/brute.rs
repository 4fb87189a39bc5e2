//! Quadratic reference split enumerator and random instances for it.

use edgeboost::gbrt::SplitParams;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Every midpoint between distinct values, with left/right sums recomputed
/// from scratch for each candidate.
pub fn brute_force(g: &[f64], h: &[f64], x: &[f64], p: &SplitParams) -> Option<(f64, f64)> {
    let mut distinct = x.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();

    let objective = |gs: f64, hs: f64| gs * gs / (hs + p.lambda);
    let (g_all, h_all): (f64, f64) = (g.iter().sum(), h.iter().sum());

    let mut best: Option<(f64, f64)> = None;
    for pair in distinct.windows(2) {
        let t = (pair[0] + pair[1]) / 2.0;
        // thresholds are stored in single precision; skip those that collapse
        let stored = t as f32 as f64;
        if !(pair[0] < stored && stored <= pair[1]) {
            continue;
        }
        let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0usize);
        for i in 0..x.len() {
            if x[i] < t {
                gl += g[i];
                hl += h[i];
                nl += 1;
            }
        }
        let nr = x.len() - nl;
        if nl < p.min_samples_leaf.max(1) || nr < p.min_samples_leaf.max(1) {
            continue;
        }
        let gain = 0.5 * (objective(gl, hl) + objective(g_all - gl, h_all - hl) - objective(g_all, h_all)) - p.gamma;
        if gain > 0.0 && best.is_none_or(|(_, b)| gain > b) {
            best = Some((t, gain));
        }
    }
    best
}

pub fn instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, Vec<f64>, SplitParams) {
    let n = rng.gen_range(1..=200);
    let discrete = rng.gen_bool(0.4);
    let x: Vec<f64> = (0..n)
        .map(|_| {
            if discrete {
                rng.gen_range(0..12) as f64 * 0.25
            } else {
                rng.gen_range(-5.0..5.0)
            }
        })
        .collect();
    let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let h: Vec<f64> = if rng.gen_bool(0.5) {
        vec![1.0; n]
    } else {
        (0..n).map(|_| rng.gen_range(0.1..2.0)).collect()
    };
    let params = SplitParams {
        lambda: rng.gen_range(0.0..3.0),
        gamma: if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..0.5) },
        min_samples_leaf: rng.gen_range(1..=5),
    };
    (g, h, x, params)
}
