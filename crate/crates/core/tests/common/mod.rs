//! Independent oracles shared by the integration suites. Everything here
//! recomputes from definitions (explicit window normalization, double loops,
//! trapezoidal integration) and never calls into the fast implementation
//! paths it is used to check.

use sketchcord::{MultiSeries, Series};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Explicit z-normalization of one window: two-pass mean/std, population
/// convention, constant windows (sigma at or below 1e-12 * (max|x| + 1)) map
/// to the all-zeros vector.
pub fn znorm_window(values: &[f64]) -> Vec<f64> {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    let sigma = var.max(0.0).sqrt();
    let max_abs = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if sigma <= 1e-12 * (max_abs + 1.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / sigma).collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// O(n^2 m) definitional matrix profile: normalize every window explicitly,
/// then scan all pairs. `exclusion` carries the self-join radius.
pub fn brute_profile(
    train: &[f64],
    test: &[f64],
    m: usize,
    exclusion: Option<usize>,
) -> (Vec<f64>, Vec<usize>) {
    let windows_a: Vec<Vec<f64>> = (0..train.len() - m + 1)
        .map(|j| znorm_window(&train[j..j + m]))
        .collect();
    let windows_b: Vec<Vec<f64>> = (0..test.len() - m + 1)
        .map(|i| znorm_window(&test[i..i + m]))
        .collect();
    let mut profile = Vec::with_capacity(windows_b.len());
    let mut nn = Vec::with_capacity(windows_b.len());
    for (i, wb) in windows_b.iter().enumerate() {
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        for (j, wa) in windows_a.iter().enumerate() {
            if let Some(r) = exclusion {
                if i.abs_diff(j) <= r {
                    continue;
                }
            }
            let d = euclid(wa, wb);
            if d < best {
                best = d;
                best_j = j;
            }
        }
        profile.push(best);
        nn.push(best_j);
    }
    (profile, nn)
}

/// AUC by trapezoidal integration of the ROC curve swept over all unique
/// score thresholds (descending), ties handled by grouping equal scores.
pub fn trapezoid_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let pos_total = labels.iter().filter(|&&l| l).count() as f64;
    let neg_total = labels.len() as f64 - pos_total;

    let mut auc = 0.0;
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut prev_tp = 0.0;
    let mut prev_fp = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            j += 1;
        }
        auc += (fp - prev_fp) / neg_total * (tp + prev_tp) / (2.0 * pos_total);
        prev_tp = tp;
        prev_fp = fp;
        i = j;
    }
    auc
}

pub fn random_walk_series(rng: &mut ChaCha8Rng, n: usize) -> Series {
    let mut level = 0.0;
    Series::new(
        (0..n)
            .map(|_| {
                level += rng.gen_range(-1.0..1.0);
                level
            })
            .collect(),
    )
    .unwrap()
}

pub fn random_walk_multi(rng: &mut ChaCha8Rng, d: usize, n: usize) -> MultiSeries {
    MultiSeries::new(
        (0..d)
            .map(|j| (format!("dim{j:03}"), random_walk_series(rng, n)))
            .collect(),
    )
    .unwrap()
}
