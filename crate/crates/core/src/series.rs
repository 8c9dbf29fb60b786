//! Time-series data model and z-normalized distance primitives.
//!
//! A [`Series`] is a finite, non-empty array of f64 samples. A
//! [`MultiSeries`] bundles named dimensions of identical length. Windows are
//! compared with the z-normalized Euclidean distance: each window is shifted
//! to mean 0 and scaled to standard deviation 1 (population convention,
//! divisor m) before taking the Euclidean norm of the difference. A window
//! whose standard deviation is at or below the flatness threshold
//! `1e-12 * (max|x| + 1)` z-normalizes to the all-zeros vector, so the
//! distance between two constant windows is 0 and between a constant and a
//! non-constant window is sqrt(m).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FLATNESS_SCALE: f64 = 1e-12;

/// Variance floor below which prefix-sum window statistics are recomputed
/// with direct two-pass summation.
const VAR_RECOMPUTE_FLOOR: f64 = 1e-12;

#[inline]
pub(crate) fn flatness_threshold(max_abs: f64) -> f64 {
    FLATNESS_SCALE * (max_abs + 1.0)
}

/// A single-dimensional time series. All values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Series { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Wrap values produced by crate-internal arithmetic on finite inputs.
    pub(crate) fn from_raw(values: Vec<f64>) -> Series {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        debug_assert!(!values.is_empty());
        Series { values }
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Borrow the length-`m` window starting at `start`.
    pub fn window(&self, start: usize, m: usize) -> Result<SubseqView<'_>> {
        if m < 2 {
            return Err(Error::invalid_config("window length m must be >= 2"));
        }
        if start + m > self.values.len() {
            return Err(Error::WindowOutOfRange {
                start,
                len: m,
                n: self.values.len(),
            });
        }
        Ok(SubseqView {
            values: &self.values[start..start + m],
            start,
        })
    }

    /// Population mean and standard deviation of the whole series.
    pub fn global_stats(&self) -> NormStats {
        let (mu, sigma, _) = two_pass_stats(&self.values);
        NormStats { mu, sigma }
    }

    /// True when the whole series sits at or below the flatness threshold.
    pub fn is_constant(&self) -> bool {
        let (_, sigma, max_abs) = two_pass_stats(&self.values);
        sigma <= flatness_threshold(max_abs)
    }
}

/// Global normalization statistics of one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mu: f64,
    pub sigma: f64,
}

/// A borrowed contiguous window of a series.
#[derive(Debug, Clone, Copy)]
pub struct SubseqView<'a> {
    values: &'a [f64],
    start: usize,
}

impl<'a> SubseqView<'a> {
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }
}

/// A multidimensional time series: named dimensions of identical length.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeries {
    dims: Vec<(String, Series)>,
}

impl MultiSeries {
    pub fn new(dims: Vec<(String, Series)>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::invalid_config("multiseries needs at least one dimension"));
        }
        let n = dims[0].1.len();
        for (i, (name, series)) in dims.iter().enumerate() {
            if series.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: series.len(),
                });
            }
            if dims[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::DuplicateDimension { name: name.clone() });
            }
        }
        Ok(MultiSeries { dims })
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn n(&self) -> usize {
        self.dims[0].1.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.dims.iter().map(|(name, _)| name.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Series)> {
        self.dims.iter().map(|(name, series)| (name.as_str(), series))
    }

    pub fn dim(&self, name: &str) -> Option<&Series> {
        self.dims
            .iter()
            .find(|(other, _)| other == name)
            .map(|(_, series)| series)
    }

    pub fn dim_at(&self, index: usize) -> (&str, &Series) {
        let (name, series) = &self.dims[index];
        (name.as_str(), series)
    }

    /// Position of a dimension in the stored order.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|(other, _)| other == name)
    }

    /// Append a dimension; the new series must match the shared length.
    pub fn push_dim(&mut self, name: impl Into<String>, series: Series) -> Result<()> {
        let name = name.into();
        if series.len() != self.n() {
            return Err(Error::LengthMismatch {
                left: self.n(),
                right: series.len(),
            });
        }
        if self.dim(&name).is_some() {
            return Err(Error::DuplicateDimension { name });
        }
        self.dims.push((name, series));
        Ok(())
    }
}

fn two_pass_stats(values: &[f64]) -> (f64, f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    let max_abs = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    (mean, var.max(0.0).sqrt(), max_abs)
}

/// Globally z-normalize a series with its own population statistics.
///
/// Errors with [`Error::ConstantSeries`] when the standard deviation sits at
/// or below the flatness threshold.
pub fn znormalize(s: &Series) -> Result<Series> {
    if s.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: s.len(),
            required: 2,
        });
    }
    let (mu, sigma, max_abs) = two_pass_stats(s.values());
    if sigma <= flatness_threshold(max_abs) {
        return Err(Error::ConstantSeries {
            dimension: None,
            sigma,
        });
    }
    znormalize_with(s, NormStats { mu, sigma })
}

/// Z-normalize with externally supplied statistics (e.g. a test series with
/// its training counterpart's statistics).
pub fn znormalize_with(s: &Series, stats: NormStats) -> Result<Series> {
    if stats.sigma <= 0.0 || !stats.sigma.is_finite() || !stats.mu.is_finite() {
        return Err(Error::invalid_config("normalization stats must be finite with sigma > 0"));
    }
    let values = s.values().iter().map(|v| (v - stats.mu) / stats.sigma).collect();
    Series::new(values)
}

/// Z-normalized Euclidean distance between two equal-length windows.
pub fn znorm_dist(a: &SubseqView<'_>, b: &SubseqView<'_>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let za = ZWindow::new(a.values());
    let zb = ZWindow::new(b.values());
    let mut acc = 0.0;
    for i in 0..a.len() {
        let diff = za.at(i) - zb.at(i);
        acc += diff * diff;
    }
    Ok(acc.sqrt())
}

/// One window's z-normalization, evaluated lazily; constant windows map to
/// the all-zeros vector.
struct ZWindow<'a> {
    values: &'a [f64],
    mean: f64,
    inv_sigma: f64,
}

impl<'a> ZWindow<'a> {
    fn new(values: &'a [f64]) -> Self {
        let (mean, sigma, max_abs) = two_pass_stats(values);
        let inv_sigma = if sigma <= flatness_threshold(max_abs) {
            0.0
        } else {
            1.0 / sigma
        };
        ZWindow {
            values,
            mean,
            inv_sigma,
        }
    }

    #[inline]
    fn at(&self, i: usize) -> f64 {
        (self.values[i] - self.mean) * self.inv_sigma
    }
}

/// Nearest-neighbor distance of a query window into a series.
///
/// Returns the minimum z-normalized distance over all length-`m` windows of
/// `t` and the arg-min start index; ties go to the smallest index.
pub fn nn_dist(q: &SubseqView<'_>, t: &Series, m: usize) -> Result<(f64, usize)> {
    nn_dist_excluding(q, t, m, None)
}

/// `nn_dist` with an optional exclusion zone `|j - center| <= radius` on the
/// candidate windows, used by self-join detection paths.
pub fn nn_dist_excluding(
    q: &SubseqView<'_>,
    t: &Series,
    m: usize,
    exclude: Option<(usize, usize)>,
) -> Result<(f64, usize)> {
    if q.len() != m {
        return Err(Error::LengthMismatch {
            left: q.len(),
            right: m,
        });
    }
    if t.len() < m {
        return Err(Error::SeriesTooShort {
            len: t.len(),
            required: m,
        });
    }
    let zq = ZWindow::new(q.values());
    let candidates = t.len() - m + 1;
    let mut best = f64::INFINITY;
    let mut best_idx = None;
    for j in 0..candidates {
        if let Some((center, radius)) = exclude {
            if j.abs_diff(center) <= radius {
                continue;
            }
        }
        let zt = ZWindow::new(&t.values()[j..j + m]);
        let mut acc = 0.0;
        for i in 0..m {
            let diff = zq.at(i) - zt.at(i);
            acc += diff * diff;
        }
        let dist = acc.sqrt();
        if dist < best {
            best = dist;
            best_idx = Some(j);
        }
    }
    match best_idx {
        Some(j) => Ok((best, j)),
        None => Err(Error::NoAdmissibleNeighbor {
            index: exclude.map(|(c, _)| c).unwrap_or(0),
            radius: exclude.map(|(_, r)| r).unwrap_or(0),
        }),
    }
}

/// Per-window mean/std lookup backed by prefix sums of x and x^2.
///
/// Windows whose prefix-sum variance is negative or within `1e-12` of zero
/// (or near the flatness threshold) are recomputed with direct two-pass
/// summation to bound cancellation error.
#[derive(Debug, Clone)]
pub struct WindowStats {
    means: Vec<f64>,
    stds: Vec<f64>,
    constant: Vec<bool>,
    m: usize,
}

impl WindowStats {
    pub fn new(values: &[f64], m: usize) -> Self {
        assert!(m >= 2 && values.len() >= m, "need at least one window");
        let count = values.len() - m + 1;
        let mut prefix = Vec::with_capacity(values.len() + 1);
        let mut prefix_sq = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        prefix_sq.push(0.0);
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for &v in values {
            s1 += v;
            s2 += v * v;
            prefix.push(s1);
            prefix_sq.push(s2);
        }
        let max_abs = sliding_max_abs(values, m);

        let mf = m as f64;
        let mut means = Vec::with_capacity(count);
        let mut stds = Vec::with_capacity(count);
        let mut constant = Vec::with_capacity(count);
        for i in 0..count {
            let sum = prefix[i + m] - prefix[i];
            let mut mean = sum / mf;
            let mut var = (prefix_sq[i + m] - prefix_sq[i]) / mf - mean * mean;
            let thr = flatness_threshold(max_abs[i]);
            if var < VAR_RECOMPUTE_FLOOR || var <= 4.0 * thr * thr {
                let (m2, s2, _) = two_pass_stats(&values[i..i + m]);
                mean = m2;
                var = s2 * s2;
            }
            let std = var.max(0.0).sqrt();
            means.push(mean);
            stds.push(std);
            constant.push(std <= thr);
        }
        WindowStats {
            means,
            stds,
            constant,
            m,
        }
    }

    pub fn count(&self) -> usize {
        self.means.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn mean(&self, i: usize) -> f64 {
        self.means[i]
    }

    #[inline]
    pub fn std(&self, i: usize) -> f64 {
        self.stds[i]
    }

    #[inline]
    pub fn is_constant(&self, i: usize) -> bool {
        self.constant[i]
    }

    pub(crate) fn means_slice(&self) -> &[f64] {
        &self.means
    }

    pub(crate) fn stds_slice(&self) -> &[f64] {
        &self.stds
    }

    pub(crate) fn constant_slice(&self) -> &[bool] {
        &self.constant
    }

    pub(crate) fn any_constant(&self) -> bool {
        self.constant.iter().any(|&c| c)
    }
}

/// Sliding maximum of |x| over length-m windows (monotonic deque).
fn sliding_max_abs(values: &[f64], m: usize) -> Vec<f64> {
    let count = values.len() - m + 1;
    let mut out = Vec::with_capacity(count);
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for (i, v) in values.iter().enumerate() {
        let a = v.abs();
        while let Some(&back) = deque.back() {
            if values[back].abs() <= a {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(i);
        if let Some(&front) = deque.front() {
            if front + m <= i {
                deque.pop_front();
            }
        }
        if i + 1 >= m {
            out.push(values[*deque.front().unwrap()].abs());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64]) -> Series {
        Series::new(values.to_vec()).unwrap()
    }

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(matches!(Series::new(vec![]), Err(Error::EmptySeries)));
        assert!(matches!(
            Series::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(matches!(
            Series::new(vec![f64::INFINITY]),
            Err(Error::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn multiseries_validates_lengths_and_names() {
        let a = series(&[1.0, 2.0]);
        let b = series(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            MultiSeries::new(vec![("a".into(), a.clone()), ("b".into(), b)]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            MultiSeries::new(vec![("a".into(), a.clone()), ("a".into(), a.clone())]),
            Err(Error::DuplicateDimension { .. })
        ));
    }

    #[test]
    fn znormalize_matches_reference() {
        let out = znormalize(&series(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        let expected = [-1.3416, -0.4472, 0.4472, 1.3416];
        for (got, want) in out.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-3, "{got} vs {want}");
        }
        let stats = out.global_stats();
        assert!(stats.mu.abs() < 1e-9);
        assert!((stats.sigma - 1.0).abs() < 1e-9);
    }

    #[test]
    fn znormalize_is_idempotent() {
        let out = znormalize(&series(&[0.3, -1.2, 4.5, 2.2, 0.0])).unwrap();
        let again = znormalize(&out).unwrap();
        for (a, b) in out.values().iter().zip(again.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn znormalize_rejects_constant() {
        assert!(matches!(
            znormalize(&series(&[5.0, 5.0, 5.0, 5.0])),
            Err(Error::ConstantSeries { .. })
        ));
    }

    #[test]
    fn znorm_dist_identity_and_affine() {
        let s = series(&[0.0, 1.5, -2.0, 0.7, 3.0, 1.1]);
        let a = s.window(0, 4).unwrap();
        assert_eq!(znorm_dist(&a, &a).unwrap(), 0.0);

        let affine: Vec<f64> = s.values()[..4].iter().map(|v| 3.0 * v + 5.0).collect();
        let t = series(&affine);
        let b = t.window(0, 4).unwrap();
        assert!(znorm_dist(&a, &b).unwrap() < 1e-9);
    }

    #[test]
    fn znorm_dist_matches_two_pass_reference() {
        let a = series(&[0.0, 1.0, 2.0, 3.0]);
        let b = series(&[0.0, 1.0, 2.0, 5.0]);
        let got = znorm_dist(&a.window(0, 4).unwrap(), &b.window(0, 4).unwrap()).unwrap();

        // Independent reference: explicit normalization of materialized windows.
        let norm = |v: &[f64]| -> Vec<f64> {
            let m = v.len() as f64;
            let mu = v.iter().sum::<f64>() / m;
            let sigma = (v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / m).sqrt();
            v.iter().map(|x| (x - mu) / sigma).collect()
        };
        let za = norm(a.values());
        let zb = norm(b.values());
        let want = za
            .iter()
            .zip(&zb)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn znorm_dist_constant_conventions() {
        let flat = series(&[2.0, 2.0, 2.0]);
        let ramp = series(&[0.0, 1.0, 2.0]);
        let ff = znorm_dist(&flat.window(0, 3).unwrap(), &flat.window(0, 3).unwrap()).unwrap();
        assert_eq!(ff, 0.0);
        let fr = znorm_dist(&flat.window(0, 3).unwrap(), &ramp.window(0, 3).unwrap()).unwrap();
        assert!((fr - 3.0f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn znorm_dist_length_mismatch() {
        let s = series(&[0.0, 1.0, 2.0, 3.0]);
        let a = s.window(0, 2).unwrap();
        let b = s.window(0, 3).unwrap();
        assert!(matches!(znorm_dist(&a, &b), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn nn_dist_finds_planted_window() {
        let t = series(&[0.0, 1.0, 4.0, 9.0, 16.0, 25.0, 36.0, 49.0]);
        let q = t.window(3, 4).unwrap();
        let (dist, idx) = nn_dist(&q, &t, 4).unwrap();
        assert_eq!(dist, 0.0);
        assert_eq!(idx, 3);
    }

    #[test]
    fn nn_dist_single_candidate() {
        let t = series(&[1.0, 5.0, 2.0]);
        let q_series = series(&[0.0, 2.0, 1.0]);
        let q = q_series.window(0, 3).unwrap();
        let (dist, idx) = nn_dist(&q, &t, 3).unwrap();
        assert_eq!(idx, 0);
        let direct = znorm_dist(&q, &t.window(0, 3).unwrap()).unwrap();
        assert_eq!(dist, direct);
    }

    #[test]
    fn nn_dist_matches_exhaustive_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let t = series(&(0..64).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<_>>());
        let q_values: Vec<f64> = (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let q_series = series(&q_values);
        let q = q_series.window(0, 8).unwrap();

        let (dist, idx) = nn_dist(&q, &t, 8).unwrap();
        let mut best = f64::INFINITY;
        let mut best_j = 0;
        for j in 0..t.len() - 8 + 1 {
            let d = znorm_dist(&q, &t.window(j, 8).unwrap()).unwrap();
            if d < best {
                best = d;
                best_j = j;
            }
        }
        assert_eq!(dist, best);
        assert_eq!(idx, best_j);
    }

    #[test]
    fn nn_dist_rejects_short_series() {
        let t = series(&[1.0, 2.0]);
        let q_series = series(&[0.0, 1.0, 2.0]);
        let q = q_series.window(0, 3).unwrap();
        assert!(matches!(
            nn_dist(&q, &t, 3),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn window_stats_match_direct_computation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        // Offset the walk so prefix-sum cancellation is actually exercised.
        let mut level = 50.0;
        let values: Vec<f64> = (0..256)
            .map(|_| {
                level += rng.gen_range(-1.0..1.0);
                level
            })
            .collect();
        let m = 16;
        let stats = WindowStats::new(&values, m);
        assert_eq!(stats.count(), values.len() - m + 1);
        for i in 0..stats.count() {
            let (mean, std, _) = two_pass_stats(&values[i..i + m]);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            assert!(rel(stats.mean(i), mean) < 1e-9, "mean window {i}");
            assert!(rel(stats.std(i), std) < 1e-9, "std window {i}");
            assert!(stats.std(i) >= 0.0);
        }
    }

    #[test]
    fn window_stats_flag_constant_windows() {
        let mut values = vec![3.0; 10];
        values.extend([4.0, 7.0, 1.0, 2.0]);
        let stats = WindowStats::new(&values, 4);
        assert!(stats.is_constant(0));
        assert!(stats.is_constant(6));
        assert!(!stats.is_constant(8));
    }
}
