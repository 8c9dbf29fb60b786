//! Exact matrix-profile computation.
//!
//! [`ab_join`] annotates every window of a test series with its 1NN distance
//! into a train series; [`self_join`] does the same within one series while
//! excluding trivial matches around the query window. Distances are computed
//! in squared space through the sliding dot-product (QT) recurrence
//!
//! ```text
//! QT[i][j] = QT[i-1][j-1] - test[i-1]*train[j-1] + test[i+m-1]*train[j+m-1]
//! dist^2   = 2m * (1 - (QT/m - mu_a*mu_b) / (sigma_a*sigma_b))
//! ```
//!
//! with negatives clamped to zero before the square root. Rows are processed
//! in fixed-size blocks; each block restarts the recurrence from a direct dot
//! product, which bounds drift and lets blocks run on parallel workers while
//! keeping the result bit-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Series, WindowStats};

/// A matrix profile: per test window, the 1NN distance into the train side
/// and the neighbor's start index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileResult {
    pub profile: Vec<f64>,
    pub nn_index: Vec<usize>,
    pub m: usize,
}

impl ProfileResult {
    pub fn len(&self) -> usize {
        self.profile.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profile.is_empty()
    }
}

/// Join flavor: two distinct series, or one series against itself with an
/// exclusion zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JoinMode {
    Ab,
    SelfJoin,
}

/// Window length plus exclusion settings for a join.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinConfig {
    pub m: usize,
    pub exclusion_radius: usize,
    pub mode: JoinMode,
}

impl JoinConfig {
    pub fn ab(m: usize) -> Self {
        JoinConfig {
            m,
            exclusion_radius: 0,
            mode: JoinMode::Ab,
        }
    }

    pub fn self_join(m: usize) -> Self {
        JoinConfig {
            m,
            exclusion_radius: default_exclusion_radius(m),
            mode: JoinMode::SelfJoin,
        }
    }

    pub fn self_join_with_radius(m: usize, exclusion_radius: usize) -> Self {
        JoinConfig {
            m,
            exclusion_radius,
            mode: JoinMode::SelfJoin,
        }
    }
}

/// Standard trivial-match exclusion radius, ceil(m/2).
pub fn default_exclusion_radius(m: usize) -> usize {
    m.div_ceil(2)
}

/// AB-join matrix profile of `test` against `train`.
pub fn ab_join(train: &Series, test: &Series, m: usize) -> Result<ProfileResult> {
    check_lengths(train.len(), test.len(), m)?;
    let (profile, nn_index) = join_kernel(train.values(), test.values(), m, None)?;
    Ok(ProfileResult {
        profile,
        nn_index,
        m,
    })
}

/// Self-join matrix profile with trivial matches `|i - j| <= exclusion_radius`
/// excluded from the candidate set.
pub fn self_join(t: &Series, m: usize, exclusion_radius: usize) -> Result<ProfileResult> {
    if t.len() < 2 * m {
        return Err(Error::SeriesTooShort {
            len: t.len(),
            required: 2 * m,
        });
    }
    let q = t.len() - m + 1;
    // Rows i with q-1-r <= i <= r have an empty candidate set.
    if q <= 2 * exclusion_radius + 1 {
        return Err(Error::NoAdmissibleNeighbor {
            index: q.saturating_sub(exclusion_radius + 1),
            radius: exclusion_radius,
        });
    }
    let (profile, nn_index) = join_kernel(t.values(), t.values(), m, Some(exclusion_radius))?;
    Ok(ProfileResult {
        profile,
        nn_index,
        m,
    })
}

/// Run the join described by `cfg`; in self mode `test` is ignored.
pub fn join(train: &Series, test: &Series, cfg: &JoinConfig) -> Result<ProfileResult> {
    match cfg.mode {
        JoinMode::Ab => ab_join(train, test, cfg.m),
        JoinMode::SelfJoin => self_join(train, cfg.m, cfg.exclusion_radius),
    }
}

/// Arg-max of the profile and its value; ties go to the smallest index.
pub fn top_discord(p: &ProfileResult) -> (usize, f64) {
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0;
    for (i, &v) in p.profile.iter().enumerate() {
        if v > best {
            best = v;
            best_i = i;
        }
    }
    (best_i, best)
}

/// Greedy top-k discords: repeatedly take the arg-max, then mask
/// `+- exclusion_radius` around it. Returns up to `k` entries in descending
/// score order; fewer when masking exhausts the profile.
pub fn top_k_discords(
    p: &ProfileResult,
    k: usize,
    exclusion_radius: usize,
) -> Vec<(usize, f64)> {
    let mut masked = vec![false; p.profile.len()];
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = f64::NEG_INFINITY;
        let mut best_i = None;
        for (i, &v) in p.profile.iter().enumerate() {
            if !masked[i] && v > best {
                best = v;
                best_i = Some(i);
            }
        }
        let Some(idx) = best_i else { break };
        out.push((idx, best));
        let lo = idx.saturating_sub(exclusion_radius);
        let hi = (idx + exclusion_radius).min(p.profile.len() - 1);
        for flag in &mut masked[lo..=hi] {
            *flag = true;
        }
    }
    out
}

fn check_lengths(train_n: usize, test_n: usize, m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::invalid_config("window length m must be >= 2"));
    }
    if train_n < m {
        return Err(Error::SeriesTooShort {
            len: train_n,
            required: m,
        });
    }
    if test_n < m {
        return Err(Error::SeriesTooShort {
            len: test_n,
            required: m,
        });
    }
    Ok(())
}

/// Rows per block. Each block pays one direct O(n*m) dot-product row, so the
/// block must be long enough to amortize it.
fn block_rows(m: usize) -> usize {
    (8 * m).max(512)
}

struct JoinContext<'a> {
    train: &'a [f64],
    test: &'a [f64],
    m: usize,
    qa: usize,
    exclusion: Option<usize>,
    mu_a_m: Vec<f64>,
    inv_sig_a: Vec<f64>,
    const_a: &'a [bool],
    means_b: &'a [f64],
    stds_b: &'a [f64],
    const_b: &'a [bool],
    any_const: bool,
}

fn join_kernel(
    train: &[f64],
    test: &[f64],
    m: usize,
    exclusion: Option<usize>,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let stats_a = WindowStats::new(train, m);
    let stats_b = if std::ptr::eq(train, test) {
        None
    } else {
        Some(WindowStats::new(test, m))
    };
    let stats_b_ref = stats_b.as_ref().unwrap_or(&stats_a);

    let qa = stats_a.count();
    let qb = stats_b_ref.count();
    let mf = m as f64;

    let mu_a_m: Vec<f64> = stats_a.means_slice().iter().map(|mu| mu * mf).collect();
    let inv_sig_a: Vec<f64> = stats_a
        .stds_slice()
        .iter()
        .zip(stats_a.constant_slice())
        .map(|(&s, &c)| if c { 0.0 } else { 1.0 / s })
        .collect();

    let ctx = JoinContext {
        train,
        test,
        m,
        qa,
        exclusion,
        mu_a_m,
        inv_sig_a,
        const_a: stats_a.constant_slice(),
        means_b: stats_b_ref.means_slice(),
        stds_b: stats_b_ref.stds_slice(),
        const_b: stats_b_ref.constant_slice(),
        any_const: stats_a.any_constant() || stats_b_ref.any_constant(),
    };

    let mut profile = vec![0.0f64; qb];
    let mut nn_index = vec![0usize; qb];
    let block = block_rows(m);
    profile
        .par_chunks_mut(block)
        .zip(nn_index.par_chunks_mut(block))
        .enumerate()
        .for_each(|(bi, (prof_chunk, nn_chunk))| {
            compute_block(&ctx, bi * block, prof_chunk, nn_chunk);
        });
    Ok((profile, nn_index))
}

fn compute_block(ctx: &JoinContext<'_>, row0: usize, prof_out: &mut [f64], nn_out: &mut [usize]) {
    let m = ctx.m;
    let qa = ctx.qa;
    let mut prev = vec![0.0f64; qa];
    let mut cur = vec![0.0f64; qa];

    direct_qt_row(ctx.train, &ctx.test[row0..row0 + m], &mut prev);
    for (offset, (prof, nn)) in prof_out.iter_mut().zip(nn_out.iter_mut()).enumerate() {
        let i = row0 + offset;
        if offset > 0 {
            let b_old = ctx.test[i - 1];
            let b_new = ctx.test[i + m - 1];
            shift_qt_row(ctx.train, &prev, &mut cur, b_old, b_new, m);
            cur[0] = dot(&ctx.test[i..i + m], &ctx.train[..m]);
            std::mem::swap(&mut prev, &mut cur);
        }
        let (dist, idx) = if ctx.any_const {
            scan_row_guarded(ctx, i, &prev)
        } else {
            scan_row_fast(ctx, i, &prev)
        };
        *prof = dist;
        *nn = idx;
    }
}

/// Fused multiply-add where the hardware has it; plain ops otherwise
/// (`mul_add` without an fma unit falls back to a slow libm call).
#[inline(always)]
fn madd(a: f64, b: f64, c: f64) -> f64 {
    #[cfg(target_feature = "fma")]
    {
        a.mul_add(b, c)
    }
    #[cfg(not(target_feature = "fma"))]
    {
        a * b + c
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    const LANES: usize = 4;
    let mut lanes = [0.0f64; LANES];
    let mut a_it = a.chunks_exact(LANES);
    let mut b_it = b.chunks_exact(LANES);
    for (ac, bc) in (&mut a_it).zip(&mut b_it) {
        for l in 0..LANES {
            lanes[l] = madd(ac[l], bc[l], lanes[l]);
        }
    }
    let mut acc = lanes.into_iter().sum::<f64>();
    for (&x, &y) in a_it.remainder().iter().zip(b_it.remainder()) {
        acc = madd(x, y, acc);
    }
    acc
}

fn direct_qt_row(train: &[f64], test_window: &[f64], out: &mut [f64]) {
    let m = test_window.len();
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = dot(test_window, &train[j..j + m]);
    }
}

/// cur[j] = prev[j-1] - b_old*train[j-1] + b_new*train[j+m-1] for j >= 1.
fn shift_qt_row(train: &[f64], prev: &[f64], cur: &mut [f64], b_old: f64, b_new: f64, m: usize) {
    let qa = prev.len();
    if qa == 1 {
        return;
    }
    let shifted = qa - 1;
    let lo = &train[..shifted];
    let hi = &train[m..m + shifted];
    for (((c, &p), &alo), &ahi) in cur[1..].iter_mut().zip(&prev[..shifted]).zip(lo).zip(hi) {
        *c = madd(ahi, b_new, madd(alo, -b_old, p));
    }
}

/// Candidate index segments for row `i` honoring the exclusion zone.
#[inline]
fn segments(i: usize, qa: usize, exclusion: Option<usize>) -> [(usize, usize); 2] {
    match exclusion {
        None => [(0, qa), (0, 0)],
        Some(r) => {
            let left_end = i.saturating_sub(r).min(qa);
            let right_start = (i + r + 1).min(qa);
            [(0, left_end), (right_start, qa)]
        }
    }
}

/// Fast path: no constant windows on either side. Per row, the minimum
/// distance corresponds to the maximum of
/// `score_j = (QT[j] - m*mu_a[j]*mu_b) / sigma_a[j]`.
///
/// The max is reduced per fixed-size tile with a vectorizable lane loop; the
/// arg-max index is then located by rescanning only the first winning tile
/// with identical arithmetic, so ties resolve to the smallest index.
fn scan_row_fast(ctx: &JoinContext<'_>, i: usize, qt: &[f64]) -> (f64, usize) {
    const TILE: usize = 512;
    let mu_b = ctx.means_b[i];
    let sig_b = ctx.stds_b[i];
    let mf = ctx.m as f64;

    let mut best = f64::NEG_INFINITY;
    let mut best_tile = (0usize, 0usize);
    for (start, end) in segments(i, ctx.qa, ctx.exclusion) {
        let mut ts = start;
        while ts < end {
            let te = (ts + TILE).min(end);
            let tile_max = segment_max_score(
                &qt[ts..te],
                &ctx.mu_a_m[ts..te],
                &ctx.inv_sig_a[ts..te],
                mu_b,
            );
            if tile_max > best {
                best = tile_max;
                best_tile = (ts, te);
            }
            ts = te;
        }
    }
    let (ts, te) = best_tile;
    for (off, ((&q, &mu_m), &inv)) in qt[ts..te]
        .iter()
        .zip(&ctx.mu_a_m[ts..te])
        .zip(&ctx.inv_sig_a[ts..te])
        .enumerate()
    {
        if madd(mu_m, -mu_b, q) * inv == best {
            let d2 = (2.0 * mf - 2.0 * best / sig_b).max(0.0);
            return (d2.sqrt(), ts + off);
        }
    }
    unreachable!("maximum score is attained within the winning tile");
}

#[inline]
fn segment_max_score(qt: &[f64], mu_a_m: &[f64], inv_sig_a: &[f64], mu_b: f64) -> f64 {
    const LANES: usize = 8;
    let mut lanes = [f64::NEG_INFINITY; LANES];
    let mut q_it = qt.chunks_exact(LANES);
    let mut m_it = mu_a_m.chunks_exact(LANES);
    let mut i_it = inv_sig_a.chunks_exact(LANES);
    for ((qc, mc), ic) in (&mut q_it).zip(&mut m_it).zip(&mut i_it) {
        for l in 0..LANES {
            let score = madd(mc[l], -mu_b, qc[l]) * ic[l];
            lanes[l] = lanes[l].max(score);
        }
    }
    let mut best = lanes.into_iter().fold(f64::NEG_INFINITY, f64::max);
    for ((&q, &mm), &inv) in q_it
        .remainder()
        .iter()
        .zip(m_it.remainder())
        .zip(i_it.remainder())
    {
        best = best.max(madd(mm, -mu_b, q) * inv);
    }
    best
}

/// Guarded path taken when constant windows exist anywhere: a constant pair
/// is at distance 0, constant-vs-nonconstant is sqrt(m).
fn scan_row_guarded(ctx: &JoinContext<'_>, i: usize, qt: &[f64]) -> (f64, usize) {
    let mu_b = ctx.means_b[i];
    let mf = ctx.m as f64;
    let row_const = ctx.const_b[i];
    let inv_sig_b = if row_const { 0.0 } else { 1.0 / ctx.stds_b[i] };

    let mut best_d2 = f64::INFINITY;
    let mut best_j = 0usize;
    for (start, end) in segments(i, ctx.qa, ctx.exclusion) {
        for j in start..end {
            let d2 = match (row_const, ctx.const_a[j]) {
                (true, true) => 0.0,
                (true, false) | (false, true) => mf,
                (false, false) => {
                    let score = (qt[j] - ctx.mu_a_m[j] * mu_b) * ctx.inv_sig_a[j];
                    2.0 * mf - 2.0 * score * inv_sig_b
                }
            };
            if d2 < best_d2 {
                best_d2 = d2;
                best_j = j;
            }
        }
    }
    (best_d2.max(0.0).sqrt(), best_j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{znorm_dist, Series};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(values: Vec<f64>) -> Series {
        Series::new(values).unwrap()
    }

    fn random_series(rng: &mut ChaCha8Rng, n: usize) -> Series {
        let mut level = 0.0;
        series(
            (0..n)
                .map(|_| {
                    level += rng.gen_range(-1.0..1.0);
                    level
                })
                .collect(),
        )
    }

    /// Definitional oracle: explicit z-normalization, double loop.
    fn brute_join(
        train: &Series,
        test: &Series,
        m: usize,
        exclusion: Option<usize>,
    ) -> (Vec<f64>, Vec<usize>) {
        let qa = train.len() - m + 1;
        let qb = test.len() - m + 1;
        let mut profile = Vec::with_capacity(qb);
        let mut nn = Vec::with_capacity(qb);
        for i in 0..qb {
            let q = test.window(i, m).unwrap();
            let mut best = f64::INFINITY;
            let mut best_j = 0;
            for j in 0..qa {
                if let Some(r) = exclusion {
                    if i.abs_diff(j) <= r {
                        continue;
                    }
                }
                let d = znorm_dist(&q, &train.window(j, m).unwrap()).unwrap();
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

    #[test]
    fn ramp_ab_join_is_all_zeros() {
        let ramp = series((0..100).map(|i| i as f64 * 0.1).collect());
        let result = ab_join(&ramp, &ramp, 10).unwrap();
        for &v in &result.profile {
            assert!(v < 1e-6, "expected ~0, got {v}");
        }
    }

    #[test]
    fn planted_copy_is_found() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let train = random_series(&mut rng, 120);
        let mut test_values: Vec<f64> = (0..90).map(|_| rng.gen_range(-2.0..2.0)).collect();
        test_values[40..56].copy_from_slice(&train.values()[20..36]);
        let test = series(test_values);
        let result = ab_join(&train, &test, 16).unwrap();
        assert!(result.profile[40] < 1e-7, "got {}", result.profile[40]);
        assert_eq!(result.nn_index[40], 20);
    }

    #[test]
    fn ab_join_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [8, 16] {
            let train = random_series(&mut rng, 150);
            let test = random_series(&mut rng, 90);
            let got = ab_join(&train, &test, m).unwrap();
            let (profile, nn) = brute_join(&train, &test, m, None);
            for i in 0..profile.len() {
                assert!(
                    (got.profile[i] - profile[i]).abs() < 1e-6,
                    "m={m} i={i}: {} vs {}",
                    got.profile[i],
                    profile[i]
                );
                assert_eq!(got.nn_index[i], nn[i], "m={m} i={i}");
            }
        }
    }

    #[test]
    fn self_join_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let t = random_series(&mut rng, 160);
        let m = 16;
        let r = default_exclusion_radius(m);
        let got = self_join(&t, m, r).unwrap();
        let (profile, nn) = brute_join(&t, &t, m, Some(r));
        for i in 0..profile.len() {
            assert!((got.profile[i] - profile[i]).abs() < 1e-6, "i={i}");
            assert_eq!(got.nn_index[i], nn[i], "i={i}");
        }
    }

    #[test]
    fn self_join_finds_planted_motif() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut values: Vec<f64> = (0..200).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let motif: Vec<f64> = (0..16).map(|t| (t as f64 * 0.7).sin() * 3.0).collect();
        values[30..46].copy_from_slice(&motif);
        values[130..146].copy_from_slice(&motif);
        let t = series(values);
        let result = self_join(&t, 16, 8).unwrap();
        assert!(result.profile[30] < 1e-7);
        assert!(result.profile[130] < 1e-7);
        assert_eq!(result.nn_index[30], 130);
        assert_eq!(result.nn_index[130], 30);
    }

    #[test]
    fn self_join_degenerate_exclusion_errors() {
        let t = series((0..40).map(|i| (i as f64 * 0.3).sin()).collect());
        assert!(matches!(
            self_join(&t, 8, 33),
            Err(Error::NoAdmissibleNeighbor { .. })
        ));
        assert!(matches!(
            self_join(&t, 30, 1),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn profile_entries_lower_bound_every_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let train = random_series(&mut rng, 140);
        let test = random_series(&mut rng, 100);
        let m = 12;
        let result = ab_join(&train, &test, m).unwrap();
        for _ in 0..100 {
            let i = rng.gen_range(0..result.len());
            let j = rng.gen_range(0..train.len() - m + 1);
            let d = znorm_dist(
                &test.window(i, m).unwrap(),
                &train.window(j, m).unwrap(),
            )
            .unwrap();
            assert!(result.profile[i] <= d + 1e-9);
        }
    }

    #[test]
    fn constant_regions_follow_conventions() {
        let mut values = vec![0.5f64; 30];
        for (i, v) in values.iter_mut().enumerate().skip(14) {
            *v = (i as f64 * 0.9).sin() + 0.2 * i as f64;
        }
        let t = series(values.clone());
        let test = series(vec![1.0; 8]);
        let result = ab_join(&t, &test, 4).unwrap();
        // Constant test window vs constant train window at index 0.
        assert_eq!(result.profile[0], 0.0);
        assert_eq!(result.nn_index[0], 0);

        let got = ab_join(&test, &t, 4).unwrap();
        // Non-constant rows against an all-constant train side: sqrt(m).
        let tail = got.profile.last().unwrap();
        assert!((tail - 2.0).abs() < 1e-9);
    }

    #[test]
    fn top_discord_examples() {
        let p = ProfileResult {
            profile: vec![0.0, 0.0, 5.0, 0.0],
            nn_index: vec![0; 4],
            m: 4,
        };
        assert_eq!(top_discord(&p), (2, 5.0));

        let flat = ProfileResult {
            profile: vec![1.5; 6],
            nn_index: vec![0; 6],
            m: 4,
        };
        assert_eq!(top_discord(&flat), (0, 1.5));
    }

    #[test]
    fn top_k_matches_reference_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let profile: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..10.0)).collect();
        let p = ProfileResult {
            profile: profile.clone(),
            nn_index: vec![0; 200],
            m: 16,
        };
        assert_eq!(top_k_discords(&p, 1, 8)[0], top_discord(&p));

        let got = top_k_discords(&p, 3, 8);
        // Reference greedy masking.
        let mut values = profile;
        let mut want = Vec::new();
        for _ in 0..3 {
            let (mut bi, mut bv) = (None, f64::NEG_INFINITY);
            for (i, &v) in values.iter().enumerate() {
                if v.is_finite() && v > bv {
                    bv = v;
                    bi = Some(i);
                }
            }
            let Some(bi) = bi else { break };
            want.push((bi, bv));
            for v in values
                .iter_mut()
                .take((bi + 8 + 1).min(200))
                .skip(bi.saturating_sub(8))
            {
                *v = f64::NEG_INFINITY;
            }
        }
        assert_eq!(got, want);
        assert!(got.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn top_k_two_spikes() {
        let mut profile = vec![0.1; 100];
        profile[20] = 9.0;
        profile[70] = 7.0;
        let p = ProfileResult {
            profile,
            nn_index: vec![0; 100],
            m: 8,
        };
        let got = top_k_discords(&p, 2, 10);
        assert_eq!(got[0], (20, 9.0));
        assert_eq!(got[1], (70, 7.0));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let train = random_series(&mut rng, 400);
        let test = random_series(&mut rng, 300);
        let base = ab_join(&train, &test, 16).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let single = pool.install(|| ab_join(&train, &test, 16).unwrap());
        assert_eq!(base, single);
    }
}
