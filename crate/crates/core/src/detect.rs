//! Two-phase sketched discord detection and the exact baseline.
//!
//! Phase 1 ([`time_detection`]) joins only the `k` sketched group series and
//! returns the discord's time index and group; its runtime is independent of
//! the original dimension count. Phase 2 ([`dimension_detection`]) scans the
//! few raw dimensions of the winning group at the detected window to recover
//! the offending dimension. An optional [`refine`] step re-joins the full
//! identified dimension to tighten the index and score. [`exact_discord`]
//! is the `O(d * n_train * n_test)` per-dimension baseline used as ground
//! truth.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{
    ab_join, default_exclusion_radius, self_join, top_discord, top_k_discords, JoinMode,
    ProfileResult,
};
use crate::series::{nn_dist_excluding, MultiSeries};
use crate::sketch::{sketch, sketch_pair, GroupAssignment, SketchPlan, SketchedSeries};

/// Wall-clock milliseconds per pipeline phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub sketch_ms: f64,
    pub phase1_ms: f64,
    pub phase2_ms: f64,
    pub refine_ms: f64,
}

/// A detected discord: where, which group, which dimension, how anomalous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscordReport {
    pub i_star: usize,
    pub g_star: usize,
    pub j_star: String,
    pub score: f64,
    pub refined: bool,
    pub k: usize,
    pub seed: u64,
    pub m: usize,
    pub timings: Timings,
}

/// End-to-end detection settings. `k == 0` selects `ceil(sqrt(d))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub refine: bool,
    pub mode: JoinMode,
    pub top_k: usize,
}

impl DetectionConfig {
    pub fn new(m: usize, k: usize, seed: u64) -> Self {
        DetectionConfig {
            m,
            k,
            seed,
            refine: false,
            mode: JoinMode::Ab,
            top_k: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 4 {
            return Err(Error::invalid_config("window length m must be >= 4"));
        }
        if self.top_k < 1 {
            return Err(Error::invalid_config("top_k must be >= 1"));
        }
        Ok(())
    }
}

/// Phase-1 result: best (time index, group) across sketched group joins.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDetection {
    pub i_star: usize,
    pub g_star: usize,
    pub score: f64,
    /// Constant or empty groups skipped during the scan.
    pub inert_groups: Vec<usize>,
}

/// Scan every sketched group with a matrix-profile join and return the
/// best-so-far discord (index, group, score); ties go to the smallest group.
pub fn time_detection(
    r_train: &SketchedSeries,
    r_test: &SketchedSeries,
    m: usize,
    mode: JoinMode,
) -> Result<TimeDetection> {
    let (detection, _) = time_detection_profiles(r_train, r_test, m, mode)?;
    Ok(detection)
}

/// `time_detection` that also hands back the per-group profiles (`None` for
/// inert groups), for top-k candidate extraction.
pub fn time_detection_profiles(
    r_train: &SketchedSeries,
    r_test: &SketchedSeries,
    m: usize,
    mode: JoinMode,
) -> Result<(TimeDetection, Vec<Option<ProfileResult>>)> {
    if r_train.plan() != r_test.plan() {
        return Err(Error::PlanMismatch);
    }
    let k = r_train.k();
    let mut inert = Vec::new();
    let mut active: Vec<usize> = Vec::with_capacity(k);
    for g in 0..k {
        if r_train.group(g).is_constant() || r_test.group(g).is_constant() {
            inert.push(g);
        } else {
            active.push(g);
        }
    }
    if active.is_empty() {
        return Err(Error::AllGroupsInert { k });
    }

    let joined: Vec<(usize, ProfileResult)> = active
        .par_iter()
        .map(|&g| {
            let profile = match mode {
                JoinMode::Ab => ab_join(r_train.group(g), r_test.group(g), m),
                JoinMode::SelfJoin => {
                    self_join(r_train.group(g), m, default_exclusion_radius(m))
                }
            };
            profile.map(|p| (g, p))
        })
        .collect::<Result<_>>()?;

    // Best-so-far reduction in fixed group order, smallest group wins ties.
    let mut best: Option<(usize, usize, f64)> = None;
    let mut profiles: Vec<Option<ProfileResult>> = vec![None; k];
    for (g, profile) in joined {
        let (i, score) = top_discord(&profile);
        if best.map_or(true, |(_, _, s)| score > s) {
            best = Some((i, g, score));
        }
        profiles[g] = Some(profile);
    }
    let (i_star, g_star, score) = best.expect("at least one active group");
    Ok((
        TimeDetection {
            i_star,
            g_star,
            score,
            inert_groups: inert,
        },
        profiles,
    ))
}

/// Among the dimensions of one group, find the one whose test window at
/// `i_star` is farthest from its nearest training neighbor. Ties go to the
/// lexicographically smallest name. `exclude` carries the self-mode trivial
/// match zone `(center, radius)`.
pub fn dimension_detection(
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    i_star: usize,
    m: usize,
    group: &GroupAssignment,
    exclude: Option<(usize, usize)>,
) -> Result<(String, f64)> {
    if group.names.is_empty() {
        return Err(Error::EmptyGroup { group: group.group });
    }
    let mut best: Option<(&str, f64)> = None;
    for name in &group.names {
        let train_dim = t_train.dim(name).ok_or_else(|| Error::MissingDimension {
            name: name.clone(),
        })?;
        let test_dim = t_test.dim(name).ok_or_else(|| Error::MissingDimension {
            name: name.clone(),
        })?;
        let window = test_dim.window(i_star, m)?;
        let (score, _) = nn_dist_excluding(&window, train_dim, m, exclude)?;
        if best.map_or(true, |(_, s)| score > s) {
            best = Some((name, score));
        }
    }
    let (name, score) = best.expect("group checked non-empty");
    Ok((name.to_string(), score))
}

/// Join the full identified dimension and return its top discord. The result
/// maximizes over a superset of the phase-2 window, so its score is at least
/// the phase-2 score.
pub fn refine(
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    j_star: &str,
    m: usize,
    mode: JoinMode,
) -> Result<(usize, f64)> {
    let train_dim = t_train.dim(j_star).ok_or_else(|| Error::UnknownDimension {
        name: j_star.to_string(),
    })?;
    let test_dim = t_test.dim(j_star).ok_or_else(|| Error::UnknownDimension {
        name: j_star.to_string(),
    })?;
    let profile = match mode {
        JoinMode::Ab => ab_join(train_dim, test_dim, m)?,
        JoinMode::SelfJoin => self_join(train_dim, m, default_exclusion_radius(m))?,
    };
    let (i, score) = top_discord(&profile);
    Ok((i, score))
}

/// Exact multidimensional discord: run a matrix-profile join per dimension
/// and maximize the score over (dimension, index). Ties prefer the earlier
/// dimension, then the smaller index.
pub fn exact_discord(
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    m: usize,
) -> Result<DiscordReport> {
    exact_impl(t_train, t_test, m, JoinMode::Ab, 0)
}

/// Exact single-series discord with a self-join per dimension.
pub fn exact_discord_self(
    t: &MultiSeries,
    m: usize,
    exclusion_radius: usize,
) -> Result<DiscordReport> {
    exact_impl(t, t, m, JoinMode::SelfJoin, exclusion_radius)
}

fn exact_impl(
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    m: usize,
    mode: JoinMode,
    exclusion_radius: usize,
) -> Result<DiscordReport> {
    let started = Instant::now();
    let d = t_train.d();
    let per_dim: Vec<(usize, usize, f64, String)> = (0..d)
        .into_par_iter()
        .map(|pos| {
            let (name, train_dim) = t_train.dim_at(pos);
            let test_dim = t_test.dim(name).ok_or_else(|| Error::MissingDimension {
                name: name.to_string(),
            })?;
            let profile = match mode {
                JoinMode::Ab => ab_join(train_dim, test_dim, m)?,
                JoinMode::SelfJoin => self_join(train_dim, m, exclusion_radius)?,
            };
            let (i, score) = top_discord(&profile);
            Ok((pos, i, score, name.to_string()))
        })
        .collect::<Result<_>>()?;

    let mut best: Option<&(usize, usize, f64, String)> = None;
    for entry in &per_dim {
        if best.map_or(true, |b| entry.2 > b.2) {
            best = Some(entry);
        }
    }
    let (pos, i_star, score, name) = best.expect("d >= 1").clone();
    let phase1_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(DiscordReport {
        i_star,
        g_star: pos,
        j_star: name,
        score,
        refined: false,
        k: d,
        seed: 0,
        m,
        timings: Timings {
            phase1_ms,
            ..Timings::default()
        },
    })
}

/// Full sketched pipeline: sketch both series under one seeded plan, detect
/// the discord's time and group on the sketches, recover the dimension, and
/// optionally refine.
pub fn detect(
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    cfg: &DetectionConfig,
) -> Result<DiscordReport> {
    let plan = plan_for(t_train, cfg)?;
    detect_with_plan(t_train, t_test, cfg, &plan)
}

/// Single-series variant: self-joins with the default exclusion are used
/// throughout the pipeline.
pub fn detect_self(t: &MultiSeries, cfg: &DetectionConfig) -> Result<DiscordReport> {
    let cfg = DetectionConfig {
        mode: JoinMode::SelfJoin,
        ..*cfg
    };
    let plan = plan_for(t, &cfg)?;
    detect_with_plan(t, t, &cfg, &plan)
}

/// `detect` with an externally built plan (identity or forced plans).
pub fn detect_with_plan(
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    cfg: &DetectionConfig,
    plan: &SketchPlan,
) -> Result<DiscordReport> {
    let (report, _) = detect_with_diagnostics(t_train, t_test, cfg, plan)?;
    Ok(report)
}

/// `detect_with_plan` that also reports which sketched groups were inert.
pub fn detect_with_diagnostics(
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    cfg: &DetectionConfig,
    plan: &SketchPlan,
) -> Result<(DiscordReport, Vec<usize>)> {
    cfg.validate()?;
    let started = Instant::now();
    let (r_train, r_test) = match cfg.mode {
        JoinMode::Ab => sketch_pair(t_train, t_test, plan)?,
        JoinMode::SelfJoin => {
            let r = sketch(t_train, plan)?;
            (r.clone(), r)
        }
    };
    let sketch_ms = started.elapsed().as_secs_f64() * 1e3;

    let (report, inert) = detect_sketched(&r_train, &r_test, t_train, t_test, cfg)?;
    Ok((
        DiscordReport {
            seed: plan.seed(),
            timings: Timings {
                sketch_ms,
                ..report.timings
            },
            ..report
        },
        inert,
    ))
}

/// Detection phases on pre-built sketches; `t_train`/`t_test` supply the raw
/// dimensions for phase 2 and refinement. Lets callers reuse dynamically
/// updated sketches.
pub fn detect_sketched(
    r_train: &SketchedSeries,
    r_test: &SketchedSeries,
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    cfg: &DetectionConfig,
) -> Result<(DiscordReport, Vec<usize>)> {
    cfg.validate()?;
    let t_test = match cfg.mode {
        JoinMode::Ab => t_test,
        JoinMode::SelfJoin => t_train,
    };

    let started = Instant::now();
    let phase1 = time_detection(r_train, r_test, cfg.m, cfg.mode)?;
    let phase1_ms = started.elapsed().as_secs_f64() * 1e3;

    let exclude = phase2_exclusion(cfg, phase1.i_star);
    let group = r_train.plan().group_members(phase1.g_star);
    let started = Instant::now();
    let (j_star, mut score) =
        dimension_detection(t_train, t_test, phase1.i_star, cfg.m, &group, exclude)?;
    let phase2_ms = started.elapsed().as_secs_f64() * 1e3;

    let mut i_star = phase1.i_star;
    let mut refine_ms = 0.0;
    if cfg.refine {
        let started = Instant::now();
        let (i, s) = refine(t_train, t_test, &j_star, cfg.m, cfg.mode)?;
        refine_ms = started.elapsed().as_secs_f64() * 1e3;
        i_star = i;
        score = s;
    }

    Ok((
        DiscordReport {
            i_star,
            g_star: phase1.g_star,
            j_star,
            score,
            refined: cfg.refine,
            k: r_train.k(),
            seed: r_train.plan().seed(),
            m: cfg.m,
            timings: Timings {
                sketch_ms: 0.0,
                phase1_ms,
                phase2_ms,
                refine_ms,
            },
        },
        phase1.inert_groups,
    ))
}

/// Top-K pipeline: greedy masking over the phase-1 group profiles picks K
/// (group, index) candidates, each of which gets its own dimension recovery
/// and optional refinement. Reports come back in descending score order.
pub fn detect_topk(
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    cfg: &DetectionConfig,
) -> Result<Vec<DiscordReport>> {
    cfg.validate()?;
    let plan = plan_for(t_train, cfg)?;

    let started = Instant::now();
    let (r_train, r_test) = match cfg.mode {
        JoinMode::Ab => sketch_pair(t_train, t_test, &plan)?,
        JoinMode::SelfJoin => {
            let r = sketch(t_train, &plan)?;
            (r.clone(), r)
        }
    };
    let sketch_ms = started.elapsed().as_secs_f64() * 1e3;
    let raw_test = match cfg.mode {
        JoinMode::Ab => t_test,
        JoinMode::SelfJoin => t_train,
    };

    let started = Instant::now();
    let (_, mut profiles) = time_detection_profiles(&r_train, &r_test, cfg.m, cfg.mode)?;
    let phase1_ms = started.elapsed().as_secs_f64() * 1e3;

    // Greedy candidate extraction across groups; masking radius ceil(m/2)
    // within the chosen group's profile.
    let radius = default_exclusion_radius(cfg.m);
    let mut candidates: Vec<(usize, usize, f64)> = Vec::with_capacity(cfg.top_k);
    for _ in 0..cfg.top_k {
        let mut best: Option<(usize, usize, f64)> = None;
        for (g, slot) in profiles.iter().enumerate() {
            let Some(profile) = slot else { continue };
            let picks = top_k_discords(profile, 1, 0);
            let Some(&(i, score)) = picks.first() else {
                continue;
            };
            if score.is_finite() && best.map_or(true, |(_, _, s)| score > s) {
                best = Some((g, i, score));
            }
        }
        let Some((g, i, score)) = best else { break };
        candidates.push((g, i, score));
        let profile = profiles[g].as_mut().expect("candidate group is active");
        let lo = i.saturating_sub(radius);
        let hi = (i + radius).min(profile.profile.len() - 1);
        for v in &mut profile.profile[lo..=hi] {
            *v = f64::NEG_INFINITY;
        }
    }

    let mut reports = Vec::with_capacity(candidates.len());
    for (g, i, _) in candidates {
        let group = plan.group_members(g);
        let exclude = phase2_exclusion(cfg, i);
        let started = Instant::now();
        let (j_star, mut score) =
            dimension_detection(t_train, raw_test, i, cfg.m, &group, exclude)?;
        let phase2_ms = started.elapsed().as_secs_f64() * 1e3;
        let mut i_star = i;
        let mut refine_ms = 0.0;
        if cfg.refine {
            let started = Instant::now();
            let (ri, rs) = refine(t_train, raw_test, &j_star, cfg.m, cfg.mode)?;
            refine_ms = started.elapsed().as_secs_f64() * 1e3;
            i_star = ri;
            score = rs;
        }
        reports.push(DiscordReport {
            i_star,
            g_star: g,
            j_star,
            score,
            refined: cfg.refine,
            k: r_train.k(),
            seed: plan.seed(),
            m: cfg.m,
            timings: Timings {
                sketch_ms,
                phase1_ms,
                phase2_ms,
                refine_ms,
            },
        });
    }
    reports.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.g_star.cmp(&b.g_star))
            .then(a.i_star.cmp(&b.i_star))
    });
    Ok(reports)
}

fn plan_for(t_train: &MultiSeries, cfg: &DetectionConfig) -> Result<SketchPlan> {
    let names: Vec<&str> = t_train.names().collect();
    SketchPlan::new(&names, cfg.k, cfg.seed)
}

fn phase2_exclusion(cfg: &DetectionConfig, i_star: usize) -> Option<(usize, usize)> {
    match cfg.mode {
        JoinMode::Ab => None,
        JoinMode::SelfJoin => Some((i_star, default_exclusion_radius(cfg.m))),
    }
}
