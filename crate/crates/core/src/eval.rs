//! Experiment harnesses: the success-rate/speedup benchmark, score-density
//! summaries, anomaly scoring with ROC-AUC, and the statistical suites
//! backing the sketch's unbiasedness/variance, Chebyshev threshold, and
//! noisy-periodic recovery guarantees.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::{
    displacement_norm, gen_periodic, gen_random_walk, plant_discord, PeriodicConfig, PlantShape,
    PlantSpec, WalkConfig,
};
use crate::detect::{detect, DetectionConfig};
use rayon::prelude::*;
use crate::error::{Error, Result};
use crate::profile::ab_join;
use crate::series::MultiSeries;
use crate::sketch::{auto_k, splitmix64};

/// One (window, dimension) pair with its discord score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub index: usize,
    pub dim: usize,
    pub score: f64,
}

/// Every (window, dimension) discord score, descending; ties order by
/// dimension then index.
#[derive(Debug, Clone, PartialEq)]
pub struct RankList {
    pub entries: Vec<RankEntry>,
}

impl RankList {
    /// Competition rank (1-based) of a score: one plus the number of entries
    /// strictly greater.
    pub fn rank_of_score(&self, score: f64) -> usize {
        1 + self.entries.iter().take_while(|e| e.score > score).count()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Concatenate all per-dimension AB-join profiles and sort descending.
pub fn build_rank_list(
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    m: usize,
) -> Result<RankList> {
    let mut entries = Vec::new();
    for pos in 0..t_train.d() {
        let (name, train_dim) = t_train.dim_at(pos);
        let test_dim = t_test.dim(name).ok_or_else(|| Error::MissingDimension {
            name: name.to_string(),
        })?;
        let profile = ab_join(train_dim, test_dim, m)?;
        entries.extend(
            profile
                .profile
                .iter()
                .enumerate()
                .map(|(index, &score)| RankEntry {
                    index,
                    dim: pos,
                    score,
                }),
        );
    }
    entries.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.dim.cmp(&b.dim))
            .then(a.index.cmp(&b.index))
    });
    Ok(RankList { entries })
}

/// One success-rate trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub success: bool,
    pub rank_fraction: f64,
    pub fast_ms: f64,
    pub exact_ms: f64,
}

/// Aggregated result for one dimensionality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRateResult {
    pub d: usize,
    pub k: usize,
    pub success_rate: f64,
    pub mean_speedup: f64,
    pub trials: Vec<TrialOutcome>,
}

/// Settings for the random-walk success-rate/speedup experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRateConfig {
    pub dims: Vec<usize>,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    /// Success when the sketched pick ranks within this top fraction.
    pub threshold: f64,
    pub seed: u64,
    /// Group count; 0 selects `ceil(sqrt(d))` per grid point.
    pub k: usize,
    pub refine: bool,
}

impl SuccessRateConfig {
    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.trials == 0 {
            return Err(Error::invalid_config("need at least one d value and one trial"));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::invalid_config("threshold must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Per trial: generate train/test random walks, run the sketched detector
/// (timed, sketching included) and the exact baseline (timed), then place the
/// sketched pick's score in the full rank list. Success means its rank
/// fraction is at or below the threshold; speedup is `exact_ms / fast_ms`.
pub fn success_rate_experiment(cfg: &SuccessRateConfig) -> Result<Vec<SuccessRateResult>> {
    cfg.validate()?;
    let mut results = Vec::with_capacity(cfg.dims.len());
    for &d in &cfg.dims {
        let k = if cfg.k == 0 { auto_k(d) } else { cfg.k };
        let mut trials = Vec::with_capacity(cfg.trials);
        for trial in 0..cfg.trials {
            let trial_seed = splitmix64(cfg.seed ^ splitmix64((d as u64) << 20 | trial as u64));
            let train = gen_random_walk(&WalkConfig::new(d, cfg.n, trial_seed))?;
            let test = gen_random_walk(&WalkConfig::new(d, cfg.n, splitmix64(trial_seed)))?;

            let det_cfg = DetectionConfig {
                refine: cfg.refine,
                ..DetectionConfig::new(cfg.m, k, splitmix64(trial_seed ^ 0xD1CE))
            };
            let started = Instant::now();
            let fast = detect(&train, &test, &det_cfg)?;
            let fast_ms = started.elapsed().as_secs_f64() * 1e3;

            // Exact baseline: the timed region covers the per-dimension joins
            // and the arg-max; the rank count reuses the same profiles.
            let started = Instant::now();
            let profiles: Vec<Vec<f64>> = (0..d)
                .into_par_iter()
                .map(|pos| {
                    let (name, train_dim) = train.dim_at(pos);
                    Ok(ab_join(train_dim, test.dim(name).unwrap(), cfg.m)?.profile)
                })
                .collect::<Result<_>>()?;
            let _exact_score = profiles
                .iter()
                .flat_map(|p| p.iter())
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            let exact_ms = started.elapsed().as_secs_f64() * 1e3;

            // Rank of the sketched pick among all (window, dimension) scores.
            let windows = cfg.n - cfg.m + 1;
            let total = d * windows;
            let greater: usize = profiles
                .iter()
                .map(|p| p.iter().filter(|&&v| v > fast.score).count())
                .sum();
            let rank_fraction = (greater + 1) as f64 / total as f64;
            trials.push(TrialOutcome {
                trial,
                success: rank_fraction <= cfg.threshold,
                rank_fraction,
                fast_ms,
                exact_ms,
            });
        }
        let success_rate =
            trials.iter().filter(|t| t.success).count() as f64 / trials.len() as f64;
        let mean_speedup = trials
            .iter()
            .map(|t| t.exact_ms / t.fast_ms.max(1e-9))
            .sum::<f64>()
            / trials.len() as f64;
        results.push(SuccessRateResult {
            d,
            k,
            success_rate,
            mean_speedup,
            trials,
        });
    }
    Ok(results)
}

/// Summary statistics plus a fixed-width histogram of one score population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Vec<HistogramBin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl ScoreDistribution {
    pub fn from_scores(scores: &[f64], bins: usize) -> Self {
        assert!(!scores.is_empty());
        let count = scores.len();
        let mean = scores.iter().sum::<f64>() / count as f64;
        let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / count as f64;
        let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = ((max - min) / bins as f64).max(f64::MIN_POSITIVE);
        let mut histogram: Vec<HistogramBin> = (0..bins)
            .map(|b| HistogramBin {
                lo: min + b as f64 * width,
                hi: min + (b + 1) as f64 * width,
                count: 0,
            })
            .collect();
        for &s in scores {
            let b = (((s - min) / width) as usize).min(bins - 1);
            histogram[b].count += 1;
        }
        ScoreDistribution {
            count,
            mean,
            std: var.sqrt(),
            min,
            max,
            histogram,
        }
    }
}

/// Density comparison of Fig. 4 style: scores of all windows, of the exact
/// discord, and of sketched discords across hash seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDensityReport {
    pub all_windows: ScoreDistribution,
    pub exact_discords: ScoreDistribution,
    pub sketched_discords: ScoreDistribution,
    pub exact_score: f64,
    /// (exact score - mean sketched score) / std of sketched scores.
    pub deviation_sigmas: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Fixed dataset; per trial, a fresh hash seed drives the sketched detector.
pub fn score_density(
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    m: usize,
    trials: usize,
    seed: u64,
    k: usize,
    refine: bool,
) -> Result<ScoreDensityReport> {
    if trials == 0 {
        return Err(Error::invalid_config("need at least one trial"));
    }
    let rank_list = build_rank_list(t_train, t_test, m)?;
    let all_scores: Vec<f64> = rank_list.entries.iter().map(|e| e.score).collect();
    let exact_score = all_scores[0];

    let k = if k == 0 { auto_k(t_train.d()) } else { k };
    let mut sketched = Vec::with_capacity(trials);
    for trial in 0..trials {
        let cfg = DetectionConfig {
            refine,
            ..DetectionConfig::new(m, k, splitmix64(seed ^ (trial as u64)))
        };
        sketched.push(detect(t_train, t_test, &cfg)?.score);
    }

    let sketched_dist = ScoreDistribution::from_scores(&sketched, 50.min(trials.max(1)));
    let deviation_sigmas = if sketched_dist.std > 0.0 {
        (exact_score - sketched_dist.mean) / sketched_dist.std
    } else {
        0.0
    };
    Ok(ScoreDensityReport {
        all_windows: ScoreDistribution::from_scores(&all_scores, 50),
        exact_discords: ScoreDistribution::from_scores(&[exact_score], 1),
        sketched_discords: sketched_dist,
        exact_score,
        deviation_sigmas,
        trials,
        seed,
    })
}

/// Per-window anomaly scores of one dimension: its AB-join profile.
pub fn anomaly_scores(
    t_train: &MultiSeries,
    t_test: &MultiSeries,
    dimension: &str,
    m: usize,
) -> Result<Vec<f64>> {
    let train_dim = t_train
        .dim(dimension)
        .ok_or_else(|| Error::UnknownDimension {
            name: dimension.to_string(),
        })?;
    let test_dim = t_test
        .dim(dimension)
        .ok_or_else(|| Error::UnknownDimension {
            name: dimension.to_string(),
        })?;
    Ok(ab_join(train_dim, test_dim, m)?.profile)
}

/// Per-window anomaly scores with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl LabeledScores {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: scores.len(),
                right: labels.len(),
            });
        }
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            return Err(Error::SingleClass);
        }
        Ok(LabeledScores { scores, labels })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }
}

/// ROC-AUC as the normalized Mann-Whitney U statistic: the probability that a
/// random positive outscores a random negative, ties counted one half.
/// Computed with average ranks so tied scores are handled exactly.
pub fn roc_auc(ls: &LabeledScores) -> f64 {
    let n = ls.scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        ls.scores[a]
            .partial_cmp(&ls.scores[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    // Average ranks over tied runs (1-based ranks).
    let mut rank_sum_pos = 0.0;
    let mut n_pos = 0usize;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ls.scores[order[j]] == ls.scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if ls.labels[idx] {
                rank_sum_pos += avg_rank;
                n_pos += 1;
            }
        }
        i = j;
    }
    let n_neg = n - n_pos;
    (rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos as f64 * n_neg as f64)
}

/// Parameters of the three statistical suites. Defaults match the pinned
/// acceptance settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuiteConfig {
    pub seed: u64,
    /// Unbiasedness/variance suite: data shape and Monte-Carlo size.
    pub lemma1_d: usize,
    pub lemma1_k: usize,
    pub lemma1_n: usize,
    pub lemma1_trials: usize,
    pub lemma1_probes: usize,
    /// Chebyshev threshold suite.
    pub chebyshev_d: usize,
    pub chebyshev_k: usize,
    pub chebyshev_m: usize,
    pub chebyshev_seeds: usize,
    /// Noisy-periodic recovery suite.
    pub lemma2_d: usize,
    pub lemma2_period: usize,
    pub lemma2_num_periods: usize,
    pub lemma2_eta: f64,
    pub lemma2_m: usize,
    pub lemma2_seeds: usize,
}

impl LemmaSuiteConfig {
    pub fn new(seed: u64) -> Self {
        LemmaSuiteConfig {
            seed,
            lemma1_d: 64,
            lemma1_k: 8,
            lemma1_n: 128,
            lemma1_trials: 10_000,
            lemma1_probes: 20,
            chebyshev_d: 256,
            chebyshev_k: 16,
            chebyshev_m: 64,
            chebyshev_seeds: 400,
            lemma2_d: 32,
            lemma2_period: 48,
            lemma2_num_periods: 20,
            lemma2_eta: 0.05,
            lemma2_m: 24,
            lemma2_seeds: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub dim: String,
    pub index: usize,
    pub truth: f64,
    pub est_mean: f64,
    pub three_se: f64,
    pub mean_ok: bool,
    pub target_var: f64,
    pub emp_var: f64,
    pub var_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub d: usize,
    pub k: usize,
    pub trials: usize,
    pub probes: Vec<ProbeReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevDeltaReport {
    pub delta: f64,
    pub tau: f64,
    pub requested_norm: f64,
    pub realized_norm: f64,
    pub trials: usize,
    pub misses: usize,
    pub miss_rate: f64,
    /// delta plus three binomial standard errors.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevReport {
    pub d: usize,
    pub k: usize,
    pub m: usize,
    pub per_delta: Vec<ChebyshevDeltaReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub eta: f64,
    pub m: usize,
    pub planted_norm: f64,
    pub trials: usize,
    pub detections: usize,
    pub detection_rate: f64,
    pub required_rate: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuiteReport {
    pub lemma1: Lemma1Report,
    pub chebyshev: ChebyshevReport,
    pub lemma2: Lemma2Report,
    pub pass: bool,
}

/// Run all three statistical suites and report measured statistics with
/// pass/fail flags.
pub fn lemma_suite(cfg: &LemmaSuiteConfig) -> Result<LemmaSuiteReport> {
    let lemma1 = lemma1_suite(cfg)?;
    let chebyshev = chebyshev_suite(cfg)?;
    let lemma2 = lemma2_suite(cfg)?;
    let pass = lemma1.pass && chebyshev.pass && lemma2.pass;
    Ok(LemmaSuiteReport {
        lemma1,
        chebyshev,
        lemma2,
        pass,
    })
}

/// Unbiasedness and variance of the count-sketch point estimate over hash
/// seeds: `E[s(j) R^(g)_i] = z(T)^(j)_i` and
/// `Var = (1/k) * sum over j' != j of (z(T)^(j')_i)^2`.
pub fn lemma1_suite(cfg: &LemmaSuiteConfig) -> Result<Lemma1Report> {
    use crate::series::znormalize;
    use crate::sketch::{sketch, SketchPlan};

    let walk = gen_random_walk(&WalkConfig::new(cfg.lemma1_d, cfg.lemma1_n, cfg.seed))?;
    let normalized = MultiSeries::new(
        walk.iter()
            .map(|(name, s)| Ok((name.to_string(), znormalize(s)?)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let names: Vec<String> = normalized.names().map(String::from).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed ^ 0x1EE7));
    let probes: Vec<(usize, usize)> = (0..cfg.lemma1_probes)
        .map(|_| {
            (
                rng.gen_range(0..cfg.lemma1_d),
                rng.gen_range(0..cfg.lemma1_n),
            )
        })
        .collect();

    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.lemma1_trials); probes.len()];
    for trial in 0..cfg.lemma1_trials {
        let plan_seed = splitmix64(cfg.seed ^ splitmix64(0xA11CE ^ trial as u64));
        let plan = SketchPlan::new(&names, cfg.lemma1_k, plan_seed)?;
        let r = sketch(&normalized, &plan)?;
        for (probe, sink) in probes.iter().zip(&mut samples) {
            sink.push(r.estimate_value(&names[probe.0], probe.1)?);
        }
    }

    let mut reports = Vec::with_capacity(probes.len());
    for ((dim, index), values) in probes.iter().zip(&samples) {
        let truth = normalized.dim_at(*dim).1.values()[*index];
        let nt = values.len() as f64;
        let mean = values.iter().sum::<f64>() / nt;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nt - 1.0);
        let three_se = 3.0 * (var / nt).sqrt();
        let target_var = (0..cfg.lemma1_d)
            .filter(|j| j != dim)
            .map(|j| {
                let v = normalized.dim_at(j).1.values()[*index];
                v * v
            })
            .sum::<f64>()
            / cfg.lemma1_k as f64;
        let mean_ok = (mean - truth).abs() <= three_se;
        let var_ok = var >= 0.8 * target_var && var <= 1.2 * target_var;
        reports.push(ProbeReport {
            dim: names[*dim].clone(),
            index: *index,
            truth,
            est_mean: mean,
            three_se,
            mean_ok,
            target_var,
            emp_var: var,
            var_ok,
        });
    }
    let pass = reports.iter().all(|p| p.mean_ok && p.var_ok);
    Ok(Lemma1Report {
        d: cfg.lemma1_d,
        k: cfg.lemma1_k,
        trials: cfg.lemma1_trials,
        probes: reports,
        pass,
    })
}

/// Detection threshold `tau(delta) = (1/sqrt(delta)) * m * d^(1/4)` at
/// `k = ceil(sqrt(d))`: a discord planted just above tau must be missed in at
/// most a `delta` fraction of hash seeds (plus sampling slack). The data and
/// plant stay fixed; only the plan seed varies, matching the bound's
/// randomness model.
pub fn chebyshev_suite(cfg: &LemmaSuiteConfig) -> Result<ChebyshevReport> {
    let d = cfg.chebyshev_d;
    let m = cfg.chebyshev_m;
    // Smooth periodic background keeps natural discord scores far below the
    // planted one, the regime where the threshold bound is informative.
    let data_cfg = PeriodicConfig::new(d, 128, 4, 0.05, splitmix64(cfg.seed ^ 0xC4EB));
    let (train, test) = gen_periodic(&data_cfg)?;

    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed ^ 0xC4EC));
    let plant_dim = crate::datagen::dim_name(rng.gen_range(0..d));
    let plant_at = rng.gen_range(0..=test.n() - m);

    let mut per_delta = Vec::new();
    for delta in [0.25f64, 0.5] {
        let tau = (1.0 / delta.sqrt()) * m as f64 * (d as f64).powf(0.25);
        let requested = 1.05 * tau;
        let planted = plant_discord(
            &test,
            &PlantSpec {
                dimension: plant_dim.clone(),
                start: plant_at,
                m,
                delta_norm: requested,
                shape: PlantShape::Bump,
            },
        )?;
        let realized = displacement_norm(&test, &planted, &plant_dim, plant_at, m)?;

        let mut misses = 0usize;
        for trial in 0..cfg.chebyshev_seeds {
            let plan_seed = splitmix64(cfg.seed ^ splitmix64(0xC0DE ^ trial as u64));
            let det_cfg = DetectionConfig::new(m, cfg.chebyshev_k, plan_seed);
            let report = detect(&train, &planted, &det_cfg)?;
            let hit = report.j_star == plant_dim && report.i_star.abs_diff(plant_at) <= m;
            if !hit {
                misses += 1;
            }
        }
        let trials = cfg.chebyshev_seeds;
        let miss_rate = misses as f64 / trials as f64;
        let se = (delta * (1.0 - delta) / trials as f64).sqrt();
        let bound = delta + 3.0 * se;
        per_delta.push(ChebyshevDeltaReport {
            delta,
            tau,
            requested_norm: requested,
            realized_norm: realized,
            trials,
            misses,
            miss_rate,
            bound,
            pass: miss_rate <= bound,
        });
    }
    let pass = per_delta.iter().all(|r| r.pass);
    Ok(ChebyshevReport {
        d,
        k: cfg.chebyshev_k,
        m,
        per_delta,
        pass,
    })
}

/// Noisy-periodic recovery: on eta-periodic data, a discord with
/// displacement norm above `8 * m * eta` must be recovered (index within
/// +-m, correct dimension) in at least 95% of seeds. Data, plant position,
/// and hash seed all vary per trial.
pub fn lemma2_suite(cfg: &LemmaSuiteConfig) -> Result<Lemma2Report> {
    let m = cfg.lemma2_m;
    let planted_norm = 1.25 * 8.0 * m as f64 * cfg.lemma2_eta;
    let mut detections = 0usize;
    for trial in 0..cfg.lemma2_seeds {
        let trial_seed = splitmix64(cfg.seed ^ splitmix64(0x9E10 ^ trial as u64));
        let data_cfg = PeriodicConfig::new(
            cfg.lemma2_d,
            cfg.lemma2_period,
            cfg.lemma2_num_periods,
            cfg.lemma2_eta,
            trial_seed,
        );
        let (train, test) = gen_periodic(&data_cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(trial_seed ^ 0x51DE));
        let plant_dim = crate::datagen::dim_name(rng.gen_range(0..cfg.lemma2_d));
        let plant_at = rng.gen_range(0..=test.n() - m);
        let planted = plant_discord(
            &test,
            &PlantSpec {
                dimension: plant_dim.clone(),
                start: plant_at,
                m,
                delta_norm: planted_norm,
                shape: PlantShape::Bump,
            },
        )?;

        let det_cfg = DetectionConfig::new(m, 0, splitmix64(trial_seed ^ 0xF00D));
        let report = detect(&train, &planted, &det_cfg)?;
        if report.j_star == plant_dim && report.i_star.abs_diff(plant_at) <= m {
            detections += 1;
        }
    }
    let detection_rate = detections as f64 / cfg.lemma2_seeds as f64;
    Ok(Lemma2Report {
        eta: cfg.lemma2_eta,
        m,
        planted_norm,
        trials: cfg.lemma2_seeds,
        detections,
        detection_rate,
        required_rate: 0.95,
        pass: detection_rate >= 0.95,
    })
}
