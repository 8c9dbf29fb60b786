//! Seeded synthetic data: random walks, noisy-periodic series, and discord
//! planting with a controllable displacement norm.
//!
//! Every generator is a pure function of its config; per-dimension streams
//! are derived from the master seed so generation parallelizes without
//! changing output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{MultiSeries, Series};
use crate::sketch::splitmix64;

/// Random-walk generator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub d: usize,
    pub n: usize,
    pub step_std: f64,
    pub seed: u64,
}

impl WalkConfig {
    pub fn new(d: usize, n: usize, seed: u64) -> Self {
        WalkConfig {
            d,
            n,
            step_std: 1.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::invalid_config("walk needs d >= 1 and n >= 1"));
        }
        if !(self.step_std > 0.0) {
            return Err(Error::invalid_config("step_std must be > 0"));
        }
        Ok(())
    }
}

/// Noisy-periodic generator settings. Each dimension repeats a smooth random
/// template whose period divides the joint period `P`; per-point noise has
/// standard deviation `eta` in the template's z-normalized scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicConfig {
    pub d: usize,
    /// Joint period P.
    pub period: usize,
    /// Training length in joint periods.
    pub num_periods: usize,
    pub eta: f64,
    pub seed: u64,
}

impl PeriodicConfig {
    pub fn new(d: usize, period: usize, num_periods: usize, eta: f64, seed: u64) -> Self {
        PeriodicConfig {
            d,
            period,
            num_periods,
            eta,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.num_periods == 0 {
            return Err(Error::invalid_config("periodic needs d >= 1 and num_periods >= 1"));
        }
        if self.period < 8 {
            return Err(Error::invalid_config("joint period P must be >= 8"));
        }
        if !(self.eta >= 0.0) {
            return Err(Error::invalid_config("eta must be >= 0"));
        }
        Ok(())
    }
}

/// Injected discord shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantShape {
    /// Raised half-sine; smooth, so detectability is governed by the
    /// displacement norm rather than edge discontinuities.
    Bump,
    /// Constant offset over the window.
    Step,
    /// High-frequency oscillation.
    Burst,
}

/// Where and how strongly to inject a discord. `delta_norm` is the Euclidean
/// norm of the injected displacement measured in the target series'
/// pre-injection global z-normalized scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub dimension: String,
    pub start: usize,
    pub m: usize,
    pub delta_norm: f64,
    pub shape: PlantShape,
}

fn dim_rng(seed: u64, stream: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(
        seed ^ splitmix64(stream.wrapping_add(0x85EB_CA6B)) ^ splitmix64(index as u64),
    ))
}

pub(crate) fn dim_name(index: usize) -> String {
    format!("dim{index:05}")
}

/// Cumulative sums of i.i.d. normal steps, one independent stream per
/// dimension.
pub fn gen_random_walk(cfg: &WalkConfig) -> Result<MultiSeries> {
    cfg.validate()?;
    let normal = Normal::new(0.0, cfg.step_std).expect("validated step_std");
    let dims = (0..cfg.d)
        .map(|j| {
            let mut rng = dim_rng(cfg.seed, 1, j);
            let mut level = 0.0;
            let values = (0..cfg.n)
                .map(|_| {
                    level += normal.sample(&mut rng);
                    level
                })
                .collect();
            (dim_name(j), Series::new(values).expect("finite walk"))
        })
        .collect();
    MultiSeries::new(dims)
}

/// Generate aligned train/test periodic series (train spans
/// `num_periods * P` points, test spans `2P`), both noisy copies of the same
/// per-dimension templates.
pub fn gen_periodic(cfg: &PeriodicConfig) -> Result<(MultiSeries, MultiSeries)> {
    let (train, test, _) = gen_periodic_with_templates(cfg)?;
    Ok((train, test))
}

/// `gen_periodic` that also returns each dimension's template (period
/// `p_j`), for residual diagnostics.
pub fn gen_periodic_with_templates(
    cfg: &PeriodicConfig,
) -> Result<(MultiSeries, MultiSeries, Vec<Vec<f64>>)> {
    cfg.validate()?;
    let n_train = cfg.num_periods * cfg.period;
    let n_test = 2 * cfg.period;
    let periods = admissible_periods(cfg.period);

    let mut train_dims = Vec::with_capacity(cfg.d);
    let mut test_dims = Vec::with_capacity(cfg.d);
    let mut templates = Vec::with_capacity(cfg.d);
    for j in 0..cfg.d {
        let mut rng = dim_rng(cfg.seed, 2, j);
        let p = periods[rng.gen_range(0..periods.len())];
        let template = smooth_template(&mut rng, p);
        let noise = Normal::new(0.0, cfg.eta.max(f64::MIN_POSITIVE)).expect("eta validated");
        let emit = |n: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n)
                .map(|t| {
                    let base = template[t % p];
                    if cfg.eta > 0.0 {
                        base + noise.sample(rng)
                    } else {
                        base
                    }
                })
                .collect()
        };
        // Train length is a multiple of P and p | P, so the test side starts
        // back at template phase 0: the two are phase-aligned.
        let train_values = emit(n_train, &mut rng);
        let test_values = emit(n_test, &mut rng);
        train_dims.push((dim_name(j), Series::new(train_values)?));
        test_dims.push((dim_name(j), Series::new(test_values)?));
        templates.push(template);
    }
    Ok((
        MultiSeries::new(train_dims)?,
        MultiSeries::new(test_dims)?,
        templates,
    ))
}

/// Divisors of P usable as per-dimension periods (>= 8 so templates carry
/// shape).
fn admissible_periods(p: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (8..=p).filter(|q| p % q == 0).collect();
    if out.is_empty() {
        out.push(p);
    }
    out
}

/// Random smooth template of length `p`: a few random harmonics of the base
/// frequency, z-normalized so the noise scale `eta` is meaningful.
fn smooth_template(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    let harmonics = rng.gen_range(1..=3);
    let params: Vec<(f64, f64)> = (1..=harmonics)
        .map(|h| {
            (
                rng.gen_range(0.5..1.5) / h as f64,
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let raw: Vec<f64> = (0..p)
        .map(|t| {
            params
                .iter()
                .enumerate()
                .map(|(idx, (a, phi))| {
                    let h = (idx + 1) as f64;
                    a * (std::f64::consts::TAU * h * t as f64 / p as f64 + phi).sin()
                })
                .sum()
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / p as f64;
    let var = raw.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / p as f64;
    let sigma = var.sqrt().max(1e-6);
    raw.iter().map(|v| (v - mean) / sigma).collect()
}

/// Inject a discord into one dimension. The shape is scaled so the window's
/// displacement has Euclidean norm `delta_norm` in the dimension's
/// pre-injection global z-normalized scale; all other points are untouched.
pub fn plant_discord(t: &MultiSeries, spec: &PlantSpec) -> Result<MultiSeries> {
    let series = t
        .dim(&spec.dimension)
        .ok_or_else(|| Error::UnknownDimension {
            name: spec.dimension.clone(),
        })?;
    if spec.start + spec.m > series.len() {
        return Err(Error::OutOfRange {
            start: spec.start,
            len: spec.m,
            n: series.len(),
        });
    }
    if spec.m < 2 {
        return Err(Error::invalid_config("plant window m must be >= 2"));
    }
    let sigma_pre = series.global_stats().sigma;
    let shape = unit_shape(spec.shape, spec.m);

    let mut values = series.values().to_vec();
    for (offset, s) in shape.iter().enumerate() {
        values[spec.start + offset] += spec.delta_norm * sigma_pre * s;
    }

    let dims = t
        .iter()
        .map(|(name, s)| {
            if name == spec.dimension {
                (name.to_string(), Series::new(values.clone()).expect("finite plant"))
            } else {
                (name.to_string(), s.clone())
            }
        })
        .collect();
    MultiSeries::new(dims)
}

/// Unit-L2 window shape.
fn unit_shape(shape: PlantShape, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = match shape {
        PlantShape::Bump => (0..m)
            .map(|t| (std::f64::consts::PI * (t as f64 + 0.5) / m as f64).sin())
            .collect(),
        PlantShape::Step => vec![1.0; m],
        PlantShape::Burst => (0..m)
            .map(|t| (std::f64::consts::PI * t as f64 / 2.0).sin() + if t % 2 == 0 { 1.0 } else { -1.0 })
            .collect(),
    };
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.iter().map(|v| v / norm).collect()
}

/// Measure the realized displacement between an original and a modified
/// series over one window, in the original's global z-normalized scale.
pub fn displacement_norm(
    original: &MultiSeries,
    modified: &MultiSeries,
    dimension: &str,
    start: usize,
    m: usize,
) -> Result<f64> {
    let before = original
        .dim(dimension)
        .ok_or_else(|| Error::UnknownDimension {
            name: dimension.to_string(),
        })?;
    let after = modified
        .dim(dimension)
        .ok_or_else(|| Error::UnknownDimension {
            name: dimension.to_string(),
        })?;
    if before.len() != after.len() {
        return Err(Error::LengthMismatch {
            left: before.len(),
            right: after.len(),
        });
    }
    if start + m > before.len() {
        return Err(Error::OutOfRange {
            start,
            len: m,
            n: before.len(),
        });
    }
    let sigma = before.global_stats().sigma;
    let sum: f64 = (start..start + m)
        .map(|i| {
            let diff = (after.values()[i] - before.values()[i]) / sigma;
            diff * diff
        })
        .sum();
    Ok(sum.sqrt())
}
