//! Count-sketch compression of a multidimensional series.
//!
//! A [`SketchPlan`] assigns every dimension a group in `[0, k)` and a sign in
//! `{-1, +1}`, both derived from a seeded keyed hash of the dimension *name*.
//! Name-keyed hashing keeps assignments stable when dimensions are added or
//! removed, which positional hashing of `[0, d)` would not. Sketching
//! z-normalizes each dimension globally and accumulates it, signed, into its
//! group's sum series. The sketch is linear: dimensions can be added,
//! deleted, and point-updated after construction, and
//! `sketch(A ∪ B) == sketch(A) + sketch(B)` for any disjoint split.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{znormalize_with, MultiSeries, NormStats, Series};

/// One dimension's group and sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimAssignment {
    pub group: usize,
    pub sign: f64,
}

/// The dimensions hashed to one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAssignment {
    pub group: usize,
    pub names: Vec<String>,
}

/// Seeded assignment of dimension names to signed groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchPlan {
    seed: u64,
    k: usize,
    assignments: BTreeMap<String, DimAssignment>,
}

/// `ceil(sqrt(d))`, the group count that balances the `O(k + d/k)` detection
/// cost.
pub fn auto_k(d: usize) -> usize {
    (d as f64).sqrt().ceil() as usize
}

impl SketchPlan {
    /// Build a plan for `dim_names` with `k` groups (`k == 0` selects
    /// `ceil(sqrt(d))`) and the given seed. Deterministic: the same names,
    /// `k`, and seed always reproduce the same assignments, independent of
    /// name order.
    pub fn new<S: AsRef<str>>(dim_names: &[S], k: usize, seed: u64) -> Result<Self> {
        if dim_names.is_empty() {
            return Err(Error::invalid_config("plan needs at least one dimension"));
        }
        let k = if k == 0 { auto_k(dim_names.len()) } else { k };
        let mut assignments = BTreeMap::new();
        for name in dim_names {
            let name = name.as_ref();
            if assignments
                .insert(name.to_string(), derive_assignment(seed, name, k))
                .is_some()
            {
                return Err(Error::DuplicateDimension {
                    name: name.to_string(),
                });
            }
        }
        Ok(SketchPlan {
            seed,
            k,
            assignments,
        })
    }

    /// Test hook: injective plan with `k == d`, dimension `i` in group `i`,
    /// all signs `+1`. With this plan the sketched pipeline degenerates to
    /// per-dimension detection.
    pub fn identity<S: AsRef<str>>(dim_names: &[S]) -> Result<Self> {
        let entries: Vec<(String, usize, f64)> = dim_names
            .iter()
            .enumerate()
            .map(|(i, name)| (name.as_ref().to_string(), i, 1.0))
            .collect();
        Self::from_assignments(0, dim_names.len(), entries)
    }

    /// Test hook: fully explicit assignments.
    pub fn from_assignments(
        seed: u64,
        k: usize,
        entries: Vec<(String, usize, f64)>,
    ) -> Result<Self> {
        if k == 0 || entries.is_empty() {
            return Err(Error::invalid_config("need k >= 1 and at least one dimension"));
        }
        let mut assignments = BTreeMap::new();
        for (name, group, sign) in entries {
            if group >= k {
                return Err(Error::invalid_config(format!(
                    "group {group} out of range for k={k}"
                )));
            }
            if sign != 1.0 && sign != -1.0 {
                return Err(Error::invalid_config("sign must be +1 or -1"));
            }
            if assignments
                .insert(name.clone(), DimAssignment { group, sign })
                .is_some()
            {
                return Err(Error::DuplicateDimension { name });
            }
        }
        Ok(SketchPlan {
            seed,
            k,
            assignments,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.assignments.len()
    }

    pub fn assignment(&self, name: &str) -> Option<DimAssignment> {
        self.assignments.get(name).copied()
    }

    /// Names iterate in lexicographic order.
    pub fn assignments(&self) -> impl Iterator<Item = (&str, DimAssignment)> {
        self.assignments.iter().map(|(n, a)| (n.as_str(), *a))
    }

    /// Members of group `g`, names in lexicographic order.
    pub fn group_members(&self, g: usize) -> GroupAssignment {
        GroupAssignment {
            group: g,
            names: self
                .assignments
                .iter()
                .filter(|(_, a)| a.group == g)
                .map(|(n, _)| n.clone())
                .collect(),
        }
    }

    pub fn groups(&self) -> Vec<GroupAssignment> {
        (0..self.k).map(|g| self.group_members(g)).collect()
    }

    fn insert_derived(&mut self, name: &str) -> Result<DimAssignment> {
        if self.assignments.contains_key(name) {
            return Err(Error::DuplicateDimension {
                name: name.to_string(),
            });
        }
        let assignment = derive_assignment(self.seed, name, self.k);
        self.assignments.insert(name.to_string(), assignment);
        Ok(assignment)
    }
}

/// Group and sign for one dimension name, drawn from a seeded keyed hash so
/// that each name's assignment is independent of every other name.
fn derive_assignment(seed: u64, name: &str, k: usize) -> DimAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(name_key(seed, name));
    let group = rng.gen_range(0..k);
    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    DimAssignment { group, sign }
}

fn name_key(seed: u64, name: &str) -> u64 {
    // FNV-1a over the name bytes, then mixed with the plan seed.
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in name.as_bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h ^ splitmix64(seed))
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// `k` signed group-sum series bound to the plan that produced them.
///
/// Group `g` holds `sum over j in J_g of sign(j) * znorm(T^(j))`, where each
/// dimension is globally z-normalized before accumulation. The per-dimension
/// normalization statistics are retained so deletions subtract exactly what
/// was added.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchedSeries {
    plan: SketchPlan,
    groups: Vec<Series>,
    norms: BTreeMap<String, NormStats>,
    n: usize,
}

/// Sketch `t` under `plan`, z-normalizing each dimension with its own
/// statistics.
pub fn sketch(t: &MultiSeries, plan: &SketchPlan) -> Result<SketchedSeries> {
    sketch_inner(t, plan, None)
}

/// Sketch `t` normalizing each dimension with externally supplied statistics
/// (a test series uses its training counterpart's statistics so the two
/// sketches stay commensurable).
pub fn sketch_with_stats(
    t: &MultiSeries,
    plan: &SketchPlan,
    stats: &BTreeMap<String, NormStats>,
) -> Result<SketchedSeries> {
    sketch_inner(t, plan, Some(stats))
}

/// Sketch a train/test pair under one plan; the test side is normalized with
/// the training statistics.
pub fn sketch_pair(
    train: &MultiSeries,
    test: &MultiSeries,
    plan: &SketchPlan,
) -> Result<(SketchedSeries, SketchedSeries)> {
    let r_train = sketch(train, plan)?;
    let r_test = sketch_with_stats(test, plan, r_train.norms())?;
    Ok((r_train, r_test))
}

fn sketch_inner(
    t: &MultiSeries,
    plan: &SketchPlan,
    stats: Option<&BTreeMap<String, NormStats>>,
) -> Result<SketchedSeries> {
    for (name, _) in plan.assignments() {
        if t.dim(name).is_none() {
            return Err(Error::MissingDimension {
                name: name.to_string(),
            });
        }
    }
    let n = t.n();
    let mut groups = vec![vec![0.0f64; n]; plan.k()];
    let mut norms = BTreeMap::new();
    // Single pass in the input dimension order; within each group the
    // accumulation order is therefore the input order.
    for (name, series) in t.iter() {
        let Some(assignment) = plan.assignment(name) else {
            return Err(Error::UnknownDimension {
                name: name.to_string(),
            });
        };
        let dim_stats = match stats {
            Some(map) => *map.get(name).ok_or_else(|| Error::MissingDimension {
                name: name.to_string(),
            })?,
            None => own_stats(name, series)?,
        };
        let normalized = znormalize_with(series, dim_stats)?;
        accumulate(&mut groups[assignment.group], normalized.values(), assignment.sign);
        norms.insert(name.to_string(), dim_stats);
    }
    Ok(SketchedSeries {
        plan: plan.clone(),
        groups: groups.into_iter().map(Series::from_raw).collect(),
        norms,
        n,
    })
}

fn own_stats(name: &str, series: &Series) -> Result<NormStats> {
    let stats = series.global_stats();
    if series.is_constant() {
        return Err(Error::ConstantSeries {
            dimension: Some(name.to_string()),
            sigma: stats.sigma,
        });
    }
    Ok(stats)
}

#[inline]
fn accumulate(group: &mut [f64], values: &[f64], sign: f64) {
    for (g, v) in group.iter_mut().zip(values) {
        *g += sign * v;
    }
}

impl SketchedSeries {
    pub fn plan(&self) -> &SketchPlan {
        &self.plan
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.plan.d()
    }

    pub fn group(&self, g: usize) -> &Series {
        &self.groups[g]
    }

    pub fn groups(&self) -> &[Series] {
        &self.groups
    }

    pub fn norms(&self) -> &BTreeMap<String, NormStats> {
        &self.norms
    }

    /// Add a dimension. Its assignment is derived deterministically from the
    /// plan seed and the name, so re-adding a previously sketched dimension
    /// reproduces its original group and sign.
    pub fn add_dimension(&self, name: &str, s: &Series) -> Result<SketchedSeries> {
        let stats = own_stats(name, s)?;
        self.add_dimension_with_stats(name, s, stats)
    }

    /// Add a dimension normalized with externally supplied statistics.
    pub fn add_dimension_with_stats(
        &self,
        name: &str,
        s: &Series,
        stats: NormStats,
    ) -> Result<SketchedSeries> {
        if s.len() != self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: s.len(),
            });
        }
        let mut next = self.clone();
        let assignment = next.plan.insert_derived(name)?;
        let normalized = znormalize_with(s, stats)?;
        accumulate(
            next.groups[assignment.group].values_mut(),
            normalized.values(),
            assignment.sign,
        );
        next.norms.insert(name.to_string(), stats);
        Ok(next)
    }

    /// Delete a dimension by subtracting its signed contribution. `s` must be
    /// the same raw series originally added; the stored normalization
    /// statistics are reused so the subtraction inverts the addition.
    pub fn delete_dimension(&self, name: &str, s: &Series) -> Result<SketchedSeries> {
        let Some(assignment) = self.plan.assignment(name) else {
            return Err(Error::UnknownDimension {
                name: name.to_string(),
            });
        };
        if s.len() != self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: s.len(),
            });
        }
        let stats = self.norms[name];
        let normalized = znormalize_with(s, stats)?;
        let mut next = self.clone();
        accumulate(
            next.groups[assignment.group].values_mut(),
            normalized.values(),
            -assignment.sign,
        );
        next.plan.assignments.remove(name);
        next.norms.remove(name);
        Ok(next)
    }

    /// Adjust a single point of one dimension by `delta`, expressed in the
    /// dimension's z-normalized scale.
    pub fn update_point(&self, name: &str, i: usize, delta: f64) -> Result<SketchedSeries> {
        let Some(assignment) = self.plan.assignment(name) else {
            return Err(Error::UnknownDimension {
                name: name.to_string(),
            });
        };
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                limit: self.n,
            });
        }
        let mut next = self.clone();
        next.groups[assignment.group].values_mut()[i] += assignment.sign * delta;
        Ok(next)
    }

    /// Count-sketch point estimate of the z-normalized value of a dimension:
    /// `sign(name) * R^(h(name))_i`, an unbiased estimator over plan seeds.
    pub fn estimate_value(&self, name: &str, i: usize) -> Result<f64> {
        let Some(assignment) = self.plan.assignment(name) else {
            return Err(Error::UnknownDimension {
                name: name.to_string(),
            });
        };
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                limit: self.n,
            });
        }
        Ok(assignment.sign * self.groups[assignment.group].values()[i])
    }

    pub fn to_persist(&self) -> SketchFile {
        SketchFile {
            seed: self.plan.seed,
            k: self.plan.k,
            d: self.plan.d(),
            n: self.n,
            dimensions: self
                .plan
                .assignments()
                .map(|(name, a)| DimRecord {
                    name: name.to_string(),
                    group: a.group,
                    sign: a.sign,
                    mu: self.norms[name].mu,
                    sigma: self.norms[name].sigma,
                })
                .collect(),
            groups: self
                .groups
                .iter()
                .map(|g| g.values().to_vec())
                .collect(),
        }
    }

    pub fn from_persist(file: SketchFile) -> Result<SketchedSeries> {
        if file.groups.len() != file.k {
            return Err(Error::invalid_config("group count does not match k"));
        }
        if file.dimensions.len() != file.d {
            return Err(Error::invalid_config("dimension count does not match d"));
        }
        let mut assignments = BTreeMap::new();
        let mut norms = BTreeMap::new();
        for rec in file.dimensions {
            if rec.group >= file.k {
                return Err(Error::invalid_config(format!(
                    "group {} out of range for k={}",
                    rec.group, file.k
                )));
            }
            if assignments
                .insert(
                    rec.name.clone(),
                    DimAssignment {
                        group: rec.group,
                        sign: rec.sign,
                    },
                )
                .is_some()
            {
                return Err(Error::DuplicateDimension { name: rec.name });
            }
            norms.insert(
                rec.name,
                NormStats {
                    mu: rec.mu,
                    sigma: rec.sigma,
                },
            );
        }
        let mut groups = Vec::with_capacity(file.k);
        for g in file.groups {
            if g.len() != file.n {
                return Err(Error::LengthMismatch {
                    left: file.n,
                    right: g.len(),
                });
            }
            groups.push(Series::new(g)?);
        }
        Ok(SketchedSeries {
            plan: SketchPlan {
                seed: file.seed,
                k: file.k,
                assignments,
            },
            groups,
            norms,
            n: file.n,
        })
    }
}

/// On-disk JSON layout of a sketch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchFile {
    pub seed: u64,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub dimensions: Vec<DimRecord>,
    pub groups: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimRecord {
    pub name: String,
    pub group: usize,
    pub sign: f64,
    pub mu: f64,
    pub sigma: f64,
}
