//! Class-balancing strategies expressed as sampling plans and loss-weight plans.
//!
//! * subsetting drops examples from larger classes once, before training;
//! * upsampling keeps everything but draws `y ~ Unif(Y)` then `x ~ p̂(· | y)`;
//! * upweighting keeps uniform sampling and scales each class's loss by
//!   `max_y' |Ω_y'| / |Ω_y|`;
//! * mixture subsets down to an intermediate class-imbalance ratio and then upsamples.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{class_imbalance_ratio, GroupPartition};

/// Slack accepted above the realized class-imbalance ratio, so that ratios quoted
/// to two decimals (e.g. 3.31 for 3682/1113 = 3.308) still select the full dataset.
pub const RATIO_SLACK: f64 = 5e-3;

/// Per-example draw probabilities over an active index set.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    active: Vec<usize>,
    probabilities: Vec<f64>,
}

impl SamplingPlan {
    /// Uniform plan over `active`.
    pub fn uniform(active: Vec<usize>) -> Self {
        let p = 1.0 / active.len() as f64;
        let probabilities = vec![p; active.len()];
        Self {
            active,
            probabilities,
        }
    }

    pub fn new(active: Vec<usize>, probabilities: Vec<f64>) -> Result<Self> {
        if active.len() != probabilities.len() || active.is_empty() {
            return Err(Error::Shape(format!(
                "{} active indices with {} probabilities",
                active.len(),
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::NonFinite(
                "sampling probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Shape(format!(
                "sampling probabilities sum to {total}"
            )));
        }
        Ok(Self {
            active,
            probabilities,
        })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Probability of drawing dataset index `i` (0 when inactive).
    pub fn probability_of(&self, i: usize) -> f64 {
        self.active
            .binary_search(&i)
            .map_or(0.0, |pos| self.probabilities[pos])
    }

    /// Reusable sampler; build once per run and call [`MinibatchSampler::draw`].
    pub fn sampler(&self) -> MinibatchSampler<'_> {
        MinibatchSampler {
            plan: self,
            dist: WeightedIndex::new(&self.probabilities).expect("plan probabilities validated"),
        }
    }
}

pub struct MinibatchSampler<'a> {
    plan: &'a SamplingPlan,
    dist: WeightedIndex<f64>,
}

impl MinibatchSampler<'_> {
    pub fn draw<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Vec<usize> {
        (0..batch_size)
            .map(|_| self.plan.active[self.dist.sample(rng)])
            .collect()
    }
}

/// I.i.d. draws with replacement according to the plan.
pub fn draw_minibatch<R: Rng + ?Sized>(
    plan: &SamplingPlan,
    batch_size: usize,
    rng: &mut R,
) -> Vec<usize> {
    plan.sampler().draw(batch_size, rng)
}

/// Per-example loss multipliers over the whole dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPlan {
    weights: Vec<f64>,
}

impl WeightPlan {
    pub fn unit(m: usize) -> Self {
        Self {
            weights: vec![1.0; m],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Which class-balancing procedure a training run uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BalancingStrategy {
    None,
    Subsetting,
    Upsampling,
    Upweighting,
    /// Subset to the given class-imbalance ratio, then upsample.
    Mixture(f64),
}

impl BalancingStrategy {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Subsetting => "subsetting",
            Self::Upsampling => "upsampling",
            Self::Upweighting => "upweighting",
            Self::Mixture(_) => "mixture",
        }
    }

    /// Builds a strategy from the config pair `strategy = ...`, `mixture_ratio = ...`.
    pub fn from_parts(kind: &str, mixture_ratio: Option<f64>) -> Result<Self> {
        let s = match kind {
            "none" => Self::None,
            "subsetting" => Self::Subsetting,
            "upsampling" => Self::Upsampling,
            "upweighting" => Self::Upweighting,
            "mixture" => Self::Mixture(mixture_ratio.ok_or_else(|| {
                Error::Config("strategy `mixture` requires `mixture_ratio`".into())
            })?),
            other => return Err(Error::Config(format!("unknown strategy `{other}`"))),
        };
        if let Self::Mixture(r) = s {
            if !(r.is_finite() && r >= 1.0) {
                return Err(Error::Config(format!(
                    "mixture_ratio must be >= 1, got {r}"
                )));
            }
        }
        Ok(s)
    }

    /// Active set, sampling probabilities and loss weights for one run.
    ///
    /// `rng` is consumed only by subsetting and mixture.
    pub fn resolve<R: Rng + ?Sized>(
        &self,
        partition: &GroupPartition,
        rng: &mut R,
    ) -> Result<ResolvedPlan> {
        let m = partition.num_examples();
        let all: Vec<usize> = (0..m).collect();
        let (sampling, weights) = match *self {
            Self::None => (SamplingPlan::uniform(all), WeightPlan::unit(m)),
            Self::Subsetting => (
                SamplingPlan::uniform(subset_balanced(partition, rng)?),
                WeightPlan::unit(m),
            ),
            Self::Upsampling => (upsampling_plan(partition, &all)?, WeightPlan::unit(m)),
            Self::Upweighting => (SamplingPlan::uniform(all), upweighting_plan(partition)?),
            Self::Mixture(r) => (mixture_plan(partition, r, rng)?, WeightPlan::unit(m)),
        };
        Ok(ResolvedPlan { sampling, weights })
    }
}

impl fmt::Display for BalancingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Mixture(r) => f.pad(&format!("mixture-{r}")),
            other => f.pad(other.kind()),
        }
    }
}

impl FromStr for BalancingStrategy {
    type Err = Error;

    /// Accepts the plain kinds plus `mixture-<ratio>` / `mixture:<ratio>`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(r) = s
            .strip_prefix("mixture-")
            .or_else(|| s.strip_prefix("mixture:"))
        {
            let r: f64 = r
                .parse()
                .map_err(|_| Error::Config(format!("bad mixture ratio in `{s}`")))?;
            return Self::from_parts("mixture", Some(r));
        }
        Self::from_parts(s, None)
    }
}

impl Serialize for BalancingStrategy {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BalancingStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedPlan {
    pub sampling: SamplingPlan,
    pub weights: WeightPlan,
}

fn draw_without_replacement<R: Rng + ?Sized>(
    pool: &[usize],
    amount: usize,
    rng: &mut R,
) -> Vec<usize> {
    rand::seq::index::sample(rng, pool.len(), amount)
        .into_iter()
        .map(|k| pool[k])
        .collect()
}

fn check_classes(partition: &GroupPartition) -> Result<Vec<usize>> {
    let sizes = partition.class_sizes();
    if let Some(y) = sizes.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(y));
    }
    Ok(sizes)
}

fn retain<R: Rng + ?Sized>(
    partition: &GroupPartition,
    targets: &[usize],
    rng: &mut R,
) -> Vec<usize> {
    let mut keep = Vec::with_capacity(targets.iter().sum());
    for (y, &t) in targets.iter().enumerate() {
        let pool = partition.class(y);
        if t >= pool.len() {
            keep.extend_from_slice(pool);
        } else {
            keep.extend(draw_without_replacement(pool, t, rng));
        }
    }
    keep.sort_unstable();
    keep
}

/// Every class cut to the size of the smallest class, uniformly at random.
pub fn subset_balanced<R: Rng + ?Sized>(
    partition: &GroupPartition,
    rng: &mut R,
) -> Result<Vec<usize>> {
    subset_to_ratio(partition, 1.0, rng)
}

/// Per-class retained sizes when capping at `ratio` times the smallest class (at least 1).
pub fn ratio_targets(class_sizes: &[usize], ratio: f64) -> Vec<usize> {
    let min = class_sizes.iter().copied().min().unwrap_or(0);
    let cap = ((ratio * min as f64).round() as usize).max(1);
    class_sizes.iter().map(|&n| n.min(cap)).collect()
}

/// Removes data from larger classes uniformly at random until no class exceeds
/// `ratio` times the smallest class (rounded to the nearest example).
pub fn subset_to_ratio<R: Rng + ?Sized>(
    partition: &GroupPartition,
    ratio: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let sizes = check_classes(partition)?;
    let current = class_imbalance_ratio(partition)?;
    if !ratio.is_finite() || ratio < 1.0 || ratio > current + RATIO_SLACK {
        return Err(Error::InvalidRatio {
            ratio,
            max: current,
        });
    }
    Ok(retain(partition, &ratio_targets(&sizes, ratio), rng))
}

/// Probability `1 / (|Y| · |active ∩ Ω_y|)` for each active example of class `y`.
pub fn upsampling_plan(partition: &GroupPartition, active: &[usize]) -> Result<SamplingPlan> {
    let num_classes = partition.schema().num_classes;
    let mut active: Vec<usize> = active.to_vec();
    active.sort_unstable();
    active.dedup();
    let mut counts = vec![0usize; num_classes];
    for &i in &active {
        counts[partition.class_of_example(i)] += 1;
    }
    if let Some(y) = counts.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(y));
    }
    let probabilities = active
        .iter()
        .map(|&i| 1.0 / (num_classes * counts[partition.class_of_example(i)]) as f64)
        .collect();
    SamplingPlan::new(active, probabilities)
}

/// Loss weight `max_y' |Ω_y'| / |Ω_y|`; the largest class gets exactly 1.
pub fn upweighting_plan(partition: &GroupPartition) -> Result<WeightPlan> {
    let sizes = check_classes(partition)?;
    let max = *sizes.iter().max().ok_or(Error::EmptyClass(0))? as f64;
    let weights = (0..partition.num_examples())
        .map(|i| max / sizes[partition.class_of_example(i)] as f64)
        .collect();
    Ok(WeightPlan { weights })
}

/// `subset_to_ratio(ratio)` followed by `upsampling_plan` on the retained set.
pub fn mixture_plan<R: Rng + ?Sized>(
    partition: &GroupPartition,
    ratio: f64,
    rng: &mut R,
) -> Result<SamplingPlan> {
    let active = subset_to_ratio(partition, ratio, rng)?;
    upsampling_plan(partition, &active)
}
