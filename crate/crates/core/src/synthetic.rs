//! Gaussian mean-shift generator for spurious-correlation datasets.
//!
//! Each example draws its group `(y, s)` from `group_proportions`, then a feature vector
//! `[core | spurious]` where the core block is centred on the class direction scaled by
//! `mu_core` and the spurious block on the attribute direction scaled by `mu_spur`, both
//! with isotropic noise `sigma`. With two labels the direction is `±1` (label 0 maps to
//! −1); with more labels it is the one-hot axis of the label.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupSchema, LabeledDataset};
use crate::linalg::Matrix;

/// Proportions must sum to one within this tolerance; preset values are copied from a
/// table rounded to three decimals and may sum to 1.001. Sampling renormalizes.
pub const PROPORTION_TOLERANCE: f64 = 5e-3;

pub const PRESET_NAMES: [&str; 4] = [
    "waterbirds-like",
    "celeba-like",
    "civilcomments-like",
    "multinli-like",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub group_proportions: Vec<f64>,
    pub d_core: usize,
    pub d_spur: usize,
    pub mu_core: f64,
    pub mu_spur: f64,
    pub sigma: f64,
    pub m: usize,
    pub schema: GroupSchema,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let groups = self.schema.num_groups();
        if groups == 0 {
            return Err(Error::InvalidSpec("schema has no groups".into()));
        }
        if self.group_proportions.len() != groups {
            return Err(Error::InvalidSpec(format!(
                "{} proportions for {} groups",
                self.group_proportions.len(),
                groups
            )));
        }
        if self
            .group_proportions
            .iter()
            .any(|p| !p.is_finite() || *p < 0.0)
        {
            return Err(Error::InvalidSpec(
                "proportions must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = self.group_proportions.iter().sum();
        if (total - 1.0).abs() > PROPORTION_TOLERANCE {
            return Err(Error::InvalidSpec(format!("proportions sum to {total}")));
        }
        if self.d_core == 0 || self.d_spur == 0 {
            return Err(Error::InvalidSpec("d_core and d_spur must be >= 1".into()));
        }
        if self.schema.num_classes > 2 && self.d_core < self.schema.num_classes {
            return Err(Error::InvalidSpec(
                "one-hot class means need d_core >= |Y|".into(),
            ));
        }
        if self.schema.num_spurious > 2 && self.d_spur < self.schema.num_spurious {
            return Err(Error::InvalidSpec(
                "one-hot spurious means need d_spur >= |S|".into(),
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if !self.mu_core.is_finite() || !self.mu_spur.is_finite() {
            return Err(Error::InvalidSpec("means must be finite".into()));
        }
        if self.m < groups {
            return Err(Error::InvalidSpec(format!(
                "m = {} is below the group count {groups}",
                self.m
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d_core + self.d_spur
    }

    /// Proportions rescaled to sum to exactly one.
    pub fn normalized_proportions(&self) -> Vec<f64> {
        let total: f64 = self.group_proportions.iter().sum();
        self.group_proportions.iter().map(|p| p / total).collect()
    }

    /// Class probabilities implied by the group proportions.
    pub fn class_proportions(&self) -> Vec<f64> {
        let p = self.normalized_proportions();
        (0..self.schema.num_classes)
            .map(|y| self.schema.groups_of_class(y).map(|g| p[g]).sum())
            .collect()
    }

    /// Largest over smallest expected class share.
    pub fn expected_class_ratio(&self) -> f64 {
        let c = self.class_proportions();
        let max = c.iter().copied().fold(f64::MIN, f64::max);
        let min = c.iter().copied().fold(f64::MAX, f64::min);
        max / min
    }

    /// Copy with a different example count.
    pub fn with_size(&self, m: usize) -> Self {
        Self { m, ..self.clone() }
    }
}

fn mean_block(label: usize, num_labels: usize, dim: usize, mu: f64) -> Vec<f64> {
    if num_labels <= 2 {
        let sign = if label == 0 { -1.0 } else { 1.0 };
        vec![sign * mu; dim]
    } else {
        let mut v = vec![0.0; dim];
        v[label] = mu;
        v
    }
}

pub fn generate<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<LabeledDataset> {
    spec.validate()?;
    let schema = spec.schema;
    let groups = WeightedIndex::new(spec.normalized_proportions())
        .map_err(|e| Error::InvalidSpec(format!("proportions: {e}")))?;

    let core_means: Vec<Vec<f64>> = (0..schema.num_classes)
        .map(|y| mean_block(y, schema.num_classes, spec.d_core, spec.mu_core))
        .collect();
    let spur_means: Vec<Vec<f64>> = (0..schema.num_spurious)
        .map(|s| mean_block(s, schema.num_spurious, spec.d_spur, spec.mu_spur))
        .collect();

    let n = spec.dim();
    let mut data = Vec::with_capacity(spec.m * n);
    let mut ys = Vec::with_capacity(spec.m);
    let mut ss = Vec::with_capacity(spec.m);
    for _ in 0..spec.m {
        let g = groups.sample(rng);
        let (y, s) = (schema.class_of(g), schema.spurious_of(g));
        for mean in core_means[y].iter().chain(&spur_means[s]) {
            let z: f64 = rng.sample(StandardNormal);
            data.push(mean + spec.sigma * z);
        }
        ys.push(y);
        ss.push(s);
    }
    LabeledDataset::new(Matrix::from_vec(spec.m, n, data), ys, ss)
}

/// Group proportions mirroring four standard group-robustness benchmarks, with
/// `d_core = d_spur = 5`, `mu_core = 1`, `mu_spur = 2`, `sigma = 1`, `m = 10000`.
pub fn preset(name: &str) -> Result<SyntheticSpec> {
    let (proportions, schema): (&[f64], GroupSchema) = match name {
        "waterbirds-like" => (&[0.730, 0.038, 0.012, 0.220], GroupSchema::new(2, 2)),
        "celeba-like" => (&[0.440, 0.411, 0.141, 0.009], GroupSchema::new(2, 2)),
        "civilcomments-like" => (&[0.551, 0.336, 0.047, 0.066], GroupSchema::new(2, 2)),
        "multinli-like" => (
            &[0.279, 0.054, 0.327, 0.007, 0.323, 0.010],
            GroupSchema::new(3, 2),
        ),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(SyntheticSpec {
        group_proportions: proportions.to_vec(),
        d_core: 5,
        d_spur: 5,
        mu_core: 1.0,
        mu_spur: 2.0,
        sigma: 1.0,
        m: 10_000,
        schema,
    })
}
