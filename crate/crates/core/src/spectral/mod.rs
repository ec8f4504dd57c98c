//! Group and class covariance spectra of penultimate features, the intra-class
//! spectral norm ratio `ρ(y) = λ₁(g_min(y)) / λ₁(g_maj(y))`, and its correspondence
//! with intra-class accuracy disparity.

mod eigen;

pub use eigen::{eigendecompose_symmetric, SymmetricEigen};

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    build_partition, intra_class_min_maj, GroupPartition, GroupSchema, LabeledDataset,
};
use crate::linalg::Matrix;
use crate::metrics::{intra_class_disparity, GroupAccuracies};

/// Eigenvalues below `-NEGATIVE_FLOOR · max(1, λ₁)` mean the solver failed; anything
/// between that and zero is rounding noise and reported as 0.
pub const NEGATIVE_FLOOR: f64 = 1e-10;

/// Penultimate features with their labels and group partition.
#[derive(Debug, Clone)]
pub struct FeatureBank {
    data: LabeledDataset,
    partition: GroupPartition,
}

impl FeatureBank {
    pub fn new(data: LabeledDataset, schema: GroupSchema) -> Result<Self> {
        let partition = build_partition(&data, schema)?;
        Ok(Self { data, partition })
    }

    /// Loads a `class,spurious,z_0,...` CSV; the schema is inferred from the labels.
    pub fn from_csv(
        path: impl AsRef<std::path::Path>,
        schema: Option<GroupSchema>,
    ) -> Result<Self> {
        let data = LabeledDataset::read_csv(path)?;
        let schema = schema.unwrap_or_else(|| data.infer_schema());
        Self::new(data, schema)
    }

    pub fn features(&self) -> &Matrix {
        self.data.features()
    }

    pub fn dataset(&self) -> &LabeledDataset {
        &self.data
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }
}

/// `(1/n) Σ (z_i − z̄)(z_i − z̄)ᵀ` over the rows in `indices`.
pub fn covariance_of(features: &Matrix, indices: &[usize]) -> Result<Matrix> {
    if indices.is_empty() {
        return Err(Error::Shape("covariance of an empty index set".into()));
    }
    let d = features.cols();
    let n = indices.len() as f64;
    let mut mean = vec![0.0; d];
    for &i in indices {
        for (m, v) in mean.iter_mut().zip(features.row(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut cov = Matrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for &i in indices {
        for ((c, v), m) in centered.iter_mut().zip(features.row(i)).zip(&mean) {
            *c = v - m;
        }
        for a in 0..d {
            let ca = centered[a];
            if ca == 0.0 {
                continue;
            }
            let row = cov.row_mut(a);
            for b in a..d {
                row[b] += ca * centered[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / n;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    Ok(cov)
}

pub fn group_covariance(bank: &FeatureBank, g: usize) -> Result<Matrix> {
    let idx = bank.partition.group(g);
    if idx.is_empty() {
        return Err(Error::EmptyGroup(g));
    }
    covariance_of(bank.features(), idx)
}

pub fn class_covariance(bank: &FeatureBank, y: usize) -> Result<Matrix> {
    let idx = bank.partition.class(y);
    if idx.is_empty() {
        return Err(Error::EmptyClass(y));
    }
    covariance_of(bank.features(), idx)
}

/// Descending, clamped eigenvalues of a covariance matrix.
pub fn covariance_spectrum(cov: &Matrix) -> Result<Vec<f64>> {
    let eig = eigendecompose_symmetric(cov)?;
    let top = eig.values.first().copied().unwrap_or(0.0);
    let floor = -NEGATIVE_FLOOR * top.abs().max(1.0);
    eig.values
        .into_iter()
        .map(|v| {
            if v < floor {
                Err(Error::Solver(format!(
                    "covariance eigenvalue {v:e} below numerical floor"
                )))
            } else {
                Ok(v.max(0.0))
            }
        })
        .collect()
}

/// Full spectra of every group and class; `None` for empty ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectra {
    pub groups: Vec<Option<Vec<f64>>>,
    pub classes: Vec<Option<Vec<f64>>>,
}

impl Spectra {
    pub fn compute(bank: &FeatureBank) -> Result<Self> {
        let schema = bank.partition.schema();
        let groups = (0..schema.num_groups())
            .into_par_iter()
            .map(|g| {
                if bank.partition.group(g).is_empty() {
                    Ok(None)
                } else {
                    covariance_spectrum(&group_covariance(bank, g)?).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let classes = (0..schema.num_classes)
            .into_par_iter()
            .map(|y| {
                if bank.partition.class(y).is_empty() {
                    Ok(None)
                } else {
                    covariance_spectrum(&class_covariance(bank, y)?).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { groups, classes })
    }

    pub fn top_k(&self, k: usize) -> TopK {
        let cut = |v: &Option<Vec<f64>>| v.as_ref().map(|s| s.iter().copied().take(k).collect());
        TopK {
            groups: self.groups.iter().map(cut).collect(),
            classes: self.classes.iter().map(cut).collect(),
        }
    }

    /// Spectral norm `λ₁` of group `g`, if the group is nonempty.
    pub fn group_norm(&self, g: usize) -> Option<f64> {
        self.groups[g].as_ref().and_then(|s| s.first().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopK {
    pub groups: Vec<Option<Vec<f64>>>,
    pub classes: Vec<Option<Vec<f64>>>,
}

/// Top `min(k, d)` eigenvalues of each group and class covariance.
pub fn top_k_spectrum(bank: &FeatureBank, k: usize) -> Result<TopK> {
    if k == 0 {
        return Err(Error::Config("k must be >= 1".into()));
    }
    Ok(Spectra::compute(bank)?.top_k(k))
}

/// `ρ(y)` per class from precomputed spectra; `None` when either group has fewer
/// than two examples or the majority group's spectral norm is zero.
pub fn rho_from_spectra(spectra: &Spectra, partition: &GroupPartition) -> Vec<Option<f64>> {
    (0..partition.schema().num_classes)
        .map(|y| {
            let mm = intra_class_min_maj(partition, y).ok()?;
            if partition.group(mm.min).len() < 2 || partition.group(mm.maj).len() < 2 {
                return None;
            }
            let num = spectra.group_norm(mm.min)?;
            let den = spectra.group_norm(mm.maj)?;
            (den > 0.0).then(|| num / den)
        })
        .collect()
}

pub fn intra_class_rho(bank: &FeatureBank) -> Result<Vec<Option<f64>>> {
    Ok(rho_from_spectra(&Spectra::compute(bank)?, &bank.partition))
}

/// Class with the largest `ρ` paired with the class with the largest accuracy disparity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pub rho_class: usize,
    pub disparity_class: usize,
    pub matched: bool,
}

impl fmt::Display for Correspondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.rho_class, self.disparity_class)
    }
}

fn argmax(values: &[Option<f64>], usable: &[bool]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(y, _)| usable[*y])
        .filter_map(|(y, v)| v.map(|v| (y, v)))
        .fold(None, |best: Option<(usize, f64)>, (y, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((y, v)),
        })
        .map(|(y, _)| y)
}

/// Argmaxes are taken over classes where both quantities are defined; ties go to the
/// smaller class id.
pub fn correspondence_report(
    rho: &[Option<f64>],
    disparity: &[Option<f64>],
) -> Option<Correspondence> {
    let usable: Vec<bool> = rho
        .iter()
        .zip(disparity)
        .map(|(r, d)| r.is_some() && d.is_some())
        .collect();
    let rho_class = argmax(rho, &usable)?;
    let disparity_class = argmax(disparity, &usable)?;
    Some(Correspondence {
        rho_class,
        disparity_class,
        matched: rho_class == disparity_class,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub group: usize,
    pub class: usize,
    pub spurious: usize,
    pub size: usize,
    pub minority: bool,
    pub top_k: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub class: usize,
    pub size: usize,
    pub top_k: Option<Vec<f64>>,
}

/// Spectral analysis of one feature bank (one seed or one imported file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTrial {
    pub label: String,
    pub groups: Vec<GroupEntry>,
    pub classes: Vec<ClassEntry>,
    pub rho: Vec<Option<f64>>,
    pub argmax_rho_class: Option<usize>,
    pub disparity: Option<Vec<Option<f64>>>,
    pub correspondence: Option<String>,
    pub matched: Option<bool>,
}

impl SpectralTrial {
    /// `accuracies`, when given, are the group test accuracies of the model that
    /// produced the features and enable the disparity correspondence.
    pub fn analyze(
        label: impl Into<String>,
        bank: &FeatureBank,
        k: usize,
        accuracies: Option<&GroupAccuracies>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        let partition = bank.partition();
        let schema = partition.schema();
        let spectra = Spectra::compute(bank)?;
        let top = spectra.top_k(k);
        let rho = rho_from_spectra(&spectra, partition);
        let all = vec![true; rho.len()];
        let argmax_rho_class = argmax(&rho, &all);

        let groups = (0..schema.num_groups())
            .map(|g| GroupEntry {
                group: g,
                class: schema.class_of(g),
                spurious: schema.spurious_of(g),
                size: partition.group(g).len(),
                minority: partition.is_minority(g),
                top_k: top.groups[g].clone(),
            })
            .collect();
        let classes = (0..schema.num_classes)
            .map(|y| ClassEntry {
                class: y,
                size: partition.class(y).len(),
                top_k: top.classes[y].clone(),
            })
            .collect();

        let disparity = accuracies.map(|acc| {
            (0..schema.num_classes)
                .map(|y| intra_class_disparity(acc, partition, y).ok())
                .collect::<Vec<_>>()
        });
        let corr = disparity
            .as_ref()
            .and_then(|d| correspondence_report(&rho, d));
        Ok(Self {
            label: label.into(),
            groups,
            classes,
            rho,
            argmax_rho_class,
            disparity,
            correspondence: corr.map(|c| c.to_string()),
            matched: corr.map(|c| c.matched),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoSummary {
    pub class: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub k: usize,
    pub trials: Vec<SpectralTrial>,
    /// Trial mean of each group's top-k eigenvalues.
    pub mean_group_top_k: Vec<Option<Vec<f64>>>,
    pub rho_summary: Vec<RhoSummary>,
    /// One `(argmax-ρ class, argmax-disparity class)` tuple per trial that has accuracies.
    pub correspondences: Vec<String>,
}

impl SpectralReport {
    pub fn from_trials(k: usize, trials: Vec<SpectralTrial>) -> Self {
        let num_groups = trials.first().map_or(0, |t| t.groups.len());
        let num_classes = trials.first().map_or(0, |t| t.rho.len());
        let mean_group_top_k = (0..num_groups)
            .map(|g| {
                let lists: Vec<&Vec<f64>> = trials
                    .iter()
                    .filter_map(|t| t.groups[g].top_k.as_ref())
                    .collect();
                let len = lists.iter().map(|l| l.len()).min()?;
                Some(
                    (0..len)
                        .map(|i| lists.iter().map(|l| l[i]).sum::<f64>() / lists.len() as f64)
                        .collect(),
                )
            })
            .collect();
        let rho_summary = (0..num_classes)
            .map(|y| {
                let vals: Vec<f64> = trials.iter().filter_map(|t| t.rho[y]).collect();
                let (mean, std) = mean_std(&vals).map_or((None, None), |(m, s)| (Some(m), Some(s)));
                RhoSummary {
                    class: y,
                    mean,
                    std,
                    trials: vals.len(),
                }
            })
            .collect();
        let correspondences = trials
            .iter()
            .filter_map(|t| t.correspondence.clone())
            .collect();
        Self {
            k,
            trials,
            mean_group_top_k,
            rho_summary,
            correspondences,
        }
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}
