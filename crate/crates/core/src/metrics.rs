//! Accuracy quantities: per-group, worst-group, worst-class, (weighted) average and
//! intra-class group disparity. Empty groups are absent, never counted as 0.0, and
//! every tie breaks toward the smaller id.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{intra_class_min_maj, GroupPartition};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupAccuracies {
    pub correct: Vec<usize>,
    pub total: Vec<usize>,
}

impl GroupAccuracies {
    pub fn new(correct: Vec<usize>, total: Vec<usize>) -> Result<Self> {
        if correct.len() != total.len() {
            return Err(Error::Shape("correct and total lengths differ".into()));
        }
        if correct.iter().zip(&total).any(|(c, t)| c > t) {
            return Err(Error::Shape("correct count exceeds total".into()));
        }
        Ok(Self { correct, total })
    }

    /// Convenience constructor from accuracies, treating each group as having
    /// `denominator` examples.
    pub fn from_rates(rates: &[f64], denominator: usize) -> Self {
        let correct = rates
            .iter()
            .map(|r| (r * denominator as f64).round() as usize)
            .collect();
        Self {
            correct,
            total: vec![denominator; rates.len()],
        }
    }

    pub fn num_groups(&self) -> usize {
        self.total.len()
    }

    /// `None` for groups with no evaluation examples.
    pub fn accuracy(&self, g: usize) -> Option<f64> {
        (self.total[g] > 0).then(|| self.correct[g] as f64 / self.total[g] as f64)
    }

    pub fn accuracies(&self) -> Vec<Option<f64>> {
        (0..self.num_groups()).map(|g| self.accuracy(g)).collect()
    }

    pub fn present(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.num_groups()).filter_map(|g| self.accuracy(g).map(|a| (g, a)))
    }
}

pub fn per_group_accuracy(
    predictions: &[usize],
    labels: &[usize],
    partition: &GroupPartition,
) -> Result<GroupAccuracies> {
    let m = partition.num_examples();
    if predictions.len() != m || labels.len() != m {
        return Err(Error::Shape(format!(
            "{} predictions and {} labels for {m} examples",
            predictions.len(),
            labels.len()
        )));
    }
    let k = partition.schema().num_groups();
    let mut correct = vec![0; k];
    let mut total = vec![0; k];
    for i in 0..m {
        let g = partition.group_of(i);
        total[g] += 1;
        if predictions[i] == labels[i] {
            correct[g] += 1;
        }
    }
    GroupAccuracies::new(correct, total)
}

/// Minimum accuracy over nonempty groups, with the group attaining it.
pub fn worst_group_accuracy(acc: &GroupAccuracies) -> Result<(f64, usize)> {
    argmin(acc.present())
}

fn argmin(values: impl Iterator<Item = (usize, f64)>) -> Result<(f64, usize)> {
    values
        .fold(None, |best: Option<(f64, usize)>, (g, a)| match best {
            Some((b, _)) if b <= a => best,
            _ => Some((a, g)),
        })
        .ok_or(Error::NoGroups)
}

/// Per-class accuracy pooling all groups of the class; `None` for empty classes.
pub fn per_class_accuracy(acc: &GroupAccuracies, partition: &GroupPartition) -> Vec<Option<f64>> {
    let schema = partition.schema();
    (0..schema.num_classes)
        .map(|y| {
            let (c, t) = schema
                .groups_of_class(y)
                .fold((0, 0), |(c, t), g| (c + acc.correct[g], t + acc.total[g]));
            (t > 0).then(|| c as f64 / t as f64)
        })
        .collect()
}

pub fn worst_class_accuracy(
    predictions: &[usize],
    labels: &[usize],
    partition: &GroupPartition,
) -> Result<(f64, usize)> {
    let acc = per_group_accuracy(predictions, labels, partition)?;
    worst_class_from_groups(&acc, partition)
}

pub fn worst_class_from_groups(
    acc: &GroupAccuracies,
    partition: &GroupPartition,
) -> Result<(f64, usize)> {
    argmin(
        per_class_accuracy(acc, partition)
            .into_iter()
            .enumerate()
            .filter_map(|(y, a)| a.map(|a| (y, a))),
    )
}

/// Unweighted: pooled correct / total. Weighted: `Σ_g w_g acc_g` with the weights
/// renormalized over nonempty groups.
pub fn average_accuracy(acc: &GroupAccuracies, weights: Option<&[f64]>) -> Result<f64> {
    match weights {
        None => {
            let t: usize = acc.total.iter().sum();
            if t == 0 {
                return Err(Error::NoGroups);
            }
            Ok(acc.correct.iter().sum::<usize>() as f64 / t as f64)
        }
        Some(w) => {
            if w.len() != acc.num_groups() {
                return Err(Error::Shape(format!(
                    "{} weights for {} groups",
                    w.len(),
                    acc.num_groups()
                )));
            }
            if let Some(bad) = w.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::Config(format!(
                    "negative or non-finite group weight {bad}"
                )));
            }
            let (num, den) = acc
                .present()
                .fold((0.0, 0.0), |(n, d), (g, a)| (n + w[g] * a, d + w[g]));
            if den <= 0.0 {
                return Err(Error::NoGroups);
            }
            Ok(num / den)
        }
    }
}

/// `Acc(g_maj(y)) − Acc(g_min(y))`; negative when the minority group does better.
pub fn intra_class_disparity(
    acc: &GroupAccuracies,
    partition: &GroupPartition,
    y: usize,
) -> Result<f64> {
    let mm = intra_class_min_maj(partition, y)?;
    let maj = acc.accuracy(mm.maj).ok_or(Error::EmptyGroup(mm.maj))?;
    let min = acc.accuracy(mm.min).ok_or(Error::EmptyGroup(mm.min))?;
    Ok(maj - min)
}
