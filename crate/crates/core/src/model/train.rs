use std::io::Write;

use serde::{Deserialize, Serialize};

use super::optim::{AdamW, AdamWConfig, Schedule};
use super::{backward, Architecture, ModelParams};
use crate::balancing::{BalancingStrategy, ResolvedPlan};
use crate::error::{Error, Result};
use crate::group::{build_partition, GroupPartition, GroupSchema, LabeledDataset};
use crate::linalg::Matrix;
use crate::metrics::{
    average_accuracy, per_class_accuracy, per_group_accuracy, worst_class_from_groups,
    worst_group_accuracy, GroupAccuracies,
};
use crate::rng::{stream, streams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub schedule: Schedule,
    /// Report the test average accuracy weighted by training group proportions.
    #[serde(default)]
    pub weighted_average: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            lr: 1e-3,
            weight_decay: 1e-4,
            schedule: Schedule::Cosine,
            weighted_average: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be >= 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite())
            || !(self.weight_decay >= 0.0 && self.weight_decay.is_finite())
        {
            return Err(Error::Config("lr must be > 0 and weight_decay >= 0".into()));
        }
        Ok(())
    }

    fn optimizer(&self) -> AdamWConfig {
        AdamWConfig {
            lr: self.lr,
            weight_decay: self.weight_decay,
            ..AdamWConfig::default()
        }
    }
}

/// Metrics after one epoch. Test quantities are on the held-out split, training
/// quantities on the run's active training set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub train_group_acc: Vec<Option<f64>>,
    pub test_groups: GroupAccuracies,
    pub test_class_acc: Vec<Option<f64>>,
    pub wga: f64,
    pub worst_group: usize,
    pub worst_class_acc: f64,
    pub avg_acc: f64,
}

impl EpochRecord {
    pub fn group_acc(&self) -> Vec<Option<f64>> {
        self.test_groups.accuracies()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainTrace {
    pub num_groups: usize,
    pub epochs: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }

    pub fn final_wga(&self) -> f64 {
        self.last().map_or(f64::NAN, |r| r.wga)
    }

    /// Highest WGA over epochs and the (first) epoch attaining it.
    pub fn peak_wga(&self) -> (f64, usize) {
        self.epochs
            .iter()
            .fold((f64::NEG_INFINITY, 0), |(best, e), r| {
                if r.wga > best {
                    (r.wga, r.epoch)
                } else {
                    (best, e)
                }
            })
    }

    pub fn train_accuracies(&self) -> Vec<f64> {
        self.epochs.iter().map(|r| r.train_acc).collect()
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("epoch,train_loss,train_acc");
        for g in 0..self.num_groups {
            h.push_str(&format!(",acc_g{g}"));
        }
        h.push_str(",wga,avg_acc");
        h
    }

    /// `epoch,train_loss,train_acc,acc_g0,...,acc_gK,wga,avg_acc`; absent groups
    /// leave their field empty.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for r in &self.epochs {
            let mut line = format!("{},{:?},{:?}", r.epoch, r.train_loss, r.train_acc);
            for a in r.group_acc() {
                line.push(',');
                if let Some(a) = a {
                    line.push_str(&format!("{a:?}"));
                }
            }
            line.push_str(&format!(",{:?},{:?}", r.wga, r.avg_acc));
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// First epoch whose training accuracy is exactly 1.
pub fn interpolation_epoch(train_accuracies: &[f64]) -> Option<usize> {
    train_accuracies
        .iter()
        .position(|&a| a >= 1.0)
        .map(|i| i + 1)
}

/// Arg-max class per row; ties go to the smaller class id.
pub fn predict(params: &ModelParams, x: &Matrix) -> Result<Vec<usize>> {
    (0..x.rows())
        .map(|i| predict_one(params, x.row(i)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub trace: TrainTrace,
    pub plan: ResolvedPlan,
}

/// Trains from a seeded initialization under `strategy`, evaluating on `test` after
/// every epoch. There is no early stopping.
///
/// Epochs are `⌈|active| / batch_size⌉` mini-batches drawn with replacement from the
/// strategy's sampling plan. Initialization, subsetting and batch order use
/// independent random streams derived from `seed`.
pub fn train(
    train_set: &LabeledDataset,
    test_set: &LabeledDataset,
    schema: GroupSchema,
    strategy: BalancingStrategy,
    architecture: Architecture,
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.dim() != test_set.dim() {
        return Err(Error::Shape(format!(
            "train dim {} differs from test dim {}",
            train_set.dim(),
            test_set.dim()
        )));
    }
    if let Architecture::OneHidden { width: 0 } = architecture {
        return Err(Error::Config("hidden width must be >= 1".into()));
    }
    let train_partition = build_partition(train_set, schema)?;
    let test_partition = build_partition(test_set, schema)?;

    let plan = strategy.resolve(&train_partition, &mut stream(seed, streams::SUBSET))?;
    let mut params = ModelParams::init(
        architecture,
        train_set.dim(),
        schema.num_classes,
        &mut stream(seed, streams::INIT),
    );
    let mut optimizer = AdamW::new(config.optimizer(), &params);
    let mut batch_rng = stream(seed, streams::BATCHES);
    let sampler = plan.sampling.sampler();
    let steps_per_epoch = plan.sampling.len().div_ceil(config.batch_size);

    let average_weights: Option<Vec<f64>> = config.weighted_average.then(|| {
        let m = train_set.len() as f64;
        train_partition
            .group_sizes()
            .iter()
            .map(|&n| n as f64 / m)
            .collect()
    });

    let x = train_set.features();
    let labels = train_set.class_labels();
    let mut records = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let lr_factor = config.schedule.factor(epoch - 1, config.epochs);
        let mut loss_sum = 0.0;
        for _ in 0..steps_per_epoch {
            let batch = sampler.draw(config.batch_size, &mut batch_rng);
            let xs: Vec<&[f64]> = batch.iter().map(|&i| x.row(i)).collect();
            let ys: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
            let ws: Vec<f64> = batch.iter().map(|&i| plan.weights.weight(i)).collect();
            let (loss, grads) = backward(&params, &xs, &ys, &ws)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            loss_sum += loss;
            optimizer.step(&mut params, &grads, lr_factor);
        }
        let train_loss = loss_sum / steps_per_epoch as f64;
        if !params.is_finite() {
            return Err(Error::Divergence {
                epoch,
                loss: train_loss,
            });
        }
        records.push(evaluate_epoch(
            epoch,
            train_loss,
            &params,
            train_set,
            &train_partition,
            plan.sampling.active(),
            test_set,
            &test_partition,
            average_weights.as_deref(),
        )?);
    }

    Ok(TrainOutcome {
        params,
        trace: TrainTrace {
            num_groups: schema.num_groups(),
            epochs: records,
        },
        plan,
    })
}

#[allow(clippy::too_many_arguments)]
fn evaluate_epoch(
    epoch: usize,
    train_loss: f64,
    params: &ModelParams,
    train_set: &LabeledDataset,
    train_partition: &GroupPartition,
    active: &[usize],
    test_set: &LabeledDataset,
    test_partition: &GroupPartition,
    average_weights: Option<&[f64]>,
) -> Result<EpochRecord> {
    let k = train_partition.schema().num_groups();
    let mut correct = vec![0; k];
    let mut total = vec![0; k];
    let labels = train_set.class_labels();
    for &i in active {
        let g = train_partition.group_of(i);
        total[g] += 1;
        let pred = predict_one(params, train_set.features().row(i))?;
        if pred == labels[i] {
            correct[g] += 1;
        }
    }
    let train_groups = GroupAccuracies::new(correct, total)?;
    let train_acc = average_accuracy(&train_groups, None)?;

    let predictions = predict(params, test_set.features())?;
    let test_groups = per_group_accuracy(&predictions, test_set.class_labels(), test_partition)?;
    let (wga, worst_group) = worst_group_accuracy(&test_groups)?;
    let (worst_class_acc, _) = worst_class_from_groups(&test_groups, test_partition)?;
    let avg_acc = average_accuracy(&test_groups, average_weights)?;
    Ok(EpochRecord {
        epoch,
        train_loss,
        train_acc,
        train_group_acc: train_groups.accuracies(),
        test_class_acc: per_class_accuracy(&test_groups, test_partition),
        test_groups,
        wga,
        worst_group,
        worst_class_acc,
        avg_acc,
    })
}

fn predict_one(params: &ModelParams, x: &[f64]) -> Result<usize> {
    let logits = params.forward(x)?.logits;
    Ok(logits
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (k, &v)| {
            if v > bv {
                (k, v)
            } else {
                (bi, bv)
            }
        })
        .0)
}
