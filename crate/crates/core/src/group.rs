//! Datasets, the class × spurious-attribute group structure, and index partitions.
//!
//! A group is a pair `(y, s)` of class and spurious attribute, numbered row-major as
//! `g = y * |S| + s`. Every example belongs to exactly one group, and every group is
//! a subset of exactly one class.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Feature vectors with a class label and a spurious-attribute label per example.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    class_labels: Vec<usize>,
    spurious_labels: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(
        features: Matrix,
        class_labels: Vec<usize>,
        spurious_labels: Vec<usize>,
    ) -> Result<Self> {
        let m = features.rows();
        if m == 0 || features.cols() == 0 {
            return Err(Error::Shape(format!(
                "dataset needs at least one row and column, got {}x{}",
                m,
                features.cols()
            )));
        }
        if class_labels.len() != m || spurious_labels.len() != m {
            return Err(Error::Shape(format!(
                "{} feature rows but {} class labels and {} spurious labels",
                m,
                class_labels.len(),
                spurious_labels.len()
            )));
        }
        if !features.is_finite() {
            return Err(Error::NonFinite("dataset features".into()));
        }
        Ok(Self {
            features,
            class_labels,
            spurious_labels,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn class_labels(&self) -> &[usize] {
        &self.class_labels
    }

    pub fn spurious_labels(&self) -> &[usize] {
        &self.spurious_labels
    }

    /// Smallest schema that contains every label present.
    pub fn infer_schema(&self) -> GroupSchema {
        let y = self.class_labels.iter().max().map_or(1, |v| v + 1);
        let s = self.spurious_labels.iter().max().map_or(1, |v| v + 1);
        GroupSchema::new(y, s)
    }

    /// Subset of the examples at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            self.features.select_rows(indices),
            indices.iter().map(|&i| self.class_labels[i]).collect(),
            indices.iter().map(|&i| self.spurious_labels[i]).collect(),
        )
    }

    /// Same labels with a different feature matrix (e.g. penultimate activations).
    pub fn with_features(&self, features: Matrix) -> Result<Self> {
        Self::new(
            features,
            self.class_labels.clone(),
            self.spurious_labels.clone(),
        )
    }

    /// Writes `class,spurious,<prefix>_0,...` CSV with LF line endings.
    ///
    /// Floats use Rust's shortest round-trip formatting, so reading the file back
    /// reproduces the features bit for bit.
    pub fn write_csv(&self, path: impl AsRef<Path>, prefix: &str) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv_to(&mut w, prefix)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_to<W: Write>(&self, w: &mut W, prefix: &str) -> Result<()> {
        let mut header = String::from("class,spurious");
        for j in 0..self.dim() {
            header.push_str(&format!(",{prefix}_{j}"));
        }
        writeln!(w, "{header}")?;
        let mut line = String::new();
        for i in 0..self.len() {
            line.clear();
            line.push_str(&format!(
                "{},{}",
                self.class_labels[i], self.spurious_labels[i]
            ));
            for v in self.features.row(i) {
                line.push(',');
                line.push_str(&format_float(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Reads the shared dataset / feature-bank CSV format. The feature column prefix
    /// (`x`, `z`, ...) is not checked beyond being consistent across columns.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv_from(BufReader::new(File::open(path)?))
    }

    pub fn read_csv_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 3 || &header[0] != "class" || &header[1] != "spurious" {
            return Err(Error::Format(
                "header must start with `class,spurious` and name at least one feature column"
                    .into(),
            ));
        }
        let prefix = header[2]
            .rsplit_once('_')
            .map(|(p, _)| p.to_string())
            .ok_or_else(|| {
                Error::Format(format!(
                    "feature column `{}` is not `<prefix>_<k>`",
                    &header[2]
                ))
            })?;
        for (k, name) in header.iter().skip(2).enumerate() {
            if name != format!("{prefix}_{k}") {
                return Err(Error::Format(format!(
                    "expected column `{prefix}_{k}`, found `{name}`"
                )));
            }
        }
        let n = header.len() - 2;
        let mut data = Vec::new();
        let mut ys = Vec::new();
        let mut ss = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != n + 2 {
                return Err(Error::Format(format!(
                    "row {row}: expected {} fields, got {}",
                    n + 2,
                    rec.len()
                )));
            }
            let parse_label = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Format(format!("row {row}: bad label `{s}`: {e}")))
            };
            ys.push(parse_label(&rec[0])?);
            ss.push(parse_label(&rec[1])?);
            for field in rec.iter().skip(2) {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|e| Error::Format(format!("row {row}: bad number `{field}`: {e}")))?;
                data.push(v);
            }
        }
        let m = ys.len();
        Self::new(Matrix::from_vec(m, n, data), ys, ss)
    }
}

pub(crate) fn format_float(v: f64) -> String {
    // `{:?}` keeps a trailing `.0` on integral values and round-trips exactly.
    format!("{v:?}")
}

/// Sizes of the class and spurious-attribute label sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSchema {
    pub num_classes: usize,
    pub num_spurious: usize,
}

impl GroupSchema {
    pub fn new(num_classes: usize, num_spurious: usize) -> Self {
        Self {
            num_classes,
            num_spurious,
        }
    }

    pub fn num_groups(&self) -> usize {
        self.num_classes * self.num_spurious
    }

    #[inline]
    pub fn group_id(&self, class: usize, spurious: usize) -> usize {
        class * self.num_spurious + spurious
    }

    #[inline]
    pub fn class_of(&self, group: usize) -> usize {
        group / self.num_spurious
    }

    #[inline]
    pub fn spurious_of(&self, group: usize) -> usize {
        group % self.num_spurious
    }

    /// Group ids belonging to `class`, ascending.
    pub fn groups_of_class(&self, class: usize) -> std::ops::Range<usize> {
        class * self.num_spurious..(class + 1) * self.num_spurious
    }
}

/// Per-group and per-class index sets of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPartition {
    schema: GroupSchema,
    omega_g: Vec<Vec<usize>>,
    omega_y: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    majority_group_per_class: Vec<Option<usize>>,
    minority: Vec<bool>,
}

/// Minority/majority group pair within one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinMaj {
    pub min: usize,
    pub maj: usize,
    /// Set when the two coincide (single nonempty group, or all sizes tied).
    pub degenerate: bool,
}

pub fn build_partition(dataset: &LabeledDataset, schema: GroupSchema) -> Result<GroupPartition> {
    let mut omega_g = vec![Vec::new(); schema.num_groups()];
    let mut omega_y = vec![Vec::new(); schema.num_classes];
    let mut group_of = Vec::with_capacity(dataset.len());
    for (i, (&y, &s)) in dataset
        .class_labels()
        .iter()
        .zip(dataset.spurious_labels())
        .enumerate()
    {
        if y >= schema.num_classes || s >= schema.num_spurious {
            return Err(Error::LabelOutOfRange {
                index: i,
                class: y,
                spurious: s,
                num_classes: schema.num_classes,
                num_spurious: schema.num_spurious,
            });
        }
        let g = schema.group_id(y, s);
        omega_g[g].push(i);
        omega_y[y].push(i);
        group_of.push(g);
    }

    let majority_group_per_class: Vec<Option<usize>> = (0..schema.num_classes)
        .map(|y| {
            // max_by_key returns the last maximum; reverse so ties go to the smaller id
            schema
                .groups_of_class(y)
                .rev()
                .filter(|&g| !omega_g[g].is_empty())
                .max_by_key(|&g| omega_g[g].len())
        })
        .collect();
    let minority = (0..schema.num_groups())
        .map(|g| !omega_g[g].is_empty() && majority_group_per_class[schema.class_of(g)] != Some(g))
        .collect();

    Ok(GroupPartition {
        schema,
        omega_g,
        omega_y,
        group_of,
        majority_group_per_class,
        minority,
    })
}

impl GroupPartition {
    pub fn schema(&self) -> GroupSchema {
        self.schema
    }

    pub fn num_examples(&self) -> usize {
        self.group_of.len()
    }

    pub fn group(&self, g: usize) -> &[usize] {
        &self.omega_g[g]
    }

    pub fn class(&self, y: usize) -> &[usize] {
        &self.omega_y[y]
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.omega_g.iter().map(Vec::len).collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.omega_y.iter().map(Vec::len).collect()
    }

    /// Group id of example `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    pub fn class_of_example(&self, i: usize) -> usize {
        self.schema.class_of(self.group_of[i])
    }

    pub fn majority_group(&self, y: usize) -> Option<usize> {
        self.majority_group_per_class[y]
    }

    pub fn is_minority(&self, g: usize) -> bool {
        self.minority[g]
    }

    pub fn class_imbalance_ratio(&self) -> Result<f64> {
        class_imbalance_ratio(self)
    }
}

/// `max_y |Ω_y| / min_y |Ω_y|`.
pub fn class_imbalance_ratio(partition: &GroupPartition) -> Result<f64> {
    let sizes = partition.class_sizes();
    if let Some(y) = sizes.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(y));
    }
    let max = *sizes.iter().max().ok_or(Error::EmptyClass(0))?;
    let min = *sizes.iter().min().ok_or(Error::EmptyClass(0))?;
    Ok(max as f64 / min as f64)
}

pub fn intra_class_min_maj(partition: &GroupPartition, y: usize) -> Result<MinMaj> {
    let schema = partition.schema();
    if y >= schema.num_classes || partition.class(y).is_empty() {
        return Err(Error::EmptyClass(y));
    }
    let maj = partition.majority_group(y).ok_or(Error::EmptyClass(y))?;
    let min = schema
        .groups_of_class(y)
        .filter(|&g| !partition.group(g).is_empty())
        .min_by_key(|&g| partition.group(g).len())
        .ok_or(Error::EmptyClass(y))?;
    // all-tied sizes: min_by_key keeps the first (smallest id), which is also the majority
    Ok(MinMaj {
        min,
        maj,
        degenerate: min == maj,
    })
}
