#![allow(dead_code)]

use groupforge::{build_partition, GroupPartition, GroupSchema, LabeledDataset, Matrix};
use rand::Rng;
use rand_distr::StandardNormal;

/// Labels-only dataset with `counts[g]` examples of group `g`, listed group by group.
pub fn counts_dataset(counts: &[usize], schema: GroupSchema) -> LabeledDataset {
    let mut ys = Vec::new();
    let mut ss = Vec::new();
    for (g, &c) in counts.iter().enumerate() {
        ys.extend(std::iter::repeat_n(schema.class_of(g), c));
        ss.extend(std::iter::repeat_n(schema.spurious_of(g), c));
    }
    LabeledDataset::new(Matrix::zeros(ys.len(), 1), ys, ss).unwrap()
}

pub fn partition(counts: &[usize], schema: GroupSchema) -> GroupPartition {
    build_partition(&counts_dataset(counts, schema), schema).unwrap()
}

pub fn waterbirds() -> GroupPartition {
    partition(&[3498, 184, 56, 1057], GroupSchema::new(2, 2))
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Matrix::from_vec(rows, cols, data)
}

pub fn random_symmetric<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let a = gaussian_matrix(n, n, rng);
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    s
}

/// Haar-ish random orthogonal matrix from Gram-Schmidt on Gaussian columns.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let a = gaussian_matrix(n, n, rng);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<f64> = (0..n).map(|i| a[(i, j)]).collect();
        for _ in 0..2 {
            for u in &q {
                let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= d * ui;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        q.push(v.into_iter().map(|x| x / norm).collect());
    }
    // rows of the result are the orthonormal vectors
    Matrix::from_rows(&q)
}

/// Dataset with Gaussian features and random labels covering every group.
pub fn random_labeled<R: Rng>(
    m: usize,
    d: usize,
    schema: GroupSchema,
    rng: &mut R,
) -> LabeledDataset {
    let k = schema.num_groups();
    let groups: Vec<usize> = (0..m)
        .map(|i| if i < k { i } else { rng.random_range(0..k) })
        .collect();
    let ys = groups.iter().map(|&g| schema.class_of(g)).collect();
    let ss = groups.iter().map(|&g| schema.spurious_of(g)).collect();
    LabeledDataset::new(gaussian_matrix(m, d, rng), ys, ss).unwrap()
}

/// Rows of `x` multiplied by `c`.
pub fn scaled(x: &Matrix, c: f64) -> Matrix {
    Matrix::from_vec(
        x.rows(),
        x.cols(),
        x.as_slice().iter().map(|v| v * c).collect(),
    )
}

/// Lines of `text` with the timestamp metadata line removed.
pub fn without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains("generated_at_unix"))
        .collect::<Vec<_>>()
        .join("\n")
}
