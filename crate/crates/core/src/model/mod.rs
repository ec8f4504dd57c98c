//! Small classifiers with hand-derived gradients: a linear softmax model and a
//! one-hidden-layer rectifier network.

mod optim;
mod train;

pub use optim::{AdamW, AdamWConfig, Schedule};
pub use train::{
    interpolation_epoch, predict, train, EpochRecord, TrainConfig, TrainOutcome, TrainTrace,
};

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

pub const MAGIC: &[u8; 4] = b"GFM1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "snake_case", deny_unknown_fields)]
pub enum Architecture {
    Linear,
    OneHidden { width: usize },
}

impl Architecture {
    /// Width 0 stands for the linear model in scaling sweeps.
    pub fn from_width(width: usize) -> Self {
        if width == 0 {
            Self::Linear
        } else {
            Self::OneHidden { width }
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Self::Linear => 0,
            Self::OneHidden { width } => *width,
        }
    }
}

/// Weight matrix (`out × in`) and bias of one affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Self {
            weight: Matrix::zeros(out_dim, in_dim),
            bias: vec![0.0; out_dim],
        }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.bias
                .iter()
                .enumerate()
                .map(|(o, b)| b + dot(self.weight.row(o), x)),
        );
    }
}

/// Parameters of a model; also used as the container for gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    architecture: Architecture,
    input_dim: usize,
    num_classes: usize,
    layers: Vec<Dense>,
}

/// Output of a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub logits: Vec<f64>,
    /// Penultimate representation: the input itself for the linear model.
    pub features: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(architecture: Architecture, input_dim: usize, num_classes: usize) -> Self {
        let layers = match architecture {
            Architecture::Linear => vec![Dense::zeros(num_classes, input_dim)],
            Architecture::OneHidden { width } => {
                vec![
                    Dense::zeros(width, input_dim),
                    Dense::zeros(num_classes, width),
                ]
            }
        };
        Self {
            architecture,
            input_dim,
            num_classes,
            layers,
        }
    }

    /// Weights uniform in `±1/√fan_in`, biases zero.
    pub fn init<R: Rng + ?Sized>(
        architecture: Architecture,
        input_dim: usize,
        num_classes: usize,
        rng: &mut R,
    ) -> Self {
        let mut p = Self::zeros(architecture, input_dim, num_classes);
        for layer in &mut p.layers {
            let bound = 1.0 / (layer.weight.cols() as f64).sqrt();
            for w in layer.weight.as_mut_slice() {
                *w = rng.random_range(-bound..=bound);
            }
        }
        p
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn feature_dim(&self) -> usize {
        match self.architecture {
            Architecture::Linear => self.input_dim,
            Architecture::OneHidden { width } => width,
        }
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Parameter tensors in declaration order: weight, bias per layer.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.as_slice(), l.bias.as_slice()])
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weight.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        if x.len() != self.input_dim {
            return Err(Error::Shape(format!(
                "input has dim {}, model expects {}",
                x.len(),
                self.input_dim
            )));
        }
        let mut logits = Vec::with_capacity(self.num_classes);
        let features = match self.architecture {
            Architecture::Linear => {
                self.layers[0].apply(x, &mut logits);
                x.to_vec()
            }
            Architecture::OneHidden { .. } => {
                let mut hidden = Vec::new();
                self.layers[0].apply(x, &mut hidden);
                for h in &mut hidden {
                    *h = h.max(0.0);
                }
                self.layers[1].apply(&hidden, &mut logits);
                hidden
            }
        };
        Ok(Forward { logits, features })
    }

    /// Penultimate features of every row, as an `m × feature_dim` matrix.
    pub fn features(&self, x: &Matrix) -> Result<Matrix> {
        let mut data = Vec::with_capacity(x.rows() * self.feature_dim());
        for i in 0..x.rows() {
            data.extend(self.forward(x.row(i))?.features);
        }
        Ok(Matrix::from_vec(x.rows(), self.feature_dim(), data))
    }

    /// Writes the `GFM1` binary: magic, `[input_dim, hidden_width, num_classes]` as
    /// little-endian `u32` (width 0 = linear), then every parameter as a
    /// little-endian `f64` in declaration order.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        for d in [self.input_dim, self.architecture.width(), self.num_classes] {
            let d =
                u32::try_from(d).map_err(|_| Error::Shape(format!("dimension {d} exceeds u32")))?;
            w.write_all(&d.to_le_bytes())?;
        }
        for t in self.tensors() {
            for v in t {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let mut dims = [0usize; 3];
        for d in &mut dims {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            *d = u32::from_le_bytes(b) as usize;
        }
        let [input_dim, width, num_classes] = dims;
        if input_dim == 0 || num_classes == 0 {
            return Err(Error::Format("zero dimension in model header".into()));
        }
        let mut p = Self::zeros(Architecture::from_width(width), input_dim, num_classes);
        for t in p.tensors_mut() {
            for v in t.iter_mut() {
                let mut b = [0u8; 8];
                r.read_exact(&mut b)?;
                *v = f64::from_le_bytes(b);
            }
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::Format(format!(
                "{} trailing bytes after parameters",
                rest.len()
            )));
        }
        Ok(p)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

/// `γ · (−log softmax(logits)[y])`.
pub fn weighted_cross_entropy(logits: &[f64], y: usize, gamma: f64) -> f64 {
    gamma * (log_sum_exp(logits) - logits[y])
}

/// Loss and exact gradient of the weight-normalized batch loss
/// `Σ w_i ℓ_i / Σ w_i`. A batch whose weights sum to zero has zero loss and gradient.
pub fn backward(
    params: &ModelParams,
    xs: &[&[f64]],
    ys: &[usize],
    ws: &[f64],
) -> Result<(f64, ModelParams)> {
    if xs.is_empty() || xs.len() != ys.len() || xs.len() != ws.len() {
        return Err(Error::Shape(format!(
            "batch with {} inputs, {} labels, {} weights",
            xs.len(),
            ys.len(),
            ws.len()
        )));
    }
    let mut grads = ModelParams::zeros(params.architecture, params.input_dim, params.num_classes);
    let total_weight: f64 = ws.iter().sum();
    if total_weight == 0.0 {
        return Ok((0.0, grads));
    }
    let mut loss = 0.0;
    let mut hidden = Vec::new();
    let mut logits = Vec::new();
    let mut dhidden = Vec::new();
    for ((x, &y), &w) in xs.iter().zip(ys).zip(ws) {
        if x.len() != params.input_dim {
            return Err(Error::Shape(format!(
                "input has dim {}, model expects {}",
                x.len(),
                params.input_dim
            )));
        }
        if y >= params.num_classes {
            return Err(Error::Shape(format!(
                "label {y} for {} classes",
                params.num_classes
            )));
        }
        let scale = w / total_weight;
        match params.architecture {
            Architecture::Linear => {
                params.layers[0].apply(x, &mut logits);
                loss += scale * weighted_cross_entropy(&logits, y, 1.0);
                let dlogits = output_delta(&logits, y, scale);
                accumulate(&mut grads.layers[0], &dlogits, x);
            }
            Architecture::OneHidden { .. } => {
                params.layers[0].apply(x, &mut hidden);
                for h in &mut hidden {
                    *h = h.max(0.0);
                }
                params.layers[1].apply(&hidden, &mut logits);
                loss += scale * weighted_cross_entropy(&logits, y, 1.0);
                let dlogits = output_delta(&logits, y, scale);
                accumulate(&mut grads.layers[1], &dlogits, &hidden);
                let w2 = &params.layers[1].weight;
                dhidden.clear();
                dhidden.extend((0..hidden.len()).map(|j| {
                    if hidden[j] > 0.0 {
                        dlogits
                            .iter()
                            .enumerate()
                            .map(|(o, d)| d * w2[(o, j)])
                            .sum()
                    } else {
                        0.0
                    }
                }));
                accumulate(&mut grads.layers[0], &dhidden, x);
            }
        }
    }
    Ok((loss, grads))
}

/// `scale · (softmax − one_hot(y))`
fn output_delta(logits: &[f64], y: usize, scale: f64) -> Vec<f64> {
    let mut d = softmax(logits);
    d[y] -= 1.0;
    for v in &mut d {
        *v *= scale;
    }
    d
}

fn accumulate(grad: &mut Dense, delta: &[f64], input: &[f64]) {
    for (o, &d) in delta.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        grad.bias[o] += d;
        for (g, &x) in grad.weight.row_mut(o).iter_mut().zip(input) {
            *g += d * x;
        }
    }
}
