use serde::{Deserialize, Serialize};

use super::ModelParams;

/// Learning-rate multiplier as a function of training progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Cosine,
    Linear,
    Constant,
}

impl Schedule {
    /// Multiplier for zero-based `epoch` out of `total` epochs; 1 at the first epoch.
    pub fn factor(&self, epoch: usize, total: usize) -> f64 {
        let t = if total == 0 {
            0.0
        } else {
            epoch as f64 / total as f64
        };
        match self {
            Self::Cosine => 0.5 * (1.0 + (std::f64::consts::PI * t).cos()),
            Self::Linear => 1.0 - t,
            Self::Constant => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamWConfig {
    pub lr: f64,
    pub weight_decay: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            weight_decay: 1e-4,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }
}

/// Adam with decoupled weight decay: `θ ← θ(1 − lr·λ)` then the bias-corrected
/// adaptive step `θ ← θ − lr · m̂ / (√v̂ + ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamW {
    config: AdamWConfig,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: u64,
}

impl AdamW {
    pub fn new(config: AdamWConfig, params: &ModelParams) -> Self {
        let zeros: Vec<Vec<f64>> = params
            .tensors()
            .iter()
            .map(|t| vec![0.0; t.len()])
            .collect();
        Self {
            config,
            first: zeros.clone(),
            second: zeros,
            step: 0,
        }
    }

    pub fn config(&self) -> &AdamWConfig {
        &self.config
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn second_moments(&self) -> impl Iterator<Item = f64> + '_ {
        self.second.iter().flatten().copied()
    }

    /// One update with the base learning rate scaled by `lr_factor`.
    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelParams, lr_factor: f64) {
        self.step += 1;
        let AdamWConfig {
            lr,
            weight_decay,
            beta1,
            beta2,
            eps,
        } = self.config;
        let lr = lr * lr_factor;
        let t = self.step as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        let decay = 1.0 - lr * weight_decay;
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            for k in 0..p.len() {
                let gk = g[k];
                m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
                v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                p[k] = p[k] * decay - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Architecture;
    use crate::test_support::seeded;

    fn scalar_model(value: f64) -> ModelParams {
        let mut p = ModelParams::zeros(Architecture::Linear, 1, 1);
        p.layers_mut()[0].weight.as_mut_slice()[0] = value;
        p
    }

    fn first(p: &ModelParams) -> f64 {
        p.tensors()[0][0]
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let p0 = ModelParams::init(Architecture::OneHidden { width: 3 }, 2, 2, &mut seeded(1));
        let cfg = AdamWConfig {
            weight_decay: 0.0,
            ..Default::default()
        };
        let mut opt = AdamW::new(cfg, &p0);
        let mut p = p0.clone();
        let zeros = ModelParams::zeros(p.architecture(), 2, 2);
        for _ in 0..5 {
            opt.step(&mut p, &zeros, 1.0);
        }
        assert_eq!(p, p0);
    }

    #[test]
    fn first_step_hand_computation() {
        let cfg = AdamWConfig {
            lr: 0.01,
            weight_decay: 0.0,
            ..Default::default()
        };
        for g in [0.5, -2.0, 1e-3] {
            let mut p = scalar_model(1.0);
            let mut grads = scalar_model(0.0);
            grads.layers_mut()[0].weight.as_mut_slice()[0] = g;
            let mut opt = AdamW::new(cfg, &p);
            opt.step(&mut p, &grads, 1.0);
            // m̂ = g, v̂ = g², so the step is lr · g / (|g| + ε)
            let expected = 1.0 - 0.01 * g / (g.abs() + 1e-8);
            assert!((first(&p) - expected).abs() < 1e-15, "g = {g}");
        }
    }

    #[test]
    fn decay_only_dynamics() {
        let cfg = AdamWConfig {
            lr: 0.1,
            weight_decay: 0.5,
            ..Default::default()
        };
        let mut p = scalar_model(2.0);
        let zeros = scalar_model(0.0);
        let mut opt = AdamW::new(cfg, &p);
        for k in 1..=4 {
            opt.step(&mut p, &zeros, 1.0);
            assert!((first(&p) - 2.0 * 0.95f64.powi(k)).abs() < 1e-15);
        }
        assert_eq!(opt.steps(), 4);
        assert!(opt.second_moments().all(|v| v >= 0.0));
    }

    #[test]
    fn schedules() {
        assert_eq!(Schedule::Cosine.factor(0, 10), 1.0);
        assert!((Schedule::Cosine.factor(5, 10) - 0.5).abs() < 1e-15);
        assert!((Schedule::Linear.factor(5, 10) - 0.5).abs() < 1e-15);
        assert_eq!(Schedule::Constant.factor(9, 10), 1.0);
        assert!(Schedule::Cosine.factor(9, 10) > 0.0);
    }
}
