use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::balancing::BalancingStrategy;
use crate::error::{Error, Result};
use crate::model::{Architecture, TrainConfig};
use crate::synthetic::{preset, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    Collapse,
    MixtureAblation,
    ScalingSweep,
    SpectralReport,
}

impl Recipe {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Collapse => "collapse",
            Self::MixtureAblation => "mixture_ablation",
            Self::ScalingSweep => "scaling_sweep",
            Self::SpectralReport => "spectral_report",
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Synthetic data source: a preset or a full spec, plus optional field overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SyntheticSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_core: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_spur: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_core: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_spur: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_validation_size")]
    pub validation_size: usize,
    #[serde(default)]
    pub data_seed: u64,
}

fn default_test_size() -> usize {
    20_000
}

fn default_validation_size() -> usize {
    2_000
}

impl DatasetConfig {
    pub fn from_preset(name: &str) -> Self {
        Self {
            preset: Some(name.to_string()),
            spec: None,
            d_core: None,
            d_spur: None,
            mu_core: None,
            mu_spur: None,
            sigma: None,
            m: None,
            test_size: default_test_size(),
            validation_size: default_validation_size(),
            data_seed: 0,
        }
    }

    /// Training-set spec after applying overrides.
    pub fn resolve(&self) -> Result<SyntheticSpec> {
        let mut spec = match (&self.preset, &self.spec) {
            (Some(name), None) => preset(name).map_err(|e| Error::Config(e.to_string()))?,
            (None, Some(spec)) => spec.clone(),
            _ => {
                return Err(Error::Config(
                    "dataset needs exactly one of `preset` or `spec`".into(),
                ))
            }
        };
        if let Some(v) = self.d_core {
            spec.d_core = v;
        }
        if let Some(v) = self.d_spur {
            spec.d_spur = v;
        }
        if let Some(v) = self.mu_core {
            spec.mu_core = v;
        }
        if let Some(v) = self.mu_spur {
            spec.mu_spur = v;
        }
        if let Some(v) = self.sigma {
            spec.sigma = v;
        }
        if let Some(v) = self.m {
            spec.m = v;
        }
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.test_size == 0 {
            return Err(Error::Config("test_size must be >= 1".into()));
        }
        Ok(spec)
    }
}

/// A mixture ratio, either a number or `"original"` for the training set's own
/// class-imbalance ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatioSpec {
    Value(f64),
    Named(NamedRatio),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedRatio {
    Original,
}

impl RatioSpec {
    pub fn resolve(&self, original: f64) -> f64 {
        match self {
            Self::Value(r) => *r,
            Self::Named(NamedRatio::Original) => original,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    /// External `class,spurious,z_0,...` feature files, one trial each. When empty
    /// the recipe trains one model per seed and uses its training-set features.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub features_csv: Vec<PathBuf>,
    #[serde(default = "default_spectral_strategy")]
    pub strategy: BalancingStrategy,
}

fn default_k() -> usize {
    10
}

fn default_spectral_strategy() -> BalancingStrategy {
    BalancingStrategy::Upsampling
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            k: default_k(),
            features_csv: Vec::new(),
            strategy: default_spectral_strategy(),
        }
    }
}

/// One experiment, read from a single JSON document. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub recipe: Recipe,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetConfig>,
    /// `none`, `subsetting`, `upsampling`, `upweighting` or `mixture-<ratio>`.
    #[serde(default)]
    pub strategies: Vec<BalancingStrategy>,
    #[serde(default)]
    pub mixture_ratios: Vec<RatioSpec>,
    /// Hidden widths for the scaling sweep; 0 stands for the linear model.
    #[serde(default)]
    pub widths: Vec<usize>,
    /// Hidden width used by the other recipes; 0 (the default) is linear.
    #[serde(default)]
    pub width: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2]
}

impl ExperimentConfig {
    pub fn new(recipe: Recipe, dataset: DatasetConfig) -> Self {
        Self {
            recipe,
            dataset: Some(dataset),
            strategies: Vec::new(),
            mixture_ratios: Vec::new(),
            widths: Vec::new(),
            width: 0,
            seeds: default_seeds(),
            train: TrainConfig::default(),
            spectral: SpectralConfig::default(),
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Pretty JSON of the config as it will be run.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn architecture(&self) -> Architecture {
        Architecture::from_width(self.width)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("`seeds` must be nonempty".into()));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return Err(Error::Config("`seeds` contains duplicates".into()));
        }
        self.train.validate()?;
        let external =
            self.recipe == Recipe::SpectralReport && !self.spectral.features_csv.is_empty();
        match &self.dataset {
            Some(d) => {
                d.resolve()?;
            }
            None if external => {}
            None => {
                return Err(Error::Config(format!(
                    "recipe `{}` requires `dataset`",
                    self.recipe
                )))
            }
        }
        match self.recipe {
            Recipe::Collapse => {
                if self.strategies.is_empty() {
                    return Err(Error::Config(
                        "collapse requires a nonempty `strategies` list".into(),
                    ));
                }
            }
            Recipe::MixtureAblation => {
                if self.mixture_ratios.is_empty() {
                    return Err(Error::Config(
                        "mixture_ablation requires a nonempty `mixture_ratios` list".into(),
                    ));
                }
                for r in &self.mixture_ratios {
                    if let RatioSpec::Value(v) = r {
                        if !(v.is_finite() && *v >= 1.0) {
                            return Err(Error::Config(format!("mixture ratio {v} must be >= 1")));
                        }
                    }
                }
            }
            Recipe::ScalingSweep => {
                if self.widths.is_empty() {
                    return Err(Error::Config(
                        "scaling_sweep requires a nonempty `widths` list".into(),
                    ));
                }
                if self.widths.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("`widths` must be strictly increasing".into()));
                }
                if self.strategies.is_empty() {
                    return Err(Error::Config(
                        "scaling_sweep requires a nonempty `strategies` list".into(),
                    ));
                }
            }
            Recipe::SpectralReport => {
                if self.spectral.k == 0 {
                    return Err(Error::Config("spectral.k must be >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_collapse() {
        let c = ExperimentConfig::from_json(
            r#"{"recipe": "collapse", "dataset": {"preset": "waterbirds-like", "m": 500},
                "strategies": ["none", "upsampling", "mixture-2"]}"#,
        )
        .unwrap();
        assert_eq!(c.seeds, vec![0, 1, 2]);
        assert_eq!(c.strategies[2], BalancingStrategy::Mixture(2.0));
        assert_eq!(c.dataset.unwrap().resolve().unwrap().m, 500);
    }

    #[test]
    fn rejects_unknown_keys_and_missing_fields() {
        let bad = [
            r#"{"recipe": "collapse", "dataset": {"preset": "waterbirds-like"}, "strategies": ["none"], "lr": 1}"#,
            r#"{"recipe": "collapse", "dataset": {"preset": "waterbirds-like", "size": 3}, "strategies": ["none"]}"#,
            r#"{"recipe": "mixture_ablation", "dataset": {"preset": "waterbirds-like"}, "mixture_ratios": []}"#,
            r#"{"recipe": "mixture_ablation", "dataset": {"preset": "waterbirds-like"}, "mixture_ratios": [0.5]}"#,
            r#"{"recipe": "scaling_sweep", "dataset": {"preset": "waterbirds-like"}, "widths": [8, 8], "strategies": ["none"]}"#,
            r#"{"recipe": "collapse", "dataset": {"preset": "waterbirds-like"}, "strategies": ["none"], "seeds": []}"#,
            r#"{"recipe": "collapse", "dataset": {"preset": "imagenet-like"}, "strategies": ["none"]}"#,
            r#"{"recipe": "collapse", "dataset": {"preset": "waterbirds-like"}, "strategies": ["bagging"]}"#,
            r#"{"recipe": "collapse", "strategies": ["none"]}"#,
            r#"{"recipe": "fig9"}"#,
        ];
        for text in bad {
            assert!(
                matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn ratio_specs() {
        let c = ExperimentConfig::from_json(
            r#"{"recipe": "mixture_ablation", "dataset": {"preset": "waterbirds-like"},
                "mixture_ratios": [1, 2.5, "original"]}"#,
        )
        .unwrap();
        let r: Vec<f64> = c.mixture_ratios.iter().map(|r| r.resolve(3.3)).collect();
        assert_eq!(r, vec![1.0, 2.5, 3.3]);
    }

    #[test]
    fn external_spectral_needs_no_dataset() {
        let c = ExperimentConfig::from_json(
            r#"{"recipe": "spectral_report", "spectral": {"k": 50, "features_csv": ["a.csv"]}}"#,
        )
        .unwrap();
        assert_eq!(c.spectral.k, 50);
    }

    #[test]
    fn json_round_trip() {
        let mut c = ExperimentConfig::new(
            Recipe::ScalingSweep,
            DatasetConfig::from_preset("celeba-like"),
        );
        c.widths = vec![0, 8, 32];
        c.strategies = vec![BalancingStrategy::None, BalancingStrategy::Mixture(2.5)];
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }
}
