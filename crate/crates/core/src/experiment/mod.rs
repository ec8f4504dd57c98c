//! Config-driven recipes: collapse comparison, mixture-ratio ablation, width sweep
//! and spectral report.

pub mod config;
pub mod runner;

pub use config::{DatasetConfig, ExperimentConfig, NamedRatio, RatioSpec, Recipe, SpectralConfig};
pub use runner::{
    emit_dataset, run, run_collapse, run_mixture_ablation, run_scaling_sweep, run_spectral_report,
    spectral_trial, summarize, Cell, CellResult, Datasets, RecipeOutput, RunContext, SummaryRow,
    ValidationScore,
};
