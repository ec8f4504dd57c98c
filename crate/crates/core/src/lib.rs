//! Class-balancing and group-robustness toolkit.
//!
//! The crate covers the full loop of a spurious-correlation experiment:
//!
//! * [`group`]: datasets labelled with a class and a spurious attribute, the
//!   group structure `G = Y × S`, and per-group / per-class index sets;
//! * [`balancing`]: subsetting, upsampling, upweighting and mixture balancing;
//! * [`synthetic`]: a Gaussian generator with benchmark-like group proportions;
//! * [`model`]: linear and one-hidden-layer classifiers, AdamW, and the training loop;
//! * [`metrics`]: worst-group, worst-class and average accuracy;
//! * [`spectral`]: group covariance eigenspectra and the intra-class spectral norm ratio;
//! * [`experiment`]: config-driven recipes that write traces, summaries and reports.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod balancing;
pub mod error;
pub mod experiment;
pub mod group;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod spectral;
pub mod synthetic;

pub use balancing::BalancingStrategy;
pub use error::{Error, Result};
pub use group::{build_partition, GroupPartition, GroupSchema, LabeledDataset};
pub use linalg::Matrix;
pub use model::{Architecture, ModelParams, TrainConfig, TrainTrace};
pub use synthetic::{generate, preset, SyntheticSpec};
