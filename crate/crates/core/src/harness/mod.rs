//! Metrics, the GLAD protocol, flip curves and experiment configuration.

pub mod config;
pub mod flip;
pub mod glad;
pub mod metrics;

pub use config::{ExperimentConfig, Method, Variant};
pub use flip::{run_flip_experiment, FlipConfig, FlipCurve, FlipModel, FlipRow};
pub use glad::{load_dataset, run_glad_experiment, GladReport, TrialResult};
pub use metrics::{auroc, average_precision, precision_at_k};
