//! Simulation models, sampling, metrics, and replicate experiments.

mod data;
mod experiment;
mod metrics;
mod models;

pub use data::{mvn_sample, sample_correlation, sample_covariance, standardize, DataMatrix};
pub use experiment::{
    child_seed, run_experiment, replicate, ExperimentConfig, ExperimentReport, ExperimentSummary,
    MetricSummary, Model, ReplicateOutcome,
};
pub use metrics::{metrics, MetricsReport};
pub use models::{model1_cov, model2_cov, GroundTruth, MODEL2_BLOCK};
