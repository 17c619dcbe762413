//! Ensemble statistics along orbits of the standard map.

mod experiments;
mod observable;
pub mod rng;
mod summary;

use thiserror::Error;

pub use experiments::{
    birkhoff_sum, clt_experiment, correlation, correlation_bound, default_clt_iterates, diffusion_experiment, diffusion_iterates,
    mean_of_observable, variance_of_observable, CorrelationMethod, CorrelationResult, Experiment, ExperimentConfig,
    N14_WARNING,
};
pub use observable::{FourierMode, Observable};
pub use summary::{gaussian_cdf, ks_statistic, ks_statistic_with, SampleSummary};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("the observable has mean {mean:e}, not zero")]
    NotMeanZero { mean: f64 },
    #[error("the observable has zero variance")]
    ZeroVariance,
    #[error("empty sample")]
    EmptySample,
    #[error("{0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Quadrature(#[from] crate::numerics::quadrature::QuadratureError),
}
