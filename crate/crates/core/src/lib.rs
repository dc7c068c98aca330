//! Interpolated nearest neighbors.
//!
//! A k-NN variant whose weights `phi(R_i / R_{k+1})` blow up at zero
//! distance, so the fitted function passes through every training point.
//! With `phi(t) = t^-gamma`, `gamma = 0` recovers k-NN and large `gamma`
//! approaches 1-NN.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod evaluation;
pub mod ingest;
pub mod metric;
pub mod neighbors;
pub mod plot;
pub mod synthetic;
pub mod theory;
pub mod weighting;

pub use config::{validate_config, Advisory, EstimatorConfig, ValidatedConfig};
pub use dataset::{Dataset, Task};
pub use error::{Error, Result};
pub use estimator::{ClassPrediction, FittedEstimator};
pub use metric::Metric;
pub use neighbors::{KdIndex, Neighbor, NeighborQueryResult};
pub use weighting::{compute_weights, GeneralPhi, WeightScheme, WeightVector};
