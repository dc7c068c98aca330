//! Estimator configuration and its validation against a dataset.

use std::fmt;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::weighting::WeightScheme;

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub k: usize,
    pub metric: Metric,
    pub scheme: WeightScheme,
}

impl EstimatorConfig {
    /// Power-scheme configuration with interpolation level `gamma`.
    pub fn new(k: usize, gamma: f64, metric: Metric) -> Self {
        Self {
            k,
            metric,
            scheme: WeightScheme::Power(gamma),
        }
    }

    pub fn with_scheme(k: usize, scheme: WeightScheme, metric: Metric) -> Self {
        Self { k, metric, scheme }
    }

    pub fn gamma(&self) -> Option<f64> {
        self.scheme.gamma()
    }
}

/// Non-fatal findings from [`validate_config`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Advisory {
    /// `gamma >= d/3`: predictions are fine, the asymptotic ratios are not
    /// guaranteed there.
    OutsideTheoryRange { gamma: f64, limit: f64 },
}

impl fmt::Display for Advisory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Advisory::OutsideTheoryRange { gamma, limit } => {
                write!(f, "gamma = {gamma} >= d/3 = {limit}: outside theory range")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub config: EstimatorConfig,
    pub advisory: Option<Advisory>,
}

pub fn validate_config(config: &EstimatorConfig, dataset: &Dataset) -> Result<ValidatedConfig> {
    let p = config.metric.p();
    if !(p >= 1.0) {
        return Err(Error::BadMetric(p));
    }
    if config.k == 0 {
        return Err(Error::ZeroK);
    }
    if config.k >= dataset.n() {
        return Err(Error::KTooLarge {
            k: config.k,
            n: dataset.n(),
        });
    }
    let mut advisory = None;
    if let Some(gamma) = config.gamma() {
        if !(gamma >= 0.0) {
            return Err(Error::NegativeGamma(gamma));
        }
        let limit = dataset.d() as f64 / 3.0;
        if gamma >= limit {
            advisory = Some(Advisory::OutsideTheoryRange { gamma, limit });
        }
    }
    Ok(ValidatedConfig {
        config: config.clone(),
        advisory,
    })
}
