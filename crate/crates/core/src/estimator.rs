//! Interpolated nearest-neighbor regression and classification.

use std::sync::Arc;

use crate::config::{validate_config, Advisory, EstimatorConfig};
use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::neighbors::{KdIndex, Neighbor, NeighborQueryResult};

/// Label and the weighted vote `sum_i W_i Y^i` it was thresholded from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassPrediction {
    pub label: u8,
    pub score: f64,
}

/// `1` iff the weighted vote is strictly above one half.
#[inline]
pub fn threshold(score: f64) -> u8 {
    u8::from(score > 0.5)
}

/// A configuration bound to training data and its neighbor index.
///
/// Dataset and index sit behind `Arc` so several estimators (for example one
/// per interpolation level) can share a single index.
#[derive(Debug, Clone)]
pub struct FittedEstimator {
    dataset: Arc<Dataset>,
    index: Arc<KdIndex>,
    config: EstimatorConfig,
    advisory: Option<Advisory>,
}

impl FittedEstimator {
    pub fn fit(dataset: Dataset, config: EstimatorConfig) -> Result<Self> {
        let index = KdIndex::build(&dataset, config.metric);
        Self::with_index(Arc::new(dataset), Arc::new(index), config)
    }

    /// Reuses an index that was built over `dataset` with the same metric.
    pub fn with_index(dataset: Arc<Dataset>, index: Arc<KdIndex>, config: EstimatorConfig) -> Result<Self> {
        let validated = validate_config(&config, &dataset)?;
        if index.n() != dataset.n() || index.d() != dataset.d() || index.metric() != config.metric {
            return Err(Error::InvalidSpec("index was not built for this dataset and metric".into()));
        }
        Ok(Self {
            dataset,
            index,
            config: validated.config,
            advisory: validated.advisory,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn shared_dataset(&self) -> Arc<Dataset> {
        Arc::clone(&self.dataset)
    }

    pub fn index(&self) -> &KdIndex {
        &self.index
    }

    pub fn shared_index(&self) -> Arc<KdIndex> {
        Arc::clone(&self.index)
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn advisory(&self) -> Option<Advisory> {
        self.advisory
    }

    pub fn neighbors(&self, x: &[f64]) -> Result<NeighborQueryResult> {
        self.index.query(x, self.config.k)
    }

    /// The weighted average `sum_i W_i Y^i` at `x`, regardless of task.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let nb = self.neighbors(x)?;
        self.score_neighbors(&nb)
    }

    /// [`score`](Self::score) for an already computed neighborhood.
    pub fn score_neighbors(&self, nb: &NeighborQueryResult) -> Result<f64> {
        let raw = self.config.scheme.raw_weights(&nb.distances, nb.r_kplus1)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for (w, &i) in raw.iter().zip(&nb.indices) {
            num += w * self.dataset.response(i);
            den += w;
        }
        if !(den > 0.0) || !den.is_finite() {
            return Err(Error::NumericOverflow);
        }
        Ok(num / den)
    }

    pub fn predict_regression(&self, x: &[f64]) -> Result<f64> {
        self.require(Task::Regression)?;
        self.score(x)
    }

    pub fn predict_class(&self, x: &[f64]) -> Result<ClassPrediction> {
        self.require(Task::Classification)?;
        let score = self.score(x)?;
        Ok(ClassPrediction {
            label: threshold(score),
            score,
        })
    }

    fn require(&self, task: Task) -> Result<()> {
        let found = self.dataset.task();
        if found != task {
            return Err(Error::TaskMismatch {
                expected: task.name(),
                found: found.name(),
            });
        }
        Ok(())
    }
}

/// Power-scheme scores for every `k` in `1..=k_max` from one sorted
/// neighbor list.
///
/// `neighbors` must be sorted by `(distance, index)` and hold at least
/// `k_max` entries. Because the power weights only depend on ratios, the
/// normalizer `R_{k+1}` cancels and the score for `k` is a ratio of prefix
/// sums. `out[g * k_max + (k - 1)]` receives the score for `gammas[g]` and
/// `k`; each value is bit-identical to what [`FittedEstimator::score`]
/// returns for the same `k` and `gamma`.
pub fn power_scores_all_k(neighbors: &[Neighbor], responses: &[f64], gammas: &[f64], k_max: usize, out: &mut [f64]) {
    assert!(neighbors.len() >= k_max, "need at least k_max neighbors");
    assert_eq!(out.len(), gammas.len() * k_max);
    let nb = &neighbors[..k_max];
    let zeros = nb.iter().take_while(|n| n.distance == 0.0).count();
    let r_min = nb.first().map_or(0.0, |n| n.distance);
    let mut logs: Vec<f64> = Vec::new();

    for (g, &gamma) in gammas.iter().enumerate() {
        let row = &mut out[g * k_max..(g + 1) * k_max];
        let mut num = 0.0;
        let mut den = 0.0;
        if gamma == 0.0 {
            for (k, n) in nb.iter().enumerate() {
                num += responses[n.index];
                den += 1.0;
                row[k] = num / den;
            }
        } else if zeros > 0 {
            for (k, n) in nb.iter().enumerate() {
                if k < zeros {
                    num += responses[n.index];
                    den += 1.0;
                }
                row[k] = num / den;
            }
        } else {
            if logs.is_empty() {
                logs.extend(nb.iter().map(|n| (r_min / n.distance).ln()));
            }
            for (k, n) in nb.iter().enumerate() {
                // Same expression as `power_weight(r_min, n.distance, gamma)`.
                let w = (gamma * logs[k]).exp();
                num += w * responses[n.index];
                den += w;
                row[k] = num / den;
            }
        }
    }
}
