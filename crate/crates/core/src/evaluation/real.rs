//! Test error of interpolated-NN on a labelled CSV dataset over repeated splits.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::Result;
use crate::estimator::{power_scores_all_k, threshold};
use crate::ingest::{split, standardize, IngestSpec};
use crate::metric::Metric;
use crate::neighbors::KdIndex;

use super::experiment::{sorted_unique, validate_gamma_fractions, validate_k_grid};
use super::metrics::{require_positive, require_task};
use super::seeds::stream_rng;
use super::stats::{argmin, mean_sd};

fn default_k_grid() -> Vec<usize> {
    vec![1, 2, 3, 5, 7, 10, 15, 20, 30, 40, 50]
}
fn default_gamma_grid() -> Vec<f64> {
    vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35]
}
fn default_repeats() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealSpec {
    pub ingest: IngestSpec,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<usize>,
    /// Interpolation levels as fractions `gamma / d`.
    #[serde(default = "default_gamma_grid")]
    pub gamma_grid: Vec<f64>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub metric: Metric,
}

impl RealSpec {
    pub fn new(ingest: IngestSpec) -> Self {
        Self {
            ingest,
            k_grid: default_k_grid(),
            gamma_grid: default_gamma_grid(),
            repeats: default_repeats(),
            metric: Metric::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealRow {
    pub gamma_over_d: f64,
    pub k_best: usize,
    pub test_error_mean: f64,
    pub test_error_sd: f64,
}

/// k-NN against the best strictly positive interpolation level.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSummary {
    pub baseline_error: f64,
    pub best_gamma_over_d: f64,
    pub best_error: f64,
    pub k_best: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealResult {
    pub n: usize,
    pub d: usize,
    pub rows: Vec<RealRow>,
    /// `None` when the grid holds no positive level.
    pub summary: Option<RealSummary>,
}

/// Misclassification rate on the test part for every `(gamma, k)`.
fn split_errors(train: &Dataset, test: &Dataset, gammas: &[f64], ks: &[usize], metric: Metric) -> Vec<f64> {
    let k_max = *ks.last().expect("validated grid");
    let width = ks.len();
    let index = KdIndex::build(train, metric);
    let mut buf = vec![0.0; gammas.len() * k_max];
    let mut errors = vec![0.0; gammas.len() * width];
    for (x, y) in test.iter() {
        let nb = index.nearest(x, k_max);
        power_scores_all_k(&nb, train.responses(), gammas, k_max, &mut buf);
        for g in 0..gammas.len() {
            for (ki, &k) in ks.iter().enumerate() {
                if f64::from(threshold(buf[g * k_max + k - 1])) != y {
                    errors[g * width + ki] += 1.0;
                }
            }
        }
    }
    let n = test.n() as f64;
    errors.iter_mut().for_each(|e| *e /= n);
    errors
}

/// Repeats the random split `spec.repeats` times. Split `r` uses the seed
/// drawn from stream `r` of `ingest.split_seed`. For each `gamma`, `k` is the
/// grid value with the lowest test error averaged over repeats.
pub fn run_real_experiment(dataset: &Dataset, spec: &RealSpec) -> Result<RealResult> {
    require_task(dataset.task(), Task::Classification)?;
    require_positive(spec.repeats, "repeats")?;
    validate_gamma_fractions(&spec.gamma_grid)?;
    let n_train = (dataset.n() as f64 * spec.ingest.train_fraction).round() as usize;
    validate_k_grid(&spec.k_grid, n_train)?;
    let ks = sorted_unique(&spec.k_grid);
    let d = dataset.d();
    let gammas: Vec<f64> = spec.gamma_grid.iter().map(|f| f * d as f64).collect();

    let per_split: Vec<Vec<f64>> = (0..spec.repeats)
        .into_par_iter()
        .map(|r| {
            let seed = stream_rng(spec.ingest.split_seed, r as u64).next_u64();
            let (train, test) = split(dataset, spec.ingest.train_fraction, seed)?;
            let (train, test) = if spec.ingest.standardize {
                let (a, b, _) = standardize(&train, &test)?;
                (a, b)
            } else {
                (train, test)
            };
            Ok(split_errors(&train, &test, &gammas, &ks, spec.metric))
        })
        .collect::<Result<_>>()?;

    let width = ks.len();
    let reps = per_split.len() as f64;
    let mut rows = Vec::with_capacity(gammas.len());
    for (g, &frac) in spec.gamma_grid.iter().enumerate() {
        let mean: Vec<f64> = (0..width)
            .map(|ki| per_split.iter().map(|e| e[g * width + ki]).sum::<f64>() / reps)
            .collect();
        let best = argmin(&mean);
        let values: Vec<f64> = per_split.iter().map(|e| e[g * width + best]).collect();
        let (test_error_mean, test_error_sd) = mean_sd(&values);
        rows.push(RealRow {
            gamma_over_d: frac,
            k_best: ks[best],
            test_error_mean,
            test_error_sd,
        });
    }

    let baseline = rows.iter().find(|r| r.gamma_over_d == 0.0).expect("grid contains 0");
    let summary = rows
        .iter()
        .filter(|r| r.gamma_over_d > 0.0)
        .fold(None::<&RealRow>, |best, r| match best {
            Some(b) if b.test_error_mean <= r.test_error_mean => Some(b),
            _ => Some(r),
        })
        .map(|best| RealSummary {
            baseline_error: baseline.test_error_mean,
            best_gamma_over_d: best.gamma_over_d,
            best_error: best.test_error_mean,
            k_best: best.k_best,
        });
    Ok(RealResult {
        n: dataset.n(),
        d,
        rows,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Column;

    #[test]
    fn single_class_gives_constant_error() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let ds = Dataset::from_rows(&rows, vec![1.0; 40], Task::Classification).unwrap();
        let mut spec = RealSpec::new(IngestSpec::new("unused", vec![Column::Index(0)], Column::Index(1)));
        spec.repeats = 4;
        spec.k_grid = vec![1, 3, 5];
        let r = run_real_experiment(&ds, &spec).unwrap();
        assert!(r.rows.iter().all(|row| row.test_error_mean == 0.0));
        let s = r.summary.unwrap();
        assert_eq!(s.baseline_error, 0.0);
        assert_eq!(s.best_gamma_over_d, 0.05);
    }
}
