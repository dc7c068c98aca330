//! One-dimensional fixed-design study of three weight functions.

use crate::config::EstimatorConfig;
use crate::error::Result;
use crate::estimator::FittedEstimator;
use crate::metric::Metric;
use crate::synthetic::{toy_models, SyntheticModel, ToyModel};
use crate::weighting::{phi_catalog, PhiName};

use super::seeds::stream_rng;
use super::stats::mean_sd;

pub const TOY_K: usize = 10;

/// k-NN, `phi(t) = 1 - ln t` and `phi(t) = 1/t`.
pub fn toy_schemes() -> [PhiName; 3] {
    [PhiName::Uniform, PhiName::OneMinusLog, PhiName::Power(1.0)]
}

/// `x = 0, 0.1, ..., 20`, away from the edges of the design.
pub fn toy_eval_grid() -> Vec<f64> {
    (0..=200).map(|i| f64::from(i) / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyCurveRow {
    pub model_id: u8,
    pub scheme: String,
    pub x: f64,
    pub eta_true: f64,
    pub eta_hat: f64,
}

fn fits(model: &ToyModel, seed: u64, rep: u64) -> Result<Vec<FittedEstimator>> {
    let stream = rep * 3 + u64::from(model.id() - 1);
    let train = model.sample(&mut stream_rng(seed, stream), 0)?;
    toy_schemes()
        .into_iter()
        .map(|name| {
            let config = EstimatorConfig::with_scheme(TOY_K, phi_catalog(name)?, Metric::euclidean());
            FittedEstimator::fit(train.clone(), config)
        })
        .collect()
}

/// Fitted curves of every model and scheme for one noise draw.
pub fn toy_curves(seed: u64) -> Result<Vec<ToyCurveRow>> {
    let grid = toy_eval_grid();
    let mut rows = Vec::new();
    for model in toy_models() {
        for (est, name) in fits(&model, seed, 0)?.iter().zip(toy_schemes()) {
            for &x in &grid {
                rows.push(ToyCurveRow {
                    model_id: model.id(),
                    scheme: name.to_string(),
                    x,
                    eta_true: model.eta(&[x]),
                    eta_hat: est.predict_regression(&[x])?,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToySchemeStats {
    pub scheme: String,
    /// Grid-averaged squared error of each repetition.
    pub mse_per_rep: Vec<f64>,
    pub mse_mean: f64,
    pub mse_sd: f64,
    /// Grid average of `(mean fit - eta)^2` over repetitions.
    pub bias2: f64,
    /// Grid average of the across-repetition variance of the fit.
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyModelStats {
    pub model_id: u8,
    pub schemes: Vec<ToySchemeStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyStudy {
    pub repetitions: usize,
    pub models: Vec<ToyModelStats>,
}

impl ToyStudy {
    pub fn model(&self, id: u8) -> Option<&ToyModelStats> {
        self.models.iter().find(|m| m.model_id == id)
    }
}

impl ToyModelStats {
    /// Share of repetitions in which scheme `s` has strictly the smallest error.
    pub fn strict_win_rate(&self, s: usize) -> f64 {
        let reps = self.schemes[s].mse_per_rep.len();
        let wins = (0..reps)
            .filter(|&r| {
                let mine = self.schemes[s].mse_per_rep[r];
                self.schemes
                    .iter()
                    .enumerate()
                    .all(|(j, o)| j == s || mine < o.mse_per_rep[r])
            })
            .count();
        wins as f64 / reps as f64
    }
}

/// Repeats the fixed-design fit with fresh noise and records errors on the
/// evaluation grid.
pub fn toy_study(repetitions: usize, seed: u64) -> Result<ToyStudy> {
    let grid = toy_eval_grid();
    let mut models = Vec::new();
    for model in toy_models() {
        let truth: Vec<f64> = grid.iter().map(|&x| model.eta(&[x])).collect();
        let ns = toy_schemes().len();
        // [scheme][rep][grid point]
        let mut preds = vec![Vec::with_capacity(repetitions); ns];
        for rep in 0..repetitions {
            for (s, est) in fits(&model, seed, rep as u64)?.iter().enumerate() {
                let p = grid.iter().map(|&x| est.predict_regression(&[x])).collect::<Result<Vec<_>>>()?;
                preds[s].push(p);
            }
        }
        let schemes = toy_schemes()
            .iter()
            .zip(&preds)
            .map(|(name, reps)| scheme_stats(name.to_string(), reps, &truth))
            .collect();
        models.push(ToyModelStats {
            model_id: model.id(),
            schemes,
        });
    }
    Ok(ToyStudy { repetitions, models })
}

fn scheme_stats(scheme: String, reps: &[Vec<f64>], truth: &[f64]) -> ToySchemeStats {
    let m = truth.len() as f64;
    let mse_per_rep: Vec<f64> = reps
        .iter()
        .map(|p| p.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / m)
        .collect();
    let (mse_mean, mse_sd) = mean_sd(&mse_per_rep);
    let mut bias2 = 0.0;
    let mut variance = 0.0;
    for (j, &t) in truth.iter().enumerate() {
        let at: Vec<f64> = reps.iter().map(|p| p[j]).collect();
        let (mean, sd) = mean_sd(&at);
        bias2 += (mean - t).powi(2);
        variance += sd * sd;
    }
    ToySchemeStats {
        scheme,
        mse_per_rep,
        mse_mean,
        mse_sd,
        bias2: bias2 / m,
        variance: variance / m,
    }
}
