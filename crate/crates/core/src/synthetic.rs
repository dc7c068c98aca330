//! Data models with known conditional means.
//!
//! Every model can evaluate `eta(x)` exactly, so MSE and Regret of an
//! estimator can be measured against the truth instead of against noisy
//! responses.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::estimator::threshold;

pub trait SyntheticModel: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn d(&self) -> usize;

    fn task(&self) -> Task;

    /// `n` draws from the marginal of `X`, row-major.
    fn sample_x(&self, rng: &mut dyn RngCore, n: usize) -> Vec<f64>;

    /// `n` labelled training points.
    fn sample(&self, rng: &mut dyn RngCore, n: usize) -> Result<Dataset>;

    /// `E[Y | X = x]`, which is `P(Y = 1 | X = x)` for classification.
    fn eta(&self, x: &[f64]) -> f64;

    /// The Bayes classifier `1{eta(x) > 1/2}`.
    fn bayes_label(&self, x: &[f64]) -> u8 {
        threshold(self.eta(x))
    }

    /// Standard deviation of the regression noise at `x`.
    fn noise_sigma(&self, _x: &[f64]) -> f64 {
        0.0
    }
}

fn check_d(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidSpec("model dimension must be at least 1".into()));
    }
    Ok(())
}

/// `1 / (1 + e^-z)` without overflow.
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Uniform `X` on `[-1, 1]^d`, `eta(x) = e^{x.w} / (e^{x.w} + e^{-x.w})` with
/// `w_i = i - d/2 - 1/2`, and unit Gaussian noise.
#[derive(Debug, Clone)]
pub struct RegressionModel {
    w: Vec<f64>,
}

pub fn regression_model(d: usize) -> Result<RegressionModel> {
    check_d(d)?;
    let w = (1..=d).map(|i| i as f64 - d as f64 / 2.0 - 0.5).collect();
    Ok(RegressionModel { w })
}

impl RegressionModel {
    pub fn weights(&self) -> &[f64] {
        &self.w
    }
}

impl SyntheticModel for RegressionModel {
    fn name(&self) -> String {
        format!("regression(d={})", self.w.len())
    }

    fn d(&self) -> usize {
        self.w.len()
    }

    fn task(&self) -> Task {
        Task::Regression
    }

    fn sample_x(&self, rng: &mut dyn RngCore, n: usize) -> Vec<f64> {
        (0..n * self.d()).map(|_| rng.random_range(-1.0..=1.0)).collect()
    }

    fn sample(&self, rng: &mut dyn RngCore, n: usize) -> Result<Dataset> {
        let points = self.sample_x(rng, n);
        let responses = points
            .chunks_exact(self.d())
            .map(|x| {
                let eps: f64 = StandardNormal.sample(rng);
                self.eta(x) + eps
            })
            .collect();
        Dataset::new(points, self.d(), responses, Task::Regression)
    }

    fn eta(&self, x: &[f64]) -> f64 {
        let s: f64 = x.iter().zip(&self.w).map(|(a, b)| a * b).sum();
        logistic(2.0 * s)
    }

    fn noise_sigma(&self, _x: &[f64]) -> f64 {
        1.0
    }
}

fn cauchy_sample(rng: &mut dyn RngCore) -> f64 {
    let u: f64 = rng.random();
    (PI * (u - 0.5)).tan()
}

fn laplace_sample(rng: &mut dyn RngCore) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    -u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

fn cauchy_log_pdf(t: f64) -> f64 {
    -(PI * (1.0 + t * t)).ln()
}

fn laplace_log_pdf(t: f64) -> f64 {
    -t.abs() - std::f64::consts::LN_2
}

/// Draws `(x, y)` with `P(Y = 1) = 1/2`, `X | Y=0 ~ P1`, `X | Y=1 ~ P2`.
fn sample_two_class(
    d: usize,
    rng: &mut dyn RngCore,
    n: usize,
    mut draw: impl FnMut(u8, usize, &mut dyn RngCore) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut points = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let y = u8::from(rng.random::<f64>() < 0.5);
        for j in 0..d {
            points.push(draw(y, j, rng));
        }
        labels.push(f64::from(y));
    }
    (points, labels)
}

/// Two classes centered at the origin: every coordinate of `P1` is standard
/// Cauchy; `P2` has standard Cauchy in its first `floor(d/2)` coordinates and
/// standard Laplace in the rest. Equal priors.
#[derive(Debug, Clone)]
pub struct CauchyLaplaceModel {
    d: usize,
}

pub fn classification_model_1(d: usize) -> Result<CauchyLaplaceModel> {
    check_d(d)?;
    Ok(CauchyLaplaceModel { d })
}

impl CauchyLaplaceModel {
    fn shared(&self) -> usize {
        self.d / 2
    }
}

impl SyntheticModel for CauchyLaplaceModel {
    fn name(&self) -> String {
        format!("cauchy_laplace(d={})", self.d)
    }

    fn d(&self) -> usize {
        self.d
    }

    fn task(&self) -> Task {
        Task::Classification
    }

    fn sample_x(&self, rng: &mut dyn RngCore, n: usize) -> Vec<f64> {
        self.sample(rng, n).map(|ds| ds.points().to_vec()).expect("finite draws")
    }

    fn sample(&self, rng: &mut dyn RngCore, n: usize) -> Result<Dataset> {
        let shared = self.shared();
        let (points, labels) = sample_two_class(self.d, rng, n, |y, j, rng| {
            if y == 0 || j < shared {
                cauchy_sample(rng)
            } else {
                laplace_sample(rng)
            }
        });
        Dataset::new(points, self.d, labels, Task::Classification)
    }

    fn eta(&self, x: &[f64]) -> f64 {
        // The shared Cauchy coordinates cancel in the density ratio.
        let log_ratio: f64 = x[self.shared()..]
            .iter()
            .map(|&t| laplace_log_pdf(t) - cauchy_log_pdf(t))
            .sum();
        logistic(log_ratio)
    }
}

/// Whether the second parameter of `N(mean, s)` is a variance or a standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureScale {
    #[default]
    Variance,
    StdDev,
}

/// Multi-modal classes: each coordinate of `P1` is `N(0,1)/2 + N(3,4)/2` and
/// each coordinate of `P2` is `N(1.5,1)/2 + N(4.5,4)/2`. Equal priors.
#[derive(Debug, Clone)]
pub struct GaussianMixtureModel {
    d: usize,
    wide_sd: f64,
}

pub fn classification_model_2(d: usize) -> Result<GaussianMixtureModel> {
    classification_model_2_with(d, MixtureScale::Variance)
}

pub fn classification_model_2_with(d: usize, scale: MixtureScale) -> Result<GaussianMixtureModel> {
    check_d(d)?;
    let wide_sd = match scale {
        MixtureScale::Variance => 2.0,
        MixtureScale::StdDev => 4.0,
    };
    Ok(GaussianMixtureModel { d, wide_sd })
}

fn normal_pdf(t: f64, mean: f64, sd: f64) -> f64 {
    let z = (t - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}

impl GaussianMixtureModel {
    /// Per-coordinate density of `P1` (`class = 0`) or `P2` (`class = 1`).
    pub fn coordinate_pdf(&self, class: u8, t: f64) -> f64 {
        let shift = if class == 0 { 0.0 } else { 1.5 };
        0.5 * normal_pdf(t, shift, 1.0) + 0.5 * normal_pdf(t, shift + 3.0, self.wide_sd)
    }
}

impl SyntheticModel for GaussianMixtureModel {
    fn name(&self) -> String {
        format!("gaussian_mixture(d={}, wide_sd={})", self.d, self.wide_sd)
    }

    fn d(&self) -> usize {
        self.d
    }

    fn task(&self) -> Task {
        Task::Classification
    }

    fn sample_x(&self, rng: &mut dyn RngCore, n: usize) -> Vec<f64> {
        self.sample(rng, n).map(|ds| ds.points().to_vec()).expect("finite draws")
    }

    fn sample(&self, rng: &mut dyn RngCore, n: usize) -> Result<Dataset> {
        let wide = self.wide_sd;
        let (points, labels) = sample_two_class(self.d, rng, n, |y, _, rng| {
            let shift = if y == 0 { 0.0 } else { 1.5 };
            let z: f64 = StandardNormal.sample(rng);
            if rng.random::<f64>() < 0.5 {
                shift + z
            } else {
                shift + 3.0 + wide * z
            }
        });
        Dataset::new(points, self.d, labels, Task::Classification)
    }

    fn eta(&self, x: &[f64]) -> f64 {
        let log_ratio: f64 = x
            .iter()
            .map(|&t| self.coordinate_pdf(1, t).ln() - self.coordinate_pdf(0, t).ln())
            .sum();
        logistic(log_ratio)
    }
}

/// Fixed-design one-dimensional models on the grid `x = -5, -4, ..., 25`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyModel {
    /// `y = eps`.
    PureNoise,
    /// `y = x^2`, noiseless.
    Quadratic,
    /// `y = (x - 10)^2 / 8 + 5 eps`.
    ShiftedQuadratic,
}

pub fn toy_models() -> [ToyModel; 3] {
    [ToyModel::PureNoise, ToyModel::Quadratic, ToyModel::ShiftedQuadratic]
}

impl ToyModel {
    pub const DESIGN_START: i32 = -5;
    pub const DESIGN_END: i32 = 25;
    /// Evaluation window free of boundary effects for `k = 10`.
    pub const INTERIOR: (f64, f64) = (0.0, 20.0);

    pub fn id(self) -> u8 {
        match self {
            ToyModel::PureNoise => 1,
            ToyModel::Quadratic => 2,
            ToyModel::ShiftedQuadratic => 3,
        }
    }

    pub fn design() -> Vec<f64> {
        (Self::DESIGN_START..=Self::DESIGN_END).map(f64::from).collect()
    }

    fn sigma(self) -> f64 {
        match self {
            ToyModel::PureNoise => 1.0,
            ToyModel::Quadratic => 0.0,
            ToyModel::ShiftedQuadratic => 5.0,
        }
    }
}

impl SyntheticModel for ToyModel {
    fn name(&self) -> String {
        format!("toy{}", self.id())
    }

    fn d(&self) -> usize {
        1
    }

    fn task(&self) -> Task {
        Task::Regression
    }

    /// Uniform draws over the interior window.
    fn sample_x(&self, rng: &mut dyn RngCore, n: usize) -> Vec<f64> {
        let (a, b) = Self::INTERIOR;
        (0..n).map(|_| rng.random_range(a..=b)).collect()
    }

    /// The fixed design with fresh noise; `n` is ignored.
    fn sample(&self, rng: &mut dyn RngCore, _n: usize) -> Result<Dataset> {
        let xs = Self::design();
        let sigma = self.sigma();
        let ys = xs
            .iter()
            .map(|&x| {
                let eps: f64 = StandardNormal.sample(rng);
                self.eta(&[x]) + sigma * eps
            })
            .collect();
        Dataset::new(xs, 1, ys, Task::Regression)
    }

    fn eta(&self, x: &[f64]) -> f64 {
        let t = x[0];
        match self {
            ToyModel::PureNoise => 0.0,
            ToyModel::Quadratic => t * t,
            ToyModel::ShiftedQuadratic => (t - 10.0).powi(2) / 8.0,
        }
    }

    fn noise_sigma(&self, _x: &[f64]) -> f64 {
        self.sigma()
    }
}

/// Serializable description of a model, used by experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Regression {
        d: usize,
    },
    #[serde(rename = "classification_1")]
    CauchyLaplace {
        d: usize,
    },
    #[serde(rename = "classification_2")]
    GaussianMixture {
        d: usize,
        #[serde(default)]
        scale: MixtureScale,
    },
}

impl ModelSpec {
    pub fn d(&self) -> usize {
        match *self {
            ModelSpec::Regression { d } | ModelSpec::CauchyLaplace { d } | ModelSpec::GaussianMixture { d, .. } => d,
        }
    }

    pub fn build(&self) -> Result<Box<dyn SyntheticModel>> {
        Ok(match *self {
            ModelSpec::Regression { d } => Box::new(regression_model(d)?),
            ModelSpec::CauchyLaplace { d } => Box::new(classification_model_1(d)?),
            ModelSpec::GaussianMixture { d, scale } => Box::new(classification_model_2_with(d, scale)?),
        })
    }
}
