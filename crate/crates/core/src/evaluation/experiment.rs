//! Interpolated-NN over k-NN risk ratios on simulated data.
//!
//! Each repetition draws fresh training data, an independent tuning set and
//! an evaluation set, and records the criterion for every `(gamma, k)` pair
//! of the grids from a single neighbor query per point. `k` is then chosen
//! from the tuning sets pooled over repetitions, and the per-repetition
//! ratio against k-NN is averaged.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::estimator::{power_scores_all_k, threshold};
use crate::metric::Metric;
use crate::neighbors::KdIndex;
use crate::synthetic::{ModelSpec, SyntheticModel};
use crate::theory;

use super::metrics::{regret_term, require_positive};
use super::seeds::stream_rng;
use super::stats::{argmin, mean_sd, ratio};

/// How `k` is picked for each interpolation level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KPolicy {
    /// Every `gamma` uses the `k` that is best for k-NN.
    #[default]
    SharedOptimalAtGammaZero,
    /// Every `gamma` uses its own best `k`.
    OptimalPerGamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Mse,
    Regret,
    Cis,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Mse => "mse",
            Criterion::Regret => "regret",
            Criterion::Cis => "cis",
        }
    }

    /// Closed-form large-sample ratio for this criterion under `policy`.
    pub fn theory_ratio(self, policy: KPolicy, d: usize, gamma: f64) -> Result<f64> {
        match (self, policy) {
            (Criterion::Cis, KPolicy::SharedOptimalAtGammaZero) => theory::cis_ratio_same_k(d, gamma),
            (Criterion::Cis, KPolicy::OptimalPerGamma) => theory::cis_ratio_optimal_k(d, gamma),
            (_, KPolicy::SharedOptimalAtGammaZero) => theory::pr_same_k(d, gamma),
            (_, KPolicy::OptimalPerGamma) => theory::pr_optimal_k(d, gamma),
        }
    }
}

fn default_n_train() -> usize {
    2048
}
fn default_n_test() -> usize {
    5000
}
fn default_repetitions() -> usize {
    100
}
pub fn default_gamma_grid() -> Vec<f64> {
    vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35]
}
/// Odd values only, so a k-NN vote can never tie: every odd `k` below 32,
/// then steps of 4 up to 128, 16 up to 512 and 32 up to 1024.
pub fn default_k_grid() -> Vec<usize> {
    (1..32)
        .step_by(2)
        .chain((35..128).step_by(4))
        .chain((143..512).step_by(16))
        .chain((543..1024).step_by(32))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub model: ModelSpec,
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    /// Size of the independent set on which `k` is tuned.
    #[serde(default = "default_n_test")]
    pub n_tune: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Interpolation levels as fractions `gamma / d`.
    #[serde(default = "default_gamma_grid")]
    pub gamma_grid: Vec<f64>,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<usize>,
    #[serde(default)]
    pub k_policy: KPolicy,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn new(model: ModelSpec) -> Self {
        Self {
            model,
            n_train: default_n_train(),
            n_test: default_n_test(),
            n_tune: default_n_test(),
            repetitions: default_repetitions(),
            gamma_grid: default_gamma_grid(),
            k_grid: default_k_grid(),
            k_policy: KPolicy::default(),
            metric: Metric::default(),
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive(self.repetitions, "repetitions")?;
        require_positive(self.n_test, "n_test")?;
        require_positive(self.n_tune, "n_tune")?;
        validate_gamma_fractions(&self.gamma_grid)?;
        validate_k_grid(&self.k_grid, self.n_train)?;
        Ok(())
    }
}

pub(crate) fn validate_gamma_fractions(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &g in grid {
        if !(0.0..0.5).contains(&g) {
            return Err(Error::InvalidSpec(format!("gamma/d = {g} must lie in [0, 0.5)")));
        }
    }
    if !grid.contains(&0.0) {
        return Err(Error::InvalidSpec("gamma grid must include 0".into()));
    }
    Ok(())
}

pub(crate) fn validate_k_grid(grid: &[usize], n_train: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &k in grid {
        if k == 0 {
            return Err(Error::ZeroK);
        }
        if k >= n_train {
            return Err(Error::KTooLarge { k, n: n_train });
        }
    }
    Ok(())
}

pub(crate) fn sorted_unique(grid: &[usize]) -> Vec<usize> {
    let mut ks = grid.to_vec();
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// Criterion sums over a point set for every `(gamma, k)`, laid out `g * ks.len() + ki`.
pub(crate) struct GridTables {
    pub primary: Vec<f64>,
    pub cis: Option<Vec<f64>>,
}

/// Scores every point of `xs` under every `(gamma, k)` and averages the
/// criterion. With a second training set, the instability between the two
/// fits is recorded as well. Regret and MSE use the first set only.
pub(crate) fn grid_tables(
    model: &dyn SyntheticModel,
    first: (&KdIndex, &Dataset),
    second: Option<(&KdIndex, &Dataset)>,
    xs: &[f64],
    gammas: &[f64],
    ks: &[usize],
) -> GridTables {
    let d = model.d();
    let k_max = *ks.last().expect("non-empty k grid");
    let width = ks.len();
    let mut primary = vec![0.0; gammas.len() * width];
    let mut cis = second.map(|_| vec![0.0; gammas.len() * width]);
    let mut buf1 = vec![0.0; gammas.len() * k_max];
    let mut buf2 = vec![0.0; gammas.len() * k_max];
    let classification = model.task() == Task::Classification;
    for x in xs.chunks_exact(d) {
        let eta = model.eta(x);
        let nb = first.0.nearest(x, k_max);
        power_scores_all_k(&nb, first.1.responses(), gammas, k_max, &mut buf1);
        if let Some((index, ds)) = second {
            let nb = index.nearest(x, k_max);
            power_scores_all_k(&nb, ds.responses(), gammas, k_max, &mut buf2);
        }
        for g in 0..gammas.len() {
            for (ki, &k) in ks.iter().enumerate() {
                let s = buf1[g * k_max + k - 1];
                let cell = g * width + ki;
                if classification {
                    let label = threshold(s);
                    primary[cell] += regret_term(eta, label);
                    if let Some(c) = cis.as_mut() {
                        if label != threshold(buf2[g * k_max + k - 1]) {
                            c[cell] += 1.0;
                        }
                    }
                } else {
                    primary[cell] += (s - eta).powi(2);
                }
            }
        }
    }
    let n = (xs.len() / d) as f64;
    primary.iter_mut().for_each(|v| *v /= n);
    if let Some(c) = cis.as_mut() {
        c.iter_mut().for_each(|v| *v /= n);
    }
    GridTables { primary, cis }
}

/// Returns the element of `k_grid` minimizing MSE (regression) or Regret
/// (classification) of the `gamma`-scheme on an independent tuning set.
/// Ties go to the smaller `k`.
pub fn tune_k(
    model: &dyn SyntheticModel,
    gamma: f64,
    k_grid: &[usize],
    n_train: usize,
    n_tune: usize,
    metric: Metric,
    rng: &mut dyn rand::RngCore,
) -> Result<usize> {
    validate_k_grid(k_grid, n_train)?;
    require_positive(n_tune, "n_tune")?;
    if !(gamma >= 0.0) {
        return Err(Error::NegativeGamma(gamma));
    }
    let ks = sorted_unique(k_grid);
    let train = model.sample(rng, n_train)?;
    let index = KdIndex::build(&train, metric);
    let xs = model.sample_x(rng, n_tune);
    let tables = grid_tables(model, (&index, &train), None, &xs, &[gamma], &ks);
    Ok(ks[argmin(&tables.primary)])
}

/// Raw per-repetition criterion tables from which either policy can be summarized.
#[derive(Debug, Clone)]
pub struct RatioTables {
    pub model: String,
    pub d: usize,
    pub gamma_over_d: Vec<f64>,
    pub ks: Vec<usize>,
    pub criteria: Vec<Criterion>,
    /// Tuning-set value of the first criterion, `[rep][g * ks.len() + ki]`.
    pub tune: Vec<Vec<f64>>,
    /// Evaluation-set values, `[criterion][rep][g * ks.len() + ki]`.
    pub eval: Vec<Vec<Vec<f64>>>,
}

struct RepTables {
    tune: Vec<f64>,
    eval: Vec<Vec<f64>>,
}

fn run_repetition(spec: &ExperimentSpec, model: &dyn SyntheticModel, ks: &[usize], rep: usize) -> Result<RepTables> {
    let d = model.d() as f64;
    let gammas: Vec<f64> = spec.gamma_grid.iter().map(|f| f * d).collect();
    let mut rng = stream_rng(spec.master_seed, rep as u64);
    let first = model.sample(&mut rng, spec.n_train)?;
    let second = match model.task() {
        Task::Classification => Some(model.sample(&mut rng, spec.n_train)?),
        Task::Regression => None,
    };
    let tune_x = model.sample_x(&mut rng, spec.n_tune);
    let eval_x = model.sample_x(&mut rng, spec.n_test);

    let first_index = KdIndex::build(&first, spec.metric);
    let second_index = second.as_ref().map(|ds| KdIndex::build(ds, spec.metric));
    let tune = grid_tables(model, (&first_index, &first), None, &tune_x, &gammas, ks).primary;
    let pair = second_index.as_ref().zip(second.as_ref());
    let eval = grid_tables(model, (&first_index, &first), pair, &eval_x, &gammas, ks);
    let mut out = vec![eval.primary];
    out.extend(eval.cis);
    Ok(RepTables { tune, eval: out })
}

/// Runs all repetitions (in parallel on the current rayon pool) and keeps
/// the full `(gamma, k)` tables.
pub fn collect_ratio_tables(spec: &ExperimentSpec) -> Result<RatioTables> {
    spec.validate()?;
    let model = spec.model.build()?;
    let ks = sorted_unique(&spec.k_grid);
    let reps: Vec<RepTables> = (0..spec.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(spec, model.as_ref(), &ks, rep))
        .collect::<Result<_>>()?;
    let criteria = match model.task() {
        Task::Regression => vec![Criterion::Mse],
        Task::Classification => vec![Criterion::Regret, Criterion::Cis],
    };
    let mut eval = vec![Vec::with_capacity(reps.len()); criteria.len()];
    let mut tune = Vec::with_capacity(reps.len());
    for rep in reps {
        tune.push(rep.tune);
        for (c, table) in rep.eval.into_iter().enumerate() {
            eval[c].push(table);
        }
    }
    Ok(RatioTables {
        model: model.name(),
        d: model.d(),
        gamma_over_d: spec.gamma_grid.clone(),
        ks,
        criteria,
        tune,
        eval,
    })
}

/// One output row per interpolation level.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub gamma_over_d: f64,
    pub k_used: usize,
    pub criterion_mean: f64,
    pub criterion_sd: f64,
    pub ratio_mean: f64,
    pub ratio_sd: f64,
    pub theory_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionCurve {
    pub criterion: Criterion,
    pub rows: Vec<RatioRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub model: String,
    pub d: usize,
    pub policy: KPolicy,
    /// MSE for regression; Regret then CIS for classification.
    pub curves: Vec<CriterionCurve>,
}

impl ExperimentResult {
    pub fn curve(&self, criterion: Criterion) -> Option<&CriterionCurve> {
        self.curves.iter().find(|c| c.criterion == criterion)
    }
}

impl RatioTables {
    fn mean_tune(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.tune[0].len()];
        for rep in &self.tune {
            for (m, v) in mean.iter_mut().zip(rep) {
                *m += v;
            }
        }
        let n = self.tune.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Index into `ks` chosen for every gamma under `policy`.
    pub fn chosen_k(&self, policy: KPolicy) -> Vec<usize> {
        let width = self.ks.len();
        let mean = self.mean_tune();
        let g0 = self.zero_index();
        let k0 = argmin(&mean[g0 * width..(g0 + 1) * width]);
        (0..self.gamma_over_d.len())
            .map(|g| match policy {
                KPolicy::SharedOptimalAtGammaZero => k0,
                KPolicy::OptimalPerGamma => argmin(&mean[g * width..(g + 1) * width]),
            })
            .collect()
    }

    fn zero_index(&self) -> usize {
        self.gamma_over_d.iter().position(|&g| g == 0.0).expect("validated grid contains 0")
    }

    pub fn summarize(&self, policy: KPolicy) -> Result<ExperimentResult> {
        let width = self.ks.len();
        let chosen = self.chosen_k(policy);
        let g0 = self.zero_index();
        let mut curves = Vec::with_capacity(self.criteria.len());
        for (c, &criterion) in self.criteria.iter().enumerate() {
            let tables = &self.eval[c];
            let base: Vec<f64> = tables.iter().map(|t| t[g0 * width + chosen[g0]]).collect();
            let mut rows = Vec::with_capacity(self.gamma_over_d.len());
            for (g, &frac) in self.gamma_over_d.iter().enumerate() {
                let values: Vec<f64> = tables.iter().map(|t| t[g * width + chosen[g]]).collect();
                let ratios: Vec<f64> = values.iter().zip(&base).map(|(v, b)| ratio(*v, *b)).collect();
                let (criterion_mean, criterion_sd) = mean_sd(&values);
                let (ratio_mean, ratio_sd) = mean_sd(&ratios);
                rows.push(RatioRow {
                    gamma_over_d: frac,
                    k_used: self.ks[chosen[g]],
                    criterion_mean,
                    criterion_sd,
                    ratio_mean,
                    ratio_sd,
                    theory_ratio: criterion.theory_ratio(policy, self.d, frac * self.d as f64)?,
                });
            }
            curves.push(CriterionCurve { criterion, rows });
        }
        Ok(ExperimentResult {
            model: self.model.clone(),
            d: self.d,
            policy,
            curves,
        })
    }
}

/// Full ratio experiment under `spec.k_policy`.
pub fn run_ratio_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    collect_ratio_tables(spec)?.summarize(spec.k_policy)
}
