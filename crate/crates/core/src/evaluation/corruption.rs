//! Test-time corruption inside an `L2` ball and the Regret it causes.
//!
//! Both attacks search a finite candidate set instead of the whole ball:
//! `candidate_budget` uniform draws from `B(x, omega)` plus `x` itself, and
//! for the white-box attack also every training point inside the ball whose
//! label disagrees with the Bayes label of `x`. An interpolating estimator
//! reproduces the label of such a point exactly, so reaching it flips the
//! prediction.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::estimator::{power_scores_all_k, threshold, FittedEstimator};
use crate::metric::Metric;
use crate::neighbors::KdIndex;
use crate::synthetic::{ModelSpec, MixtureScale, SyntheticModel};

use super::experiment::validate_gamma_fractions;
use super::metrics::{regret_term, require_positive, require_task};
use super::seeds::stream_rng;
use super::stats::{mean_sd, ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    RandomPerturbation,
    BlackBox,
    WhiteBox,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 3] = [
        CorruptionKind::RandomPerturbation,
        CorruptionKind::BlackBox,
        CorruptionKind::WhiteBox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorruptionKind::RandomPerturbation => "random",
            CorruptionKind::BlackBox => "black_box",
            CorruptionKind::WhiteBox => "white_box",
        }
    }
}

fn default_budget() -> usize {
    64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    /// Radius of the `L2` ball.
    pub omega: f64,
    #[serde(default = "default_budget")]
    pub candidate_budget: usize,
}

impl CorruptionSpec {
    pub fn new(kind: CorruptionKind, omega: f64) -> Self {
        Self {
            kind,
            omega,
            candidate_budget: default_budget(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_omega(self.omega)?;
        require_positive(self.candidate_budget, "candidate_budget")
    }
}

fn validate_omega(omega: f64) -> Result<()> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::InvalidSpec(format!("omega = {omega} must be finite and >= 0")));
    }
    Ok(())
}

/// What an attack may look at.
#[derive(Debug, Clone, Copy, Default)]
pub struct AttackContext<'a> {
    /// `eta(x)` at the clean point; its side of 1/2 sets the attack direction.
    pub eta_x: Option<f64>,
    /// The attacked estimator (white-box).
    pub target: Option<&'a FittedEstimator>,
    /// An estimator trained on independent data (black-box).
    pub surrogate: Option<&'a FittedEstimator>,
}

/// Uniform draw from the `L2` ball of radius `omega` around `x`.
pub fn ball_sample(x: &[f64], omega: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    let d = x.len();
    let mut dir = vec![0.0; d];
    let norm = loop {
        for v in dir.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            break norm;
        }
    };
    let u: f64 = rng.random();
    let r = omega * u.powf(1.0 / d as f64) / norm;
    x.iter().zip(&dir).map(|(a, b)| a + r * b).collect()
}

/// Position of the best score in the adversarial direction, first on ties.
fn adversarial_pick(scores: impl IntoIterator<Item = f64>, maximize: bool) -> usize {
    let mut best = 0;
    let mut best_score = f64::NAN;
    for (i, s) in scores.into_iter().enumerate() {
        let better = if maximize { s > best_score } else { s < best_score };
        if i == 0 || better {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Training points within `omega` (in `L2`) of `x` whose label is not `bayes`.
fn opposite_points(est: &FittedEstimator, x: &[f64], omega: f64, bayes: u8) -> Vec<usize> {
    let ds = est.dataset();
    est.index()
        .within_radius(x, omega, Metric::euclidean())
        .into_iter()
        .filter(|&i| threshold(ds.response(i)) != bayes)
        .collect()
}

/// A corrupted version of `x`. `omega = 0` returns `x` unchanged.
///
/// Attacks push the score up when `eta(x) <= 1/2` and down otherwise.
pub fn corrupt(x: &[f64], spec: &CorruptionSpec, ctx: &AttackContext<'_>, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
    spec.validate()?;
    if spec.omega == 0.0 {
        return Ok(x.to_vec());
    }
    if spec.kind == CorruptionKind::RandomPerturbation {
        return Ok(ball_sample(x, spec.omega, rng));
    }
    let eta = ctx.eta_x.ok_or(Error::MissingContext("eta_x"))?;
    let bayes = threshold(eta);
    let maximize = bayes == 0;
    let scorer = match spec.kind {
        CorruptionKind::BlackBox => ctx.surrogate.ok_or(Error::MissingContext("surrogate"))?,
        _ => ctx.target.ok_or(Error::MissingContext("target"))?,
    };
    let mut candidates = Vec::new();
    if spec.kind == CorruptionKind::WhiteBox {
        for i in opposite_points(scorer, x, spec.omega, bayes) {
            candidates.push(scorer.dataset().point(i).to_vec());
        }
    }
    for _ in 0..spec.candidate_budget {
        candidates.push(ball_sample(x, spec.omega, rng));
    }
    candidates.push(x.to_vec());
    let scores = candidates.iter().map(|c| scorer.score(c)).collect::<Result<Vec<_>>>()?;
    let pick = adversarial_pick(scores, maximize);
    Ok(candidates.swap_remove(pick))
}

/// Regret of `est` when every test point is corrupted before prediction;
/// `eta`, the Bayes label and the weight `|2 eta - 1|` stay at the clean point.
///
/// With the same `rng` state and `omega = 0` this equals
/// [`estimate_regret`](super::metrics::estimate_regret) exactly.
pub fn estimate_corrupted_regret(
    est: &FittedEstimator,
    model: &dyn SyntheticModel,
    spec: &CorruptionSpec,
    surrogate: Option<&FittedEstimator>,
    n_test: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    require_task(model.task(), Task::Classification)?;
    require_positive(n_test, "n_test")?;
    spec.validate()?;
    let xs = model.sample_x(rng, n_test);
    let attack_seed: u64 = rng.random();
    let mut total = 0.0;
    for (i, x) in xs.chunks_exact(model.d()).enumerate() {
        let eta = model.eta(x);
        let ctx = AttackContext {
            eta_x: Some(eta),
            target: Some(est),
            surrogate,
        };
        let z = corrupt(x, spec, &ctx, &mut stream_rng(attack_seed, i as u64))?;
        total += regret_term(eta, est.predict_class(&z)?.label);
    }
    Ok(total / n_test as f64)
}

fn default_attack_model() -> ModelSpec {
    ModelSpec::GaussianMixture {
        d: 2,
        scale: MixtureScale::Variance,
    }
}
fn default_n_train() -> usize {
    2048
}
fn default_n_test() -> usize {
    1000
}
fn default_repetitions() -> usize {
    50
}
fn default_k() -> usize {
    41
}
fn default_gamma_grid() -> Vec<f64> {
    vec![0.0, 0.1, 0.2, 0.3]
}
fn default_omega_grid() -> Vec<f64> {
    vec![0.0, 0.02, 0.05, 0.1]
}
fn default_kinds() -> Vec<CorruptionKind> {
    CorruptionKind::ALL.to_vec()
}

/// Corrupted-Regret experiment over a grid of `(kind, omega, gamma)` with a fixed `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    #[serde(default = "default_attack_model")]
    pub model: ModelSpec,
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_gamma_grid")]
    pub gamma_grid: Vec<f64>,
    #[serde(default = "default_omega_grid")]
    pub omega_grid: Vec<f64>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<CorruptionKind>,
    #[serde(default = "default_budget")]
    pub candidate_budget: usize,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub master_seed: u64,
}

impl Default for AttackSpec {
    fn default() -> Self {
        Self {
            model: default_attack_model(),
            n_train: default_n_train(),
            n_test: default_n_test(),
            repetitions: default_repetitions(),
            k: default_k(),
            gamma_grid: default_gamma_grid(),
            omega_grid: default_omega_grid(),
            kinds: default_kinds(),
            candidate_budget: default_budget(),
            metric: Metric::default(),
            master_seed: 0,
        }
    }
}

impl AttackSpec {
    pub fn validate(&self) -> Result<()> {
        require_positive(self.repetitions, "repetitions")?;
        require_positive(self.n_test, "n_test")?;
        require_positive(self.candidate_budget, "candidate_budget")?;
        validate_gamma_fractions(&self.gamma_grid)?;
        if self.omega_grid.is_empty() || self.kinds.is_empty() {
            return Err(Error::EmptyGrid);
        }
        for &w in &self.omega_grid {
            validate_omega(w)?;
        }
        if self.k == 0 {
            return Err(Error::ZeroK);
        }
        if self.k >= self.n_train {
            return Err(Error::KTooLarge {
                k: self.k,
                n: self.n_train,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackRow {
    pub kind: CorruptionKind,
    pub omega: f64,
    pub gamma_over_d: f64,
    pub regret_mean: f64,
    pub regret_sd: f64,
    /// Mean over repetitions of Regret at this `gamma` over Regret at `gamma = 0`.
    pub ratio_mean: f64,
    pub ratio_sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    pub model: String,
    pub d: usize,
    pub k: usize,
    /// Ordered by kind, then omega, then gamma, following the grid order of the `AttackSpec`.
    pub rows: Vec<AttackRow>,
}

impl AttackResult {
    pub fn row(&self, kind: CorruptionKind, omega: f64, gamma_over_d: f64) -> Option<&AttackRow> {
        self.rows
            .iter()
            .find(|r| r.kind == kind && r.omega == omega && r.gamma_over_d == gamma_over_d)
    }
}

struct Scorer<'a> {
    index: KdIndex,
    data: &'a Dataset,
    gammas: &'a [f64],
    k: usize,
    buf: Vec<f64>,
}

impl Scorer<'_> {
    /// Scores at `z` for every gamma, at the fixed `k`.
    fn scores(&mut self, z: &[f64]) -> Vec<f64> {
        let nb = self.index.nearest(z, self.k);
        power_scores_all_k(&nb, self.data.responses(), self.gammas, self.k, &mut self.buf);
        (0..self.gammas.len()).map(|g| self.buf[g * self.k + self.k - 1]).collect()
    }
}

/// `[kind][omega][gamma]` Regret of one repetition.
fn attack_repetition(spec: &AttackSpec, model: &dyn SyntheticModel, rep: usize) -> Result<Vec<f64>> {
    let d = model.d();
    let gammas: Vec<f64> = spec.gamma_grid.iter().map(|f| f * d as f64).collect();
    let ng = gammas.len();
    let no = spec.omega_grid.len();
    let mut rng = stream_rng(spec.master_seed, rep as u64);
    let train = model.sample(&mut rng, spec.n_train)?;
    let surrogate_train = model.sample(&mut rng, spec.n_train)?;
    let xs = model.sample_x(&mut rng, spec.n_test);
    let attack_seed: u64 = rng.random();

    let mut target = Scorer {
        index: KdIndex::build(&train, spec.metric),
        data: &train,
        gammas: &gammas,
        k: spec.k,
        buf: vec![0.0; ng * spec.k],
    };
    let knn = [0.0];
    let mut surrogate = Scorer {
        index: KdIndex::build(&surrogate_train, spec.metric),
        data: &surrogate_train,
        gammas: &knn,
        k: spec.k,
        buf: vec![0.0; spec.k],
    };

    let mut totals = vec![0.0; spec.kinds.len() * no * ng];
    for (i, x) in xs.chunks_exact(d).enumerate() {
        let eta = model.eta(x);
        let bayes = threshold(eta);
        let maximize = bayes == 0;
        let clean = target.scores(x);
        let add = |totals: &mut [f64], ki: usize, oi: usize, g: usize, s: f64| {
            totals[(ki * no + oi) * ng + g] += regret_term(eta, threshold(s));
        };
        for (oi, &omega) in spec.omega_grid.iter().enumerate() {
            if omega == 0.0 {
                for ki in 0..spec.kinds.len() {
                    for g in 0..ng {
                        add(&mut totals, ki, oi, g, clean[g]);
                    }
                }
                continue;
            }
            // Same draws for every omega and kind at this point.
            let mut point_rng = stream_rng(attack_seed, i as u64);
            let ball: Vec<Vec<f64>> = (0..spec.candidate_budget)
                .map(|_| ball_sample(x, omega, &mut point_rng))
                .collect();
            let ball_scores: Vec<Vec<f64>> = ball.iter().map(|z| target.scores(z)).collect();
            for (ki, kind) in spec.kinds.iter().enumerate() {
                match kind {
                    CorruptionKind::RandomPerturbation => {
                        for g in 0..ng {
                            add(&mut totals, ki, oi, g, ball_scores[0][g]);
                        }
                    }
                    CorruptionKind::BlackBox => {
                        let mut sur: Vec<f64> = ball.iter().map(|z| surrogate.scores(z)[0]).collect();
                        sur.push(surrogate.scores(x)[0]);
                        let pick = adversarial_pick(sur, maximize);
                        let chosen = ball_scores.get(pick).unwrap_or(&clean);
                        for g in 0..ng {
                            add(&mut totals, ki, oi, g, chosen[g]);
                        }
                    }
                    CorruptionKind::WhiteBox => {
                        let mut extra: Vec<Vec<f64>> = Vec::new();
                        for j in target.index.within_radius(x, omega, Metric::euclidean()) {
                            if threshold(train.response(j)) != bayes {
                                extra.push(target.scores(train.point(j)));
                            }
                        }
                        for g in 0..ng {
                            let all = extra.iter().chain(&ball_scores).chain(std::iter::once(&clean));
                            let pick = adversarial_pick(all.clone().map(|s| s[g]), maximize);
                            let s = all.map(|s| s[g]).nth(pick).expect("pick in range");
                            add(&mut totals, ki, oi, g, s);
                        }
                    }
                }
            }
        }
    }
    let n = spec.n_test as f64;
    totals.iter_mut().for_each(|t| *t /= n);
    Ok(totals)
}

/// Runs all repetitions (in parallel on the current rayon pool).
///
/// The target is interpolated-NN at fixed `k`; the black-box surrogate is
/// k-NN with the same `k` trained on an independent sample of the same
/// size. Within a repetition all kinds and radii share the test points and
/// the ball draws.
pub fn run_attack_experiment(spec: &AttackSpec) -> Result<AttackResult> {
    spec.validate()?;
    let model = spec.model.build()?;
    require_task(model.task(), Task::Classification)?;
    let reps: Vec<Vec<f64>> = (0..spec.repetitions)
        .into_par_iter()
        .map(|rep| attack_repetition(spec, model.as_ref(), rep))
        .collect::<Result<_>>()?;
    let ng = spec.gamma_grid.len();
    let no = spec.omega_grid.len();
    let g0 = spec.gamma_grid.iter().position(|&g| g == 0.0).expect("validated grid contains 0");
    let mut rows = Vec::new();
    for (ki, &kind) in spec.kinds.iter().enumerate() {
        for (oi, &omega) in spec.omega_grid.iter().enumerate() {
            let at = |g: usize| (ki * no + oi) * ng + g;
            for (g, &frac) in spec.gamma_grid.iter().enumerate() {
                let values: Vec<f64> = reps.iter().map(|r| r[at(g)]).collect();
                let ratios: Vec<f64> = reps.iter().map(|r| ratio(r[at(g)], r[at(g0)])).collect();
                let (regret_mean, regret_sd) = mean_sd(&values);
                let (ratio_mean, ratio_sd) = mean_sd(&ratios);
                rows.push(AttackRow {
                    kind,
                    omega,
                    gamma_over_d: frac,
                    regret_mean,
                    regret_sd,
                    ratio_mean,
                    ratio_sd,
                });
            }
        }
    }
    Ok(AttackResult {
        model: model.name(),
        d: model.d(),
        k: spec.k,
        rows,
    })
}
