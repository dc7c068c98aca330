//! Risk estimates against the exact `eta` of a synthetic model.

use rand::RngCore;

use crate::config::EstimatorConfig;
use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::estimator::{threshold, FittedEstimator};
use crate::synthetic::SyntheticModel;

pub(crate) fn require_task(found: Task, expected: Task) -> Result<()> {
    if found != expected {
        return Err(Error::TaskMismatch {
            expected: expected.name(),
            found: found.name(),
        });
    }
    Ok(())
}

pub(crate) fn require_positive(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSpec(format!("{what} must be at least 1")));
    }
    Ok(())
}

/// Regret contribution `|2 eta - 1| 1{label != g}` of one test point.
#[inline]
pub fn regret_term(eta: f64, label: u8) -> f64 {
    if label != threshold(eta) {
        (2.0 * eta - 1.0).abs()
    } else {
        0.0
    }
}

/// Mean of `(eta_hat(X) - eta(X))^2` over `n_test` fresh draws of `X`.
pub fn estimate_mse(est: &FittedEstimator, model: &dyn SyntheticModel, n_test: usize, rng: &mut dyn RngCore) -> Result<f64> {
    require_task(model.task(), Task::Regression)?;
    require_positive(n_test, "n_test")?;
    let d = model.d();
    let xs = model.sample_x(rng, n_test);
    let mut total = 0.0;
    for x in xs.chunks_exact(d) {
        let e = est.predict_regression(x)? - model.eta(x);
        total += e * e;
    }
    Ok(total / n_test as f64)
}

/// Mean of `|2 eta(X) - 1| 1{g_hat(X) != g(X)}` over `n_test` fresh draws.
pub fn estimate_regret(est: &FittedEstimator, model: &dyn SyntheticModel, n_test: usize, rng: &mut dyn RngCore) -> Result<f64> {
    require_task(model.task(), Task::Classification)?;
    require_positive(n_test, "n_test")?;
    let xs = model.sample_x(rng, n_test);
    let mut total = 0.0;
    for x in xs.chunks_exact(model.d()) {
        total += regret_term(model.eta(x), est.predict_class(x)?.label);
    }
    Ok(total / n_test as f64)
}

/// Share of `n_test` fresh points on which two fitted classifiers disagree.
pub fn estimate_cis_between(
    a: &FittedEstimator,
    b: &FittedEstimator,
    model: &dyn SyntheticModel,
    n_test: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    require_task(model.task(), Task::Classification)?;
    require_positive(n_test, "n_test")?;
    let xs = model.sample_x(rng, n_test);
    let mut differ = 0usize;
    for x in xs.chunks_exact(model.d()) {
        if a.predict_class(x)?.label != b.predict_class(x)?.label {
            differ += 1;
        }
    }
    Ok(differ as f64 / n_test as f64)
}

/// Classification instability: fits `config` on two independent training
/// sets of size `n_train` and measures how often they disagree.
pub fn estimate_cis(
    config: &EstimatorConfig,
    model: &dyn SyntheticModel,
    n_train: usize,
    n_test: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    require_task(model.task(), Task::Classification)?;
    let a = FittedEstimator::fit(model.sample(rng, n_train)?, config.clone())?;
    let b = FittedEstimator::fit(model.sample(rng, n_train)?, config.clone())?;
    estimate_cis_between(&a, &b, model, n_test, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::seeds::stream_rng;
    use crate::metric::Metric;
    use crate::synthetic::{classification_model_2, regression_model};

    #[test]
    fn task_checks() {
        let reg = regression_model(2).unwrap();
        let cls = classification_model_2(2).unwrap();
        let mut rng = stream_rng(1, 0);
        let ds = reg.sample(&mut rng, 50).unwrap();
        let est = FittedEstimator::fit(ds, EstimatorConfig::new(5, 0.0, Metric::euclidean())).unwrap();
        assert!(matches!(estimate_regret(&est, &reg, 10, &mut rng), Err(Error::TaskMismatch { .. })));
        assert!(matches!(estimate_mse(&est, &cls, 10, &mut rng), Err(Error::TaskMismatch { .. })));
        assert!(estimate_mse(&est, &reg, 10, &mut rng).unwrap() >= 0.0);
    }

    #[test]
    fn same_training_data_has_zero_cis() {
        let cls = classification_model_2(2).unwrap();
        let config = EstimatorConfig::new(5, 0.5, Metric::euclidean());
        let a = FittedEstimator::fit(cls.sample(&mut stream_rng(3, 0), 200).unwrap(), config.clone()).unwrap();
        let b = FittedEstimator::fit(cls.sample(&mut stream_rng(3, 0), 200).unwrap(), config).unwrap();
        assert_eq!(estimate_cis_between(&a, &b, &cls, 500, &mut stream_rng(4, 0)).unwrap(), 0.0);
    }

    #[test]
    fn regret_term_cases() {
        assert_eq!(regret_term(0.8, 1), 0.0);
        assert!((regret_term(0.8, 0) - 0.6).abs() < 1e-15);
        assert_eq!(regret_term(0.5, 1), 0.0);
        assert_eq!(regret_term(0.5, 0), 0.0);
    }
}
