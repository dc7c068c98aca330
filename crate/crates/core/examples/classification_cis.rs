//! Regret and classification instability of interpolated-NN classifiers.

use interpnn::evaluation::{estimate_cis, estimate_regret, stream_rng};
use interpnn::synthetic::{classification_model_2, SyntheticModel};
use interpnn::{EstimatorConfig, FittedEstimator, Metric};

fn main() -> interpnn::Result<()> {
    let d = 5;
    let model = classification_model_2(d)?;
    let train = model.sample(&mut stream_rng(5, 0), 2048)?;
    println!("gamma/d   regret     CIS");
    for frac in [0.0, 0.1, 0.2, 0.3] {
        let config = EstimatorConfig::new(21, frac * d as f64, Metric::default());
        let est = FittedEstimator::fit(train.clone(), config.clone())?;
        let regret = estimate_regret(&est, &model, 5000, &mut stream_rng(5, 1))?;
        let cis = estimate_cis(&config, &model, 2048, 5000, &mut stream_rng(5, 2))?;
        println!("{frac:<7}  {regret:.5}  {cis:.5}");
    }
    let x = model.sample_x(&mut stream_rng(5, 3), 1);
    let pred = FittedEstimator::fit(train, EstimatorConfig::new(21, 1.0, Metric::default()))?.predict_class(&x)?;
    println!("x = {x:.3?}: label {} (vote {:.3}, eta {:.3})", pred.label, pred.score, model.eta(&x));
    Ok(())
}
