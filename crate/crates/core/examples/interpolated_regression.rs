//! Fitting interpolated-NN regressors and checking that they pass through the data.

use interpnn::synthetic::{regression_model, SyntheticModel};
use interpnn::evaluation::{estimate_mse, stream_rng};
use interpnn::{EstimatorConfig, FittedEstimator, Metric};

fn main() -> interpnn::Result<()> {
    let model = regression_model(2)?;
    let train = model.sample(&mut stream_rng(1, 0), 2048)?;
    let x0 = train.point(0).to_vec();
    let y0 = train.response(0);

    println!("gamma   f(x_0) - y_0      test MSE");
    for gamma in [0.0, 0.2, 0.4, 0.6] {
        let est = FittedEstimator::fit(train.clone(), EstimatorConfig::new(300, gamma, Metric::default()))?;
        let at_train = est.predict_regression(&x0)? - y0;
        let mse = estimate_mse(&est, &model, 5000, &mut stream_rng(1, 1))?;
        println!("{gamma:<5}  {at_train:>+12.3e}  {mse:>12.6}");
    }
    Ok(())
}
