//! One-dimensional bias and variance of three weight functions.

use interpnn::evaluation::toy_study;

fn main() -> interpnn::Result<()> {
    let study = toy_study(100, 0)?;
    for m in &study.models {
        println!("model {}", m.model_id);
        for s in &m.schemes {
            println!(
                "  {:<14} mse {:>9.4}  bias^2 {:>9.4}  variance {:>9.4}",
                s.scheme, s.mse_mean, s.bias2, s.variance
            );
        }
    }
    let pure_noise = study.model(1).expect("model 1");
    println!("uniform wins model 1 in {:.0}% of repetitions", 100.0 * pure_noise.strict_win_rate(0));
    Ok(())
}
