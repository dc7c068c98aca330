//! Closed-form ratios of interpolated-NN to k-NN, and where interpolation stops helping.

use interpnn::theory::{gamma_threshold, ownn_ratio, pr_optimal_k, pr_same_k, cis_ratio_same_k, delta_criterion, KChoice};

fn main() -> interpnn::Result<()> {
    println!("  d  gamma_d  gamma'_d   PR(d,d/6)  PR'(d,d/6)  CIS(d,d/6)  OWNN(d,0)");
    for d in [1, 2, 3, 4, 5, 8, 10, 20] {
        let g = d as f64 / 6.0;
        println!(
            "{d:>3}  {:>7.4}  {:>8.4}  {:>10.6}  {:>10.6}  {:>10.6}  {:>9.6}",
            gamma_threshold(d, KChoice::SameK)?,
            gamma_threshold(d, KChoice::OptimalK)?,
            pr_same_k(d, g)?,
            pr_optimal_k(d, g)?,
            cis_ratio_same_k(d, g)?,
            ownn_ratio(d, 0.0)?,
        );
    }

    // Weight family phi(t) = 1 - gamma ln t: negative means a little interpolation helps.
    for d in 1..=5 {
        let delta = delta_criterion(|x: f64| -x.ln(), d)?;
        println!("delta(1 - gamma ln t, d = {d}) = {delta:.3e}");
    }
    Ok(())
}
