//! Monte Carlo risk ratios against the closed-form curves.
//!
//! Run with `--release`. Pass `full` for the default 100 repetitions.

use interpnn::evaluation::{collect_ratio_tables, Criterion, ExperimentSpec, KPolicy};
use interpnn::synthetic::ModelSpec;

fn main() -> interpnn::Result<()> {
    let full = std::env::args().any(|a| a == "full");
    let mut spec = ExperimentSpec::new(ModelSpec::Regression { d: 2 });
    if !full {
        spec.repetitions = 10;
        spec.k_grid.retain(|&k| k <= 767);
    }
    // One set of simulations serves both ways of choosing k.
    let tables = collect_ratio_tables(&spec)?;
    for policy in [KPolicy::SharedOptimalAtGammaZero, KPolicy::OptimalPerGamma] {
        let result = tables.summarize(policy)?;
        let curve = result.curve(Criterion::Mse).expect("regression reports MSE");
        println!("{policy:?}");
        println!("  gamma/d     k   ratio (sd)          theory");
        for r in &curve.rows {
            println!(
                "  {:<7} {:>5}   {:.4} ({:.4})     {:.4}",
                r.gamma_over_d, r.k_used, r.ratio_mean, r.ratio_sd, r.theory_ratio
            );
        }
    }
    Ok(())
}
