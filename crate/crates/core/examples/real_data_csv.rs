//! Test error over repeated splits of a CSV dataset.
//!
//! Defaults to the bundled Abalone-format sample. Pass another path to use it
//! with the same column names.

use interpnn::evaluation::{run_real_experiment, RealSpec};
use interpnn::ingest::{load_csv, Binarization, Column, IngestSpec};

fn main() -> interpnn::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/abalone_mini.csv").into());
    let features = ["length", "diameter", "height", "whole_weight", "shucked_weight", "viscera_weight", "shell_weight"];
    let mut ingest = IngestSpec::new(
        path,
        features.iter().map(|c| Column::Name(c.to_string())).collect(),
        Column::Name("rings".into()),
    );
    ingest.binarization = Binarization::ThresholdGreaterThan { value: 10.0 };
    let data = load_csv(&ingest)?;
    let result = run_real_experiment(&data, &RealSpec::new(ingest))?;

    println!("n = {}, d = {}", result.n, result.d);
    for r in &result.rows {
        println!("gamma/d {:<5} k {:>3}  error {:.4} ({:.4})", r.gamma_over_d, r.k_best, r.test_error_mean, r.test_error_sd);
    }
    if let Some(s) = result.summary {
        println!(
            "k-NN {:.4}, best gamma/d = {} gives {:.4}",
            s.baseline_error, s.best_gamma_over_d, s.best_error
        );
    }
    Ok(())
}
