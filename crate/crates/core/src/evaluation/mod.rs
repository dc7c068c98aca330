//! Monte Carlo estimation of MSE, Regret and CIS, ratio experiments,
//! test-point corruption, the toy study and the real-data pipeline.
//!
//! Every experiment derives one RNG stream per repetition from a master seed
//! (see [`seeds`]) and reduces results in repetition order, so outputs are
//! bit-identical for any number of worker threads.

pub mod corruption;
pub mod experiment;
pub mod metrics;
pub mod real;
pub mod seeds;
pub mod stats;
pub mod toy;

pub use corruption::{
    corrupt, estimate_corrupted_regret, run_attack_experiment, AttackContext, AttackResult, AttackRow, AttackSpec,
    CorruptionKind, CorruptionSpec,
};
pub use experiment::{
    collect_ratio_tables, run_ratio_experiment, tune_k, Criterion, CriterionCurve, ExperimentResult, ExperimentSpec,
    KPolicy, RatioRow, RatioTables,
};
pub use metrics::{estimate_cis, estimate_cis_between, estimate_mse, estimate_regret};
pub use real::{run_real_experiment, RealResult, RealRow, RealSpec, RealSummary};
pub use seeds::stream_rng;
pub use toy::{toy_curves, toy_eval_grid, toy_schemes, toy_study, ToyCurveRow, ToyStudy, TOY_K};
