//! Command-line front end: `theory`, `simulate`, `toy`, `attack` and `real`.
//!
//! Every command writes CSV (header row, `,` separators, `\n` line endings),
//! optionally an SVG per table, and `resolved_config.toml` holding every
//! setting used, including seeds. Running again from that file reproduces
//! the CSV bytes.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{
    run_attack_experiment, run_ratio_experiment, run_real_experiment, toy_curves, toy_study, ExperimentSpec, AttackSpec,
    RealSpec,
};
use crate::ingest::load_csv;
use crate::plot::{Chart, Series};
use crate::synthetic::ModelSpec;
use crate::theory::{RatioCurve, TheoryCurve};

pub const RESOLVED_CONFIG: &str = "resolved_config.toml";
const PAPER_REPETITIONS: usize = 500;

fn default_d() -> usize {
    2
}
fn default_step() -> f64 {
    0.01
}
fn default_which() -> TheoryCurve {
    TheoryCurve::Pr
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheorySpec {
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_which")]
    pub which: TheoryCurve,
    /// Defaults to `d/3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_max: Option<f64>,
    #[serde(default = "default_step")]
    pub step: f64,
}

impl Default for TheorySpec {
    fn default() -> Self {
        Self {
            d: default_d(),
            which: default_which(),
            gamma_max: None,
            step: default_step(),
        }
    }
}

fn default_toy_repetitions() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_toy_repetitions")]
    pub repetitions: usize,
}

impl Default for ToySpec {
    fn default() -> Self {
        Self {
            seed: 0,
            repetitions: default_toy_repetitions(),
        }
    }
}

/// Contents of a `--config` file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub plot: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheorySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<ExperimentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toy: Option<ToySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real: Option<RealSpec>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file. A relative dataset path is taken relative to the
    /// file and stored as absolute.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(real) = cfg.real.as_mut() {
            if real.ingest.path.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                let joined = base.join(&real.ingest.path);
                real.ingest.path = match fs::canonicalize(&joined) {
                    Ok(p) => p,
                    Err(_) => std::path::absolute(&joined)?,
                };
            }
        }
        Ok(cfg)
    }
}

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write SVG plots.
    #[arg(long)]
    pub plot: bool,
    /// 500 repetitions for `simulate` and `attack`.
    #[arg(long)]
    pub paper_scale: bool,
    /// Worker threads (default: all cores). Never changes the output.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Closed-form ratio curves.
    Theory {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        d: Option<usize>,
        /// pr, pr_opt, cis, cis_opt or ownn.
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        gamma_max: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Simulated ratio experiment.
    Simulate {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// One-dimensional toy study.
    Toy {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Regret under corrupted test points.
    Attack {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Repeated train/test splits of a CSV dataset.
    Real {
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Parser)]
#[command(name = "interpnn", version, about = "Interpolated nearest neighbors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Files written by a command and an optional line for the terminal.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Option<String>,
}

struct Output {
    dir: PathBuf,
    plot: bool,
    report: RunReport,
}

impl Output {
    fn new(cfg: &RunConfig, ov: &Overrides) -> Result<Self> {
        let dir = ov
            .out
            .clone()
            .or_else(|| cfg.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            plot: ov.plot || cfg.plot,
            report: RunReport::default(),
        })
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|e| Error::Io(e.into()))?;
        w.write_record(header).map_err(|e| Error::Io(e.into()))?;
        for r in rows {
            w.write_record(r).map_err(|e| Error::Io(e.into()))?;
        }
        w.flush()?;
        self.report.files.push(path);
        Ok(())
    }

    fn svg(&mut self, name: &str, chart: &Chart) -> Result<()> {
        if self.plot {
            let path = self.dir.join(name);
            fs::write(&path, chart.to_svg())?;
            self.report.files.push(path);
        }
        Ok(())
    }

    fn config(&mut self, cfg: &RunConfig) -> Result<()> {
        let path = self.dir.join(RESOLVED_CONFIG);
        fs::write(&path, cfg.to_toml()?)?;
        self.report.files.push(path);
        Ok(())
    }
}

fn load(ov: &Overrides) -> Result<RunConfig> {
    match &ov.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn s(v: impl ToString) -> String {
    v.to_string()
}

/// Output settings of a run. Each command then adds the one section it used.
fn resolved(out: &Output) -> RunConfig {
    RunConfig {
        out_dir: Some(out.dir.clone()),
        plot: out.plot,
        ..RunConfig::default()
    }
}

pub fn cmd_theory(spec: &TheorySpec, cfg: &RunConfig, ov: &Overrides) -> Result<RunReport> {
    if !(spec.step > 0.0) {
        return Err(Error::Config(format!("step = {} must be positive", spec.step)));
    }
    let gamma_max = spec.gamma_max.unwrap_or(spec.d as f64 / 3.0);
    let n = (gamma_max / spec.step + 1e-9).floor() as usize;
    let gammas: Vec<f64> = (0..=n).map(|i| i as f64 * spec.step).collect();
    let curve = RatioCurve::evaluate(spec.which, spec.d, gammas)?;
    let mut out = Output::new(cfg, ov)?;
    let d = spec.d as f64;
    let rows: Vec<Vec<String>> = curve
        .gammas
        .iter()
        .zip(&curve.values)
        .zip(curve.in_theory_range())
        .map(|((g, v), ok)| vec![s(g), s(g / d), s(v), s(ok)])
        .collect();
    let stem = format!("theory_{}_d{}", spec.which.name(), spec.d);
    out.csv(&format!("{stem}.csv"), &["gamma", "gamma_over_d", "value", "in_theory_range"], &rows)?;
    let mut chart = Chart::new(format!("{} (d = {})", spec.which.name(), spec.d), "gamma", "ratio");
    chart.push(Series::new(
        spec.which.name(),
        curve.gammas.iter().copied().zip(curve.values.iter().copied()).collect(),
    ));
    out.svg(&format!("{stem}.svg"), &chart)?;
    let mut res = resolved(&out);
    res.theory = Some(TheorySpec {
        gamma_max: Some(gamma_max),
        ..spec.clone()
    });
    out.config(&res)?;
    Ok(out.report)
}

pub fn cmd_simulate(cfg: &RunConfig, ov: &Overrides) -> Result<RunReport> {
    let mut spec = cfg
        .simulate
        .clone()
        .unwrap_or_else(|| ExperimentSpec::new(ModelSpec::Regression { d: 2 }));
    if let Some(seed) = ov.seed {
        spec.master_seed = seed;
    }
    if ov.paper_scale {
        spec.repetitions = PAPER_REPETITIONS;
    }
    let result = run_ratio_experiment(&spec)?;
    let mut out = Output::new(cfg, ov)?;
    for curve in &result.curves {
        let name = curve.criterion.name();
        let rows: Vec<Vec<String>> = curve
            .rows
            .iter()
            .map(|r| {
                vec![
                    s(r.gamma_over_d),
                    s(r.k_used),
                    s(r.criterion_mean),
                    s(r.criterion_sd),
                    s(r.ratio_mean),
                    s(r.ratio_sd),
                    s(r.theory_ratio),
                ]
            })
            .collect();
        out.csv(
            &format!("simulate_{name}.csv"),
            &[
                "gamma_over_d",
                "k_used",
                "criterion_mean",
                "criterion_sd",
                "ratio_mean",
                "ratio_sd",
                "theory_ratio",
            ],
            &rows,
        )?;
        let mut chart = Chart::new(
            format!("{name} ratio, {} ({:?})", result.model, result.policy),
            "gamma / d",
            "ratio to k-NN",
        );
        chart.push(
            Series::new(
                "empirical",
                curve.rows.iter().map(|r| (r.gamma_over_d, r.ratio_mean)).collect(),
            )
            .with_error(curve.rows.iter().map(|r| r.ratio_sd).collect()),
        );
        chart.push(
            Series::new("theory", curve.rows.iter().map(|r| (r.gamma_over_d, r.theory_ratio)).collect()).dashed(),
        );
        out.svg(&format!("simulate_{name}.svg"), &chart)?;
    }
    let mut res = resolved(&out);
    res.simulate = Some(spec);
    out.config(&res)?;
    Ok(out.report)
}

pub fn cmd_toy(cfg: &RunConfig, ov: &Overrides) -> Result<RunReport> {
    let mut spec = cfg.toy.clone().unwrap_or_default();
    if let Some(seed) = ov.seed {
        spec.seed = seed;
    }
    let curves = toy_curves(spec.seed)?;
    let study = toy_study(spec.repetitions, spec.seed)?;
    let mut out = Output::new(cfg, ov)?;
    let rows: Vec<Vec<String>> = curves
        .iter()
        .map(|r| vec![s(r.model_id), r.scheme.clone(), s(r.x), s(r.eta_true), s(r.eta_hat)])
        .collect();
    out.csv("toy.csv", &["model_id", "scheme", "x", "eta_true", "eta_hat"], &rows)?;
    let mut summary = Vec::new();
    for m in &study.models {
        for sc in &m.schemes {
            summary.push(vec![
                s(m.model_id),
                sc.scheme.clone(),
                s(sc.mse_mean),
                s(sc.mse_sd),
                s(sc.bias2),
                s(sc.variance),
            ]);
        }
    }
    out.csv(
        "toy_summary.csv",
        &["model_id", "scheme", "mse_mean", "mse_sd", "bias2", "variance"],
        &summary,
    )?;
    for id in 1..=3u8 {
        let rows: Vec<_> = curves.iter().filter(|r| r.model_id == id).collect();
        let mut schemes: Vec<&str> = rows.iter().map(|r| r.scheme.as_str()).collect();
        schemes.dedup();
        let mut chart = Chart::new(format!("toy model {id}, k = {}", crate::evaluation::TOY_K), "x", "y");
        if let Some(first) = schemes.first() {
            let truth = rows.iter().filter(|r| r.scheme == *first).map(|r| (r.x, r.eta_true)).collect();
            chart.push(Series::new("truth", truth).dashed());
        }
        for sch in schemes {
            let pts = rows.iter().filter(|r| r.scheme == sch).map(|r| (r.x, r.eta_hat)).collect();
            chart.push(Series::new(sch, pts));
        }
        out.svg(&format!("toy_model{id}.svg"), &chart)?;
    }
    let mut res = resolved(&out);
    res.toy = Some(spec);
    out.config(&res)?;
    Ok(out.report)
}

pub fn cmd_attack(cfg: &RunConfig, ov: &Overrides) -> Result<RunReport> {
    let mut spec = cfg.attack.clone().unwrap_or_default();
    if let Some(seed) = ov.seed {
        spec.master_seed = seed;
    }
    if ov.paper_scale {
        spec.repetitions = PAPER_REPETITIONS;
    }
    let result = run_attack_experiment(&spec)?;
    let mut out = Output::new(cfg, ov)?;
    let rows: Vec<Vec<String>> = result
        .rows
        .iter()
        .map(|r| {
            vec![
                r.kind.name().to_string(),
                s(r.omega),
                s(r.gamma_over_d),
                s(r.regret_mean),
                s(r.regret_sd),
            ]
        })
        .collect();
    out.csv(
        "attack.csv",
        &["kind", "omega", "gamma_over_d", "regret_mean", "regret_sd"],
        &rows,
    )?;
    for kind in &spec.kinds {
        let mut chart = Chart::new(format!("{} attack, k = {}", kind.name(), result.k), "gamma / d", "regret");
        for &omega in &spec.omega_grid {
            let pts = result
                .rows
                .iter()
                .filter(|r| r.kind == *kind && r.omega == omega)
                .map(|r| (r.gamma_over_d, r.regret_mean))
                .collect();
            chart.push(Series::new(format!("omega = {omega}"), pts));
        }
        out.svg(&format!("attack_{}.svg", kind.name()), &chart)?;
    }
    let mut res = resolved(&out);
    res.attack = Some(spec);
    out.config(&res)?;
    Ok(out.report)
}

pub fn cmd_real(cfg: &RunConfig, ov: &Overrides) -> Result<RunReport> {
    let mut spec = cfg
        .real
        .clone()
        .ok_or_else(|| Error::Config("`real` needs a config file with a [real] section".into()))?;
    if let Some(seed) = ov.seed {
        spec.ingest.split_seed = seed;
    }
    let data = load_csv(&spec.ingest)?;
    let result = run_real_experiment(&data, &spec)?;
    let mut out = Output::new(cfg, ov)?;
    let rows: Vec<Vec<String>> = result
        .rows
        .iter()
        .map(|r| vec![s(r.gamma_over_d), s(r.k_best), s(r.test_error_mean), s(r.test_error_sd)])
        .collect();
    out.csv(
        "real.csv",
        &["gamma_over_d", "k_best", "test_error_mean", "test_error_sd"],
        &rows,
    )?;
    if let Some(sm) = &result.summary {
        out.csv(
            "real_summary.csv",
            &["baseline_error", "best_gamma_over_d", "best_error", "k_best"],
            &[vec![s(sm.baseline_error), s(sm.best_gamma_over_d), s(sm.best_error), s(sm.k_best)]],
        )?;
        out.report.summary = Some(format!(
            "k-NN error {:.5}; best interpolated gamma/d = {} (k = {}) error {:.5}",
            sm.baseline_error, sm.best_gamma_over_d, sm.k_best, sm.best_error
        ));
    }
    let mut chart = Chart::new(format!("test error (n = {}, d = {})", result.n, result.d), "gamma / d", "test error");
    chart.push(
        Series::new("mean", result.rows.iter().map(|r| (r.gamma_over_d, r.test_error_mean)).collect())
            .with_error(result.rows.iter().map(|r| r.test_error_sd).collect()),
    );
    out.svg("real.svg", &chart)?;
    let mut res = resolved(&out);
    res.real = Some(spec);
    out.config(&res)?;
    Ok(out.report)
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(f),
    }
}

/// Runs a parsed command.
pub fn run(command: &Command) -> Result<RunReport> {
    match command {
        Command::Theory {
            overrides,
            d,
            which,
            gamma_max,
            step,
        } => {
            let cfg = load(overrides)?;
            let mut spec = cfg.theory.clone().unwrap_or_default();
            if let Some(d) = d {
                spec.d = *d;
            }
            if let Some(w) = which {
                spec.which = w.parse()?;
            }
            if gamma_max.is_some() {
                spec.gamma_max = *gamma_max;
            }
            if let Some(st) = step {
                spec.step = *st;
            }
            cmd_theory(&spec, &cfg, overrides)
        }
        Command::Simulate { overrides } => {
            let cfg = load(overrides)?;
            in_pool(overrides.threads, || cmd_simulate(&cfg, overrides))
        }
        Command::Toy { overrides } => {
            let cfg = load(overrides)?;
            cmd_toy(&cfg, overrides)
        }
        Command::Attack { overrides } => {
            let cfg = load(overrides)?;
            in_pool(overrides.threads, || cmd_attack(&cfg, overrides))
        }
        Command::Real { overrides } => {
            let cfg = load(overrides)?;
            in_pool(overrides.threads, || cmd_real(&cfg, overrides))
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 on success, 2 for usage or configuration errors, 3 for data errors,
/// 4 for numeric or domain errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if let Some(line) = &report.summary {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(matches!(RunConfig::from_toml("bogus = 1"), Err(Error::Config(_))));
        assert!(matches!(
            RunConfig::from_toml("[simulate]\nmodel = { kind = \"regression\", d = 2 }\nreps = 3"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn config_round_trip() {
        let text = r#"
plot = true
[simulate]
model = { kind = "classification_2", d = 5 }
repetitions = 7
metric = "inf"
k_policy = "optimal_per_gamma"
[attack]
kinds = ["white_box"]
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.simulate.as_ref().unwrap().repetitions, 7);
        assert_eq!(cfg.simulate.as_ref().unwrap().metric.p(), f64::INFINITY);
        let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}
