//! CSV loading, label binarization and train/test splitting.
//!
//! The dialect is plain: comma separated, `.` decimals, optional header,
//! UTF-8. Row and column numbers in errors are 1-based and count the header
//! line when there is one.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::evaluation::seeds::stream_rng;

/// A column chosen by 0-based position or by header name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

/// A raw label value in a class set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelValue {
    Number(f64),
    Text(String),
}

impl LabelValue {
    fn matches(&self, raw: &str) -> bool {
        match self {
            LabelValue::Number(v) => raw.parse::<f64>().is_ok_and(|r| r == *v),
            LabelValue::Text(t) => t.trim() == raw,
        }
    }
}

/// How raw labels become `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum Binarization {
    /// `1` iff the numeric label exceeds `value`.
    ThresholdGreaterThan { value: f64 },
    /// `1` iff the label is one of `classes`.
    #[serde(rename = "class_set_maps_to_1")]
    ClassSetMapsTo1 { classes: Vec<LabelValue> },
    /// Labels must already be `0` or `1`.
    #[default]
    None,
}

impl Binarization {
    fn apply(&self, raw: &str, row: usize) -> Result<f64> {
        let unknown = || Error::UnknownLabel {
            row,
            value: raw.to_string(),
        };
        match self {
            Binarization::ThresholdGreaterThan { value } => {
                let v: f64 = raw.parse().map_err(|_| unknown())?;
                if v.is_nan() {
                    return Err(unknown());
                }
                Ok(f64::from(u8::from(v > *value)))
            }
            Binarization::ClassSetMapsTo1 { classes } => {
                if raw.is_empty() {
                    return Err(unknown());
                }
                Ok(f64::from(u8::from(classes.iter().any(|c| c.matches(raw)))))
            }
            Binarization::None => match raw.parse::<f64>() {
                Ok(v) if v == 0.0 || v == 1.0 => Ok(v),
                _ => Err(unknown()),
            },
        }
    }
}

fn yes() -> bool {
    true
}
fn default_train_fraction() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSpec {
    pub path: PathBuf,
    #[serde(default = "yes")]
    pub has_header: bool,
    pub feature_columns: Vec<Column>,
    pub label_column: Column,
    #[serde(default)]
    pub binarization: Binarization,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub split_seed: u64,
    /// Rescale features to mean 0 and sd 1 using training statistics.
    #[serde(default)]
    pub standardize: bool,
}

impl IngestSpec {
    pub fn new(path: impl Into<PathBuf>, feature_columns: Vec<Column>, label_column: Column) -> Self {
        Self {
            path: path.into(),
            has_header: true,
            feature_columns,
            label_column,
            binarization: Binarization::None,
            train_fraction: default_train_fraction(),
            split_seed: 0,
            standardize: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_fraction(self.train_fraction)?;
        if self.feature_columns.is_empty() {
            return Err(Error::Config("at least one feature column is required".into()));
        }
        Ok(())
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::Config(format!("train_fraction = {f} must lie in (0, 1)")));
    }
    Ok(())
}

fn resolve(column: &Column, header: Option<&csv::StringRecord>) -> Result<usize> {
    match column {
        Column::Index(i) => Ok(*i),
        Column::Name(name) => {
            let header = header.ok_or_else(|| Error::Config(format!("column `{name}` named but the file has no header")))?;
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Config(format!("no column named `{name}`")))
        }
    }
}

/// Parses CSV text from `reader` according to `spec` (its `path` is ignored).
pub fn parse_csv(reader: impl Read, spec: &IngestSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(spec.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = if spec.has_header {
        Some(rdr.headers().map_err(|e| csv_error(e, 1))?.clone())
    } else {
        None
    };
    let features = spec
        .feature_columns
        .iter()
        .map(|c| resolve(c, header.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let label = resolve(&spec.label_column, header.as_ref())?;
    if features.contains(&label) {
        return Err(Error::Config("label column is also a feature column".into()));
    }

    let d = features.len();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let first_row = if spec.has_header { 2 } else { 1 };
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(e, first_row + i))?;
        let row = record.position().map_or(first_row + i, |p| p.line() as usize);
        let field = |col: usize| {
            record.get(col).ok_or_else(|| Error::Parse {
                row,
                column: col + 1,
                message: format!("row has {} fields", record.len()),
            })
        };
        for &col in &features {
            let raw = field(col)?;
            let v: f64 = raw.parse().map_err(|_| Error::NonNumericFeature {
                row,
                column: col + 1,
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumericFeature {
                    row,
                    column: col + 1,
                    value: raw.to_string(),
                });
            }
            points.push(v);
        }
        labels.push(spec.binarization.apply(field(label)?, row)?);
    }
    if labels.is_empty() {
        return Err(Error::Parse {
            row: first_row,
            column: 1,
            message: "no data rows".into(),
        });
    }
    Dataset::new(points, d, labels, Task::Classification)
}

fn csv_error(e: csv::Error, row: usize) -> Error {
    let row = e.position().map_or(row, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            row,
            column: 1,
            message: format!("{other:?}"),
        },
    }
}

/// Reads `spec.path` and returns the binarized classification dataset.
pub fn load_csv(spec: &IngestSpec) -> Result<Dataset> {
    parse_csv(File::open(&spec.path)?, spec)
}

/// Writes a dataset as `x1,...,xd,y` with a header, in a form
/// [`load_csv`] reads back unchanged.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| Error::Io(e.into()))?;
    let mut header: Vec<String> = (1..=dataset.d()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header).map_err(|e| Error::Io(e.into()))?;
    for (x, y) in dataset.iter() {
        let mut rec: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        rec.push(y.to_string());
        w.write_record(&rec).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

/// An `IngestSpec` that reads back a file produced by [`write_csv`].
pub fn written_spec(path: impl Into<PathBuf>, d: usize) -> IngestSpec {
    IngestSpec::new(path, (0..d).map(Column::Index).collect(), Column::Index(d))
}

/// Random split with `round(n * train_fraction)` training rows.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    check_fraction(train_fraction)?;
    let n = dataset.n();
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::DegenerateSplit {
            train: n_train,
            test: n - n_train,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, 0));
    let (train, test) = order.split_at(n_train);
    Ok((dataset.select(train)?, dataset.select(test)?))
}

/// Per-feature mean and standard deviation of a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    /// Statistics of `train`; a constant feature keeps scale 1.
    pub fn fit(train: &Dataset) -> Self {
        let d = train.d();
        let n = train.n() as f64;
        let mut mean = vec![0.0; d];
        for (x, _) in train.iter() {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for (x, _) in train.iter() {
            for j in 0..d {
                var[j] += (x[j] - mean[j]).powi(2);
            }
        }
        let sd = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, sd }
    }

    pub fn apply(&self, dataset: &Dataset) -> Result<Dataset> {
        dataset.map_points(|x, out| {
            for j in 0..x.len() {
                out[j] = (x[j] - self.mean[j]) / self.sd[j];
            }
        })
    }
}

/// Standardizes both parts with statistics of `train` only.
pub fn standardize(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset, Standardizer)> {
    let s = Standardizer::fit(train);
    Ok((s.apply(train)?, s.apply(test)?, s))
}
