//! Training data container.

use crate::error::{Error, Result};

/// What the responses of a [`Dataset`] mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Regression,
    /// Binary labels stored as `0.0` / `1.0`.
    Classification,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Regression => "regression",
            Task::Classification => "classification",
        }
    }
}

/// `n` points in `d` dimensions plus one response per point.
///
/// Points are stored row-major in a single buffer. The constructor enforces
/// that every coordinate is finite, that there is one response per point and
/// that classification responses are exactly `0` or `1`. Once built a
/// dataset is never mutated.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    responses: Vec<f64>,
    d: usize,
    task: Task,
}

impl Dataset {
    pub fn new(points: Vec<f64>, d: usize, responses: Vec<f64>, task: Task) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDataset("dimension must be at least 1".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidDataset("dataset has no points".into()));
        }
        if !points.len().is_multiple_of(d) {
            return Err(Error::InvalidDataset(format!(
                "coordinate buffer of length {} is not a multiple of d = {d}",
                points.len()
            )));
        }
        let n = points.len() / d;
        if responses.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} responses for {n} points",
                responses.len()
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite coordinate at point {}, dimension {}",
                pos / d,
                pos % d
            )));
        }
        match task {
            Task::Regression => {
                if let Some(i) = responses.iter().position(|v| !v.is_finite()) {
                    return Err(Error::InvalidDataset(format!("non-finite response at {i}")));
                }
            }
            Task::Classification => {
                if let Some(i) = responses.iter().position(|&v| v != 0.0 && v != 1.0) {
                    return Err(Error::InvalidDataset(format!(
                        "label {} at {i} is not 0 or 1",
                        responses[i]
                    )));
                }
            }
        }
        Ok(Self {
            points,
            responses,
            d,
            task,
        })
    }

    /// Builds a dataset from per-point rows.
    pub fn from_rows(rows: &[Vec<f64>], responses: Vec<f64>, task: Task) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        Self::new(rows.concat(), d, responses, task)
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn task(&self) -> Task {
        self.task
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    /// Row-major coordinate buffer.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    #[inline]
    pub fn response(&self, i: usize) -> f64 {
        self.responses[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .chunks_exact(self.d)
            .zip(self.responses.iter().copied())
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(indices.len() * self.d);
        let mut responses = Vec::with_capacity(indices.len());
        for &i in indices {
            points.extend_from_slice(self.point(i));
            responses.push(self.responses[i]);
        }
        Self::new(points, self.d, responses, self.task)
    }

    /// Same responses with coordinates replaced by `f(point)`.
    pub fn map_points(&self, mut f: impl FnMut(&[f64], &mut [f64])) -> Result<Self> {
        let mut points = vec![0.0; self.points.len()];
        for (src, dst) in self
            .points
            .chunks_exact(self.d)
            .zip(points.chunks_exact_mut(self.d))
        {
            f(src, dst);
        }
        Self::new(points, self.d, self.responses.clone(), self.task)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_coordinates() {
        let err = Dataset::new(vec![0.0, f64::NAN], 1, vec![0.0, 1.0], Task::Regression);
        assert!(matches!(err, Err(Error::InvalidDataset(_))));
    }

    #[test]
    fn rejects_non_binary_labels() {
        let err = Dataset::new(vec![0.0, 1.0], 1, vec![0.0, 0.5], Task::Classification);
        assert!(matches!(err, Err(Error::InvalidDataset(_))));
        assert!(Dataset::new(vec![0.0, 1.0], 1, vec![0.0, 0.5], Task::Regression).is_ok());
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(Dataset::new(vec![], 1, vec![], Task::Regression).is_err());
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], 2, vec![0.0], Task::Regression).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], 2, vec![0.0, 1.0], Task::Regression).is_err());
        let rows = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(matches!(
            Dataset::from_rows(&rows, vec![0.0, 0.0], Task::Regression),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn accessors() {
        let ds = Dataset::from_rows(
            &[vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 5.0]],
            vec![1.0, 0.0, 1.0],
            Task::Classification,
        )
        .unwrap();
        assert_eq!(ds.n(), 3);
        assert_eq!(ds.d(), 2);
        assert_eq!(ds.point(1), &[2.0, 3.0]);
        let sub = ds.select(&[2, 0]).unwrap();
        assert_eq!(sub.point(0), &[4.0, 5.0]);
        assert_eq!(sub.responses(), &[1.0, 1.0]);
    }
}
