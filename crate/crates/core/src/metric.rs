//! Minkowski distances.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Norm {
    L1,
    L2,
    Max,
    P(f64),
}

/// The `L_p` distance for some `p` in `[1, inf]`.
#[derive(Clone, Copy, PartialEq)]
pub struct Metric {
    norm: Norm,
}

impl Metric {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::BadMetric(p));
        }
        let norm = if p == 1.0 {
            Norm::L1
        } else if p == 2.0 {
            Norm::L2
        } else if p.is_infinite() {
            Norm::Max
        } else {
            Norm::P(p)
        };
        Ok(Self { norm })
    }

    pub const fn manhattan() -> Self {
        Self { norm: Norm::L1 }
    }

    pub const fn euclidean() -> Self {
        Self { norm: Norm::L2 }
    }

    pub const fn chebyshev() -> Self {
        Self { norm: Norm::Max }
    }

    pub fn p(&self) -> f64 {
        match self.norm {
            Norm::L1 => 1.0,
            Norm::L2 => 2.0,
            Norm::Max => f64::INFINITY,
            Norm::P(p) => p,
        }
    }

    #[inline]
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self.norm {
            Norm::L1 => diffs.sum(),
            Norm::L2 => diffs.map(|t| t * t).sum::<f64>().sqrt(),
            Norm::Max => diffs.fold(0.0, f64::max),
            Norm::P(p) => diffs.map(|t| t.powf(p)).sum::<f64>().powf(p.recip()),
        }
    }
}

impl Default for Metric {
    fn default() -> Self {
        Self::euclidean()
    }
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Metric(L{})", self)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.norm {
            Norm::Max => f.write_str("inf"),
            _ => write!(f, "{}", self.p()),
        }
    }
}

// Serialized as the exponent, with "inf" for the max norm.
impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.norm {
            Norm::Max => s.serialize_str("inf"),
            _ => s.serialize_f64(self.p()),
        }
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(p) => p,
            Raw::Int(p) => p as f64,
            Raw::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "max" => f64::INFINITY,
                other => other.parse().map_err(serde::de::Error::custom)?,
            },
        };
        Metric::new(p).map_err(serde::de::Error::custom)
    }
}
