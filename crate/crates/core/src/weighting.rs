//! Neighbor weights `W_i = phi(R_i / R_{k+1}) / sum_j phi(R_j / R_{k+1})`.
//!
//! The power scheme `phi(t) = t^-gamma` is the interpolating family; `gamma = 0`
//! is plain k-NN and `gamma -> inf` approaches 1-NN. Any positive
//! non-increasing `phi` on `(0, 1]` can be plugged in through [`GeneralPhi`].
//!
//! When a neighbor sits exactly on the query and `phi` blows up at zero, the
//! limit of the weights puts all mass on the zero-distance neighbors, split
//! equally among them. This is what makes the estimator interpolate.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::neighbors::NeighborQueryResult;

type PhiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied weight function of `t = R_i / R_{k+1}`.
#[derive(Clone)]
pub struct GeneralPhi {
    name: String,
    phi: PhiFn,
    gamma_derivative: Option<PhiFn>,
}

const MONOTONE_GRID: usize = 64;

impl GeneralPhi {
    /// Wraps `phi`, checking positivity and monotonicity on a 64-point grid
    /// of `(0, 1]`.
    pub fn new(name: impl Into<String>, phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let name = name.into();
        let mut prev = f64::INFINITY;
        for j in 1..=MONOTONE_GRID {
            let t = j as f64 / MONOTONE_GRID as f64;
            let v = phi(t);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidPhi(format!("{name}: phi({t}) = {v} is not positive and finite")));
            }
            if v > prev {
                return Err(Error::InvalidPhi(format!("{name}: phi increases near t = {t}")));
            }
            prev = v;
        }
        Ok(Self {
            name,
            phi: Arc::new(phi),
            gamma_derivative: None,
        })
    }

    /// Attaches `x -> d phi(x, gamma) / d gamma` at `gamma = 0`, for schemes that
    /// are members of a one-parameter family.
    pub fn with_gamma_derivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.gamma_derivative = Some(Arc::new(f));
        self
    }

    /// `phi(t) = 1 - gamma ln t`.
    pub fn log_family(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::NegativeGamma(gamma));
        }
        Ok(Self::new(format!("one_minus_log({gamma})"), move |t: f64| 1.0 - gamma * t.ln())?
            .with_gamma_derivative(|t: f64| -t.ln()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.phi)(t)
    }

    pub fn gamma_derivative(&self) -> Option<&(dyn Fn(f64) -> f64 + Send + Sync)> {
        self.gamma_derivative.as_deref()
    }
}

impl fmt::Debug for GeneralPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralPhi").field("name", &self.name).finish()
    }
}

/// How neighbor weights are formed.
#[derive(Debug, Clone)]
pub enum WeightScheme {
    Uniform,
    /// `phi(t) = t^-gamma`.
    Power(f64),
    General(GeneralPhi),
}

impl WeightScheme {
    pub fn power(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::NegativeGamma(gamma));
        }
        Ok(Self::Power(gamma))
    }

    /// Interpolation level of the power scheme (`0` for uniform).
    pub fn gamma(&self) -> Option<f64> {
        match self {
            WeightScheme::Uniform => Some(0.0),
            WeightScheme::Power(g) => Some(*g),
            WeightScheme::General(_) => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            WeightScheme::Uniform => "uniform".into(),
            WeightScheme::Power(g) => format!("power({g})"),
            WeightScheme::General(p) => p.name().to_string(),
        }
    }

    /// Unnormalized weights for ascending-or-not distances.
    ///
    /// The result is proportional to the final weights. For the power scheme
    /// each value is `(R_min / R_i)^gamma`, i.e. the log-weights are shifted by
    /// their maximum before exponentiation, so no value exceeds one and large
    /// `gamma` degrades to the 1-NN limit instead of overflowing.
    pub fn raw_weights(&self, distances: &[f64], r_kplus1: f64) -> Result<Vec<f64>> {
        match self {
            WeightScheme::Uniform => Ok(vec![1.0; distances.len()]),
            WeightScheme::Power(gamma) => {
                if *gamma == 0.0 {
                    return Ok(vec![1.0; distances.len()]);
                }
                if distances.contains(&0.0) {
                    return Ok(zero_split(distances));
                }
                let r_min = distances.iter().copied().fold(f64::INFINITY, f64::min);
                Ok(distances.iter().map(|&r| power_weight(r_min, r, *gamma)).collect())
            }
            WeightScheme::General(phi) => {
                if r_kplus1 == 0.0 {
                    return Ok(vec![1.0; distances.len()]);
                }
                if distances.contains(&0.0) && !phi.eval(0.0).is_finite() {
                    return Ok(zero_split(distances));
                }
                let values: Vec<f64> = distances.iter().map(|&r| phi.eval(r / r_kplus1)).collect();
                if values.iter().any(|v| v.is_nan() || *v < 0.0) {
                    return Err(Error::InvalidPhi(format!("{} produced a negative or NaN value", phi.name())));
                }
                if values.iter().any(|v| v.is_infinite()) {
                    return Ok(values.iter().map(|v| if v.is_infinite() { 1.0 } else { 0.0 }).collect());
                }
                if values.iter().all(|&v| v == 0.0) {
                    return Err(Error::NumericOverflow);
                }
                Ok(values)
            }
        }
    }
}

/// `(r_min / r)^gamma`, the max-shifted power weight. Shared by every code
/// path that forms power weights so they agree to the last bit.
#[inline]
pub fn power_weight(r_min: f64, r: f64, gamma: f64) -> f64 {
    (gamma * (r_min / r).ln()).exp()
}

fn zero_split(distances: &[f64]) -> Vec<f64> {
    distances.iter().map(|&r| if r == 0.0 { 1.0 } else { 0.0 }).collect()
}

/// Normalized neighbor weights: nonnegative, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.weights
    }
}

/// Weights for a neighborhood under `scheme`.
pub fn compute_weights(result: &NeighborQueryResult, scheme: &WeightScheme) -> Result<WeightVector> {
    weights_from_distances(&result.distances, result.r_kplus1, scheme)
}

/// [`compute_weights`] on bare distances.
pub fn weights_from_distances(distances: &[f64], r_kplus1: f64, scheme: &WeightScheme) -> Result<WeightVector> {
    let raw = scheme.raw_weights(distances, r_kplus1)?;
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::NumericOverflow);
    }
    Ok(WeightVector {
        weights: raw.into_iter().map(|v| v / total).collect(),
    })
}

/// Weight functions used in the one-dimensional toy study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiName {
    Uniform,
    OneMinusLog,
    Power(f64),
}

impl FromStr for PhiName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "uniform" | "knn" => return Ok(PhiName::Uniform),
            "one_minus_log" => return Ok(PhiName::OneMinusLog),
            _ => {}
        }
        if let Some(arg) = s.strip_prefix("power(").and_then(|r| r.strip_suffix(')')) {
            let gamma: f64 = arg.trim().parse().map_err(|_| Error::UnknownScheme(s.to_string()))?;
            return Ok(PhiName::Power(gamma));
        }
        Err(Error::UnknownScheme(s.to_string()))
    }
}

impl fmt::Display for PhiName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiName::Uniform => f.write_str("uniform"),
            PhiName::OneMinusLog => f.write_str("one_minus_log"),
            PhiName::Power(g) => write!(f, "power({g})"),
        }
    }
}

pub fn phi_catalog(name: PhiName) -> Result<WeightScheme> {
    Ok(match name {
        PhiName::Uniform => WeightScheme::Uniform,
        PhiName::OneMinusLog => WeightScheme::General(GeneralPhi::log_family(1.0)?),
        PhiName::Power(g) => WeightScheme::power(g)?,
    })
}
