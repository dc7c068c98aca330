//! Closed-form asymptotic constants of interpolated nearest neighbors.
//!
//! With `k` fixed, moving from k-NN (`gamma = 0`) to interpolation level
//! `gamma` multiplies the variance term of the MSE / Regret by
//! [`var_coef`] and the bias term by [`bias_coef`]. Everything else in this
//! module is built from those two coefficients:
//!
//! | function | ratio |
//! |---|---|
//! | [`pr_same_k`] | risk ratio when both methods use the k-NN-optimal `k` |
//! | [`pr_optimal_k`] | risk ratio when each method uses its own optimal `k` |
//! | [`ownn_ratio`] | optimally weighted NN over interpolated NN, both at optimal `k` |
//! | [`cis_ratio_same_k`] / [`cis_ratio_optimal_k`] | instability ratios |
//!
//! All ratios are distribution free: they depend on `d` and `gamma` only.
//! The asymptotic statements hold for `gamma < d/3`; the formulas stay finite
//! up to the variance pole at `gamma = d/2` and are evaluated there too.

pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check(d: usize, gamma: f64, upper: f64, what: &str) -> Result<f64> {
    if d == 0 {
        return Err(Error::DomainError("dimension must be at least 1".into()));
    }
    if !(gamma >= 0.0) {
        return Err(Error::DomainError(format!("{what}: gamma = {gamma} must be >= 0")));
    }
    if gamma >= upper {
        return Err(Error::DomainError(format!("{what}: gamma = {gamma} must be < {upper}")));
    }
    Ok(d as f64)
}

/// Variance multiplier `(d - gamma)^2 / (d (d - 2 gamma))`, for `0 <= gamma < d/2`.
pub fn var_coef(d: usize, gamma: f64) -> Result<f64> {
    let df = check(d, gamma, d as f64 / 2.0, "var_coef")?;
    Ok((df - gamma).powi(2) / (df * (df - 2.0 * gamma)))
}

/// Bias multiplier `(d - gamma)^2 (d + 2)^2 / ((d + 2 - gamma)^2 d^2)`, for `0 <= gamma < d + 2`.
pub fn bias_coef(d: usize, gamma: f64) -> Result<f64> {
    let df = check(d, gamma, d as f64 + 2.0, "bias_coef")?;
    Ok(((df - gamma) * (df + 2.0)).powi(2) / ((df + 2.0 - gamma) * df).powi(2))
}

/// Risk ratio with `k` tuned for k-NN and shared by both methods.
pub fn pr_same_k(d: usize, gamma: f64) -> Result<f64> {
    let v = var_coef(d, gamma)?;
    let b = bias_coef(d, gamma)?;
    let q = d as f64 / 4.0;
    Ok((v + q * b) / (1.0 + q))
}

/// Risk ratio with `k` tuned separately for each `gamma`.
pub fn pr_optimal_k(d: usize, gamma: f64) -> Result<f64> {
    let v = var_coef(d, gamma)?;
    let b = bias_coef(d, gamma)?;
    let df = d as f64;
    Ok(v.powf(4.0 / (df + 4.0)) * b.powf(df / (df + 4.0)))
}

/// Risk of optimally weighted NN over interpolated NN, each at its own optimal `k`.
pub fn ownn_ratio(d: usize, gamma: f64) -> Result<f64> {
    let pr = pr_optimal_k(d, gamma)?;
    let df = d as f64;
    let ownn = 2f64.powf(4.0 / (df + 4.0)) * ((df + 2.0) / (df + 4.0)).powf((2.0 * df + 4.0) / (df + 4.0));
    Ok(ownn / pr)
}

/// Instability ratio under a shared `k`; never below one.
pub fn cis_ratio_same_k(d: usize, gamma: f64) -> Result<f64> {
    Ok(var_coef(d, gamma)?.sqrt())
}

/// Instability ratio when each method uses its own optimal `k`.
pub fn cis_ratio_optimal_k(d: usize, gamma: f64) -> Result<f64> {
    Ok(pr_optimal_k(d, gamma)?.sqrt())
}

/// How `k` is chosen when comparing against k-NN.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    /// Both methods use the `k` that is optimal for k-NN.
    SameK,
    /// Each `gamma` gets its own optimal `k`.
    OptimalK,
}

/// The closed-form curves exposed to the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryCurve {
    Pr,
    PrOpt,
    Cis,
    CisOpt,
    Ownn,
}

impl TheoryCurve {
    pub fn eval(self, d: usize, gamma: f64) -> Result<f64> {
        match self {
            TheoryCurve::Pr => pr_same_k(d, gamma),
            TheoryCurve::PrOpt => pr_optimal_k(d, gamma),
            TheoryCurve::Cis => cis_ratio_same_k(d, gamma),
            TheoryCurve::CisOpt => cis_ratio_optimal_k(d, gamma),
            TheoryCurve::Ownn => ownn_ratio(d, gamma),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TheoryCurve::Pr => "pr",
            TheoryCurve::PrOpt => "pr_opt",
            TheoryCurve::Cis => "cis",
            TheoryCurve::CisOpt => "cis_opt",
            TheoryCurve::Ownn => "ownn",
        }
    }
}

impl std::str::FromStr for TheoryCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pr" => TheoryCurve::Pr,
            "pr_opt" => TheoryCurve::PrOpt,
            "cis" => TheoryCurve::Cis,
            "cis_opt" => TheoryCurve::CisOpt,
            "ownn" => TheoryCurve::Ownn,
            other => return Err(Error::Config(format!("unknown theory curve `{other}`"))),
        })
    }
}

/// A closed-form ratio evaluated on a grid of interpolation levels.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioCurve {
    pub d: usize,
    pub gammas: Vec<f64>,
    pub values: Vec<f64>,
}

impl RatioCurve {
    pub fn evaluate(curve: TheoryCurve, d: usize, gammas: Vec<f64>) -> Result<Self> {
        let values = gammas.iter().map(|&g| curve.eval(d, g)).collect::<Result<_>>()?;
        Ok(Self { d, gammas, values })
    }

    /// Whether each grid point lies in `[0, d/3)`.
    pub fn in_theory_range(&self) -> Vec<bool> {
        let limit = self.d as f64 / 3.0;
        self.gammas.iter().map(|&g| g < limit).collect()
    }
}

const SCAN_STEP: f64 = 1e-3;
const ROOT_TOL: f64 = 1e-12;

/// Largest `gamma_d` such that the ratio stays below one on `(0, gamma_d)`,
/// capped at `d/3`.
///
/// The ratio starts at one, dips, and crosses one again before the pole at
/// `d/2`. The crossing is bracketed by a scan with step `1e-3` and refined by
/// bisection.
pub fn gamma_threshold(d: usize, which: KChoice) -> Result<f64> {
    let ratio = |g: f64| match which {
        KChoice::SameK => pr_same_k(d, g),
        KChoice::OptimalK => pr_optimal_k(d, g),
    };
    let cap = d as f64 / 3.0;
    let pole = d as f64 / 2.0;
    let mut lo = 0.0;
    let mut hi = None;
    let mut j = 1;
    loop {
        let g = j as f64 * SCAN_STEP;
        if g >= pole {
            break;
        }
        if ratio(g)? >= 1.0 {
            hi = Some(g);
            break;
        }
        lo = g;
        j += 1;
    }
    // Past the last grid point the variance pole guarantees a crossing.
    let mut hi = hi.unwrap_or(pole);
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid >= pole || ratio(mid)? >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(cap.min(0.5 * (lo + hi)))
}

/// First-order criterion for a general weight family `phi(x, gamma)` with
/// `phi(x, 0) = 1`:
///
/// `Delta = (int phi' x^{d+1})(int x^{d-1}) - (int phi' x^{d-1})(int x^{d+1})`,
///
/// all integrals over `(0, 1)` and `phi'` the `gamma`-derivative at zero.
/// A negative value means a small amount of the scheme lowers the
/// asymptotic risk. Integrals are computed to `1e-9`.
pub fn delta_criterion(phi_prime: impl Fn(f64) -> f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::DomainError("dimension must be at least 1".into()));
    }
    const TOL: f64 = 1e-9;
    let df = d as f64;
    let upper = quadrature::integrate_unit_weighted(&phi_prime, df + 1.0, TOL)?.value;
    let lower = quadrature::integrate_unit_weighted(&phi_prime, df - 1.0, TOL)?.value;
    Ok(upper / df - lower / (df + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coefficients_at_zero_and_half() {
        for d in 1..30 {
            assert_eq!(var_coef(d, 0.0).unwrap(), 1.0);
            assert_eq!(bias_coef(d, 0.0).unwrap(), 1.0);
        }
        assert_abs_diff_eq!(var_coef(2, 0.5).unwrap(), 1.125, epsilon = 1e-15);
        assert_abs_diff_eq!(bias_coef(2, 0.5).unwrap(), 36.0 / 49.0, epsilon = 1e-15);
    }

    #[test]
    fn poles_are_domain_errors() {
        assert!(matches!(var_coef(2, 1.0), Err(Error::DomainError(_))));
        assert!(matches!(pr_same_k(4, 2.0), Err(Error::DomainError(_))));
        assert!(matches!(bias_coef(2, 4.0), Err(Error::DomainError(_))));
        assert!(bias_coef(2, 3.9).is_ok());
        assert!(matches!(pr_optimal_k(2, -0.1), Err(Error::DomainError(_))));
        assert!(matches!(ownn_ratio(2, f64::NAN), Err(Error::DomainError(_))));
        assert!(matches!(var_coef(0, 0.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn cis_same_k_value() {
        assert_abs_diff_eq!(cis_ratio_same_k(4, 1.0).unwrap(), (9.0f64 / 8.0).sqrt(), epsilon = 1e-15);
        assert_eq!(cis_ratio_optimal_k(3, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn thresholds() {
        assert_eq!(gamma_threshold(4, KChoice::OptimalK).unwrap(), 4.0 / 3.0);
        assert!(gamma_threshold(2, KChoice::OptimalK).unwrap() < 2.0 / 3.0);
        for d in 1..=20 {
            let same = gamma_threshold(d, KChoice::SameK).unwrap();
            let opt = gamma_threshold(d, KChoice::OptimalK).unwrap();
            assert!(same <= opt, "d={d}");
            if same < d as f64 / 3.0 {
                // A genuine root: the ratio crosses one there.
                assert_abs_diff_eq!(pr_same_k(d, same).unwrap(), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn delta_zero_for_constant_family() {
        assert_eq!(delta_criterion(|_| 0.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn curve_parsing() {
        assert_eq!("pr_opt".parse::<TheoryCurve>().unwrap(), TheoryCurve::PrOpt);
        assert!("nope".parse::<TheoryCurve>().is_err());
        let c = RatioCurve::evaluate(TheoryCurve::Pr, 3, vec![0.0, 0.5, 1.0, 1.2]).unwrap();
        assert_eq!(c.values[0], 1.0);
        assert_eq!(c.in_theory_range(), vec![true, true, false, false]);
    }
}
