//! Globally adaptive 15-point Gauss–Kronrod quadrature.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 2000;

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over the finite interval `[a, b]`, bisecting the piece with
/// the largest error estimate until the total estimate is below `tol`.
/// The endpoints themselves are never evaluated.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Integral> {
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let mut total_err = error;
    while total_err > tol && heap.len() < MAX_INTERVALS {
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        total_err += le + re - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
    }
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    if !value.is_finite() || error > tol {
        return Err(Error::QuadratureFailure { estimate: value, error });
    }
    Ok(Integral { value, error })
}

/// `int_0^1 f(x) x^m dx` for integrands with an integrable singularity at
/// zero, such as `-ln x`.
///
/// Substituting `x = e^-u` turns logarithmic blow-up into polynomial growth
/// against exponential decay on `[0, inf)`; `u = s / (1 - s)` then maps that
/// back onto `[0, 1)`.
pub fn integrate_unit_weighted(f: impl Fn(f64) -> f64, m: f64, tol: f64) -> Result<Integral> {
    let g = |s: f64| {
        let u = s / (1.0 - s);
        let jac = 1.0 / ((1.0 - s) * (1.0 - s));
        let x = (-u).exp();
        let w = (-(m + 1.0) * u).exp();
        if w == 0.0 {
            0.0
        } else {
            f(x) * w * jac
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_transcendentals() {
        let r = integrate(|x| x * x, 0.0, 3.0, 1e-13).unwrap();
        assert!((r.value - 9.0).abs() < 1e-12);
        let r = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_singularity() {
        // int_0^1 (-ln x) x^m dx = 1 / (m + 1)^2
        for m in 0..12 {
            let r = integrate_unit_weighted(|x: f64| -x.ln(), m as f64, 1e-13).unwrap();
            let exact = 1.0 / ((m + 1) as f64).powi(2);
            assert!((r.value - exact).abs() < 1e-12, "m={m}: {} vs {exact}", r.value);
        }
        // int_0^1 ln(x)^2 dx = 2
        let r = integrate_unit_weighted(|x: f64| x.ln().powi(2), 0.0, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn reports_failure() {
        // Non-integrable: 1/x on (0, 1].
        assert!(matches!(
            integrate_unit_weighted(|x: f64| 1.0 / x, 0.0, 1e-9),
            Err(Error::QuadratureFailure { .. })
        ));
    }
}
