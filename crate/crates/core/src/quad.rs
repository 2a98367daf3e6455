//! Adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Subdivision budget per call.
pub const MAX_SUBDIVISIONS: usize = 200_000;

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position for a deterministic order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<Panel> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kron * h;
    if !value.is_finite() {
        return Err(Error::NonConvergence(format!("integrand is not finite on [{a}, {b}]")));
    }
    Ok(Panel {
        a,
        b,
        value,
        error: ((kron - gauss) * h).abs(),
    })
}

/// `∫_a^b f` with estimated absolute error at most `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_detailed(f, a, b, tol).map(|q| q.value)
}

/// Like [`integrate`], also returning the error estimate and the number of
/// evaluations. Panels are refined largest-error first.
pub fn integrate_detailed(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::InvalidParameter(format!("need finite a <= b, got [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let f = &f as &dyn Fn(f64) -> f64;
    let first = gk15(f, a, b)?;
    let mut evaluations = 15;
    let mut error = first.error;
    let mut heap = BinaryHeap::from([first]);
    let mut splits = 0;
    while error > tol {
        let worst = heap.pop().expect("heap holds every panel");
        let mid = 0.5 * (worst.a + worst.b);
        if splits >= MAX_SUBDIVISIONS || !(mid > worst.a && mid < worst.b) {
            return Err(Error::NonConvergence(format!(
                "quadrature on [{a}, {b}] stalled at error {error:e} (tol {tol:e}) after {splits} subdivisions"
            )));
        }
        let left = gk15(f, worst.a, mid)?;
        let right = gk15(f, mid, worst.b)?;
        evaluations += 30;
        splits += 1;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally so the running total does not drift.
        if splits % 64 == 0 {
            error = heap.iter().map(|p| p.error).sum();
        }
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(Quadrature {
        value: panels.iter().map(|p| p.value).sum(),
        error: panels.iter().map(|p| p.error).sum(),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal() {
        let v = integrate(|t| 1.0 / t, 1.0, std::f64::consts::E, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_and_empty() {
        assert_eq!(integrate(|_| 0.0, 0.0, 1.0, 1e-10).unwrap(), 0.0);
        assert_eq!(integrate(|t| t, 2.0, 2.0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn singular_endpoint() {
        let v = integrate(|t: f64| 1.0 / t.sqrt(), 0.0, 1.0, 1e-8).unwrap();
        assert!((v - 2.0).abs() < 1e-7);
    }

    #[test]
    fn bad_arguments() {
        assert!(integrate(|t| t, 1.0, 0.0, 1e-8).is_err());
        assert!(integrate(|t| t, 0.0, 1.0, 0.0).is_err());
        assert!(matches!(
            integrate(|t| 1.0 / t, -1.0, 1.0, 1e-8),
            Err(Error::NonConvergence(_))
        ));
    }

    #[test]
    fn deterministic() {
        let f = |t: f64| (t * t).sin() / (1.0 + t);
        let a = integrate_detailed(f, 0.0, 20.0, 1e-10).unwrap();
        let b = integrate_detailed(f, 0.0, 20.0, 1e-10).unwrap();
        assert_eq!(a, b);
        assert!(a.error <= 1e-10);
    }
}
