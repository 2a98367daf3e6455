//! Real functions of one real variable, evaluated in `r` or in chart
//! coordinates. Evaluation failures surface as NaN.

use std::sync::Arc;

use crate::domain::{Chart, Domain};
use crate::expr::Expression;

pub trait ScalarFn: Send + Sync {
    fn eval(&self, r: f64) -> f64;

    /// Value at the point with chart coordinate `u`.
    fn eval_coord(&self, domain: &Domain, u: f64) -> f64 {
        self.eval(domain.to_r(u))
    }

    /// Chart coordinates in `[lo, hi]` where the function has kinks or jumps.
    /// Samplers add these to their grids.
    fn breakpoints(&self, _domain: &Domain, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Half period in `r` of an oscillating factor, if one is known.
    fn half_period(&self) -> Option<f64> {
        None
    }

    fn describe(&self) -> String;
}

pub type SharedFn = Arc<dyn ScalarFn>;

impl ScalarFn for Expression {
    fn eval(&self, r: f64) -> f64 {
        self.evaluate(r).unwrap_or(f64::NAN)
    }

    fn eval_coord(&self, domain: &Domain, u: f64) -> f64 {
        match domain.chart {
            Chart::Identity => self.eval(u),
            Chart::Log => self.evaluate_log(u).map(|v| v.to_f64()).unwrap_or(f64::NAN),
        }
    }

    fn half_period(&self) -> Option<f64> {
        self.half_period_hint()
    }

    fn describe(&self) -> String {
        self.source().to_string()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl ScalarFn for Constant {
    fn eval(&self, _r: f64) -> f64 {
        self.0
    }

    fn eval_coord(&self, _domain: &Domain, _u: f64) -> f64 {
        self.0
    }

    fn describe(&self) -> String {
        format!("{}", self.0)
    }
}

/// Indicator of `⋃_{n ≥ 1} [n, n + 2^{−n}]`: no limit at infinity, but
/// limit 0 in linear density.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitBumps;

impl UnitBumps {
    fn width(n: f64) -> f64 {
        (-n).exp2()
    }
}

impl ScalarFn for UnitBumps {
    fn eval(&self, r: f64) -> f64 {
        let n = r.floor();
        if n >= 1.0 && r - n <= Self::width(n) {
            1.0
        } else {
            0.0
        }
    }

    fn breakpoints(&self, domain: &Domain, lo: f64, hi: f64) -> Vec<f64> {
        let (r_lo, r_hi) = (domain.to_r(lo).max(1.0), domain.to_r(hi));
        if !r_hi.is_finite() || r_hi - r_lo > 1e7 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut n = r_lo.ceil();
        while n <= r_hi {
            out.push(domain.to_coord(n));
            out.push(domain.to_coord(n + Self::width(n)));
            n += 1.0;
        }
        out
    }

    fn describe(&self) -> String {
        "bumps".into()
    }
}

type BreakRule = Arc<dyn Fn(&Domain, f64, f64) -> Vec<f64> + Send + Sync>;

/// A closure with an optional breakpoint rule, mostly for tests and
/// composite predicates.
pub struct FnScalar<F> {
    f: F,
    name: String,
    breaks: Option<BreakRule>,
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnScalar<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnScalar {
            f,
            name: name.into(),
            breaks: None,
        }
    }

    pub fn with_breakpoints(
        mut self,
        rule: impl Fn(&Domain, f64, f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.breaks = Some(Arc::new(rule));
        self
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> ScalarFn for FnScalar<F> {
    fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    fn breakpoints(&self, domain: &Domain, lo: f64, hi: f64) -> Vec<f64> {
        self.breaks.as_ref().map(|b| b(domain, lo, hi)).unwrap_or_default()
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// A function given directly in chart coordinates of a fixed domain (e.g. a
/// ratio built from a growth function in `log r`).
pub struct CoordFn<F> {
    f: F,
    name: String,
    breaks: Vec<f64>,
}

impl<F: Fn(f64) -> f64 + Send + Sync> CoordFn<F> {
    /// `f` takes `log r`; `breaks` are in `log r` as well.
    pub fn new(name: impl Into<String>, f: F, breaks: Vec<f64>) -> Self {
        CoordFn {
            f,
            name: name.into(),
            breaks,
        }
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> ScalarFn for CoordFn<F> {
    fn eval(&self, r: f64) -> f64 {
        (self.f)(r.ln())
    }

    fn eval_coord(&self, domain: &Domain, u: f64) -> f64 {
        (self.f)(domain.ln_r(u))
    }

    fn breakpoints(&self, domain: &Domain, lo: f64, hi: f64) -> Vec<f64> {
        let (x_lo, x_hi) = (domain.ln_r(lo), domain.ln_r(hi));
        self.breaks
            .iter()
            .filter(|&&x| x >= x_lo && x <= x_hi)
            .map(|&x| domain.coord_from_ln_r(x))
            .collect()
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bumps_indicator() {
        let b = UnitBumps;
        assert_eq!(b.eval(1.0), 1.0);
        assert_eq!(b.eval(1.5), 1.0);
        assert_eq!(b.eval(1.6), 0.0);
        assert_eq!(b.eval(3.1), 1.0);
        assert_eq!(b.eval(3.2), 0.0);
        assert_eq!(b.eval(0.5), 0.0);
        let d = Domain::linear_infinite(1.0).unwrap();
        let pts = b.breakpoints(&d, 1.0, 4.0);
        assert_eq!(pts, vec![1.0, 1.5, 2.0, 2.25, 3.0, 3.125, 4.0, 4.0625]);
    }

    #[test]
    fn expression_in_log_chart() {
        let e = Expression::parse("log(t)^2").unwrap();
        let d = Domain::log_infinite(1.0).unwrap();
        assert!((e.eval_coord(&d, 1e4) - 1e8).abs() < 1e-4);
        assert!(e.eval_coord(&d, f64::NAN).is_nan());
    }
}
