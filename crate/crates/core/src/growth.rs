//! Order, lower order and type of non-decreasing functions, and zig-zag
//! functions with prescribed order and lower order.
//!
//! Everything is done in log-log coordinates `x = log r`, `y = log T(r)`,
//! so functions like `exp(r)` or zig-zags reaching `x = 10^300` stay finite.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::domain::{log_grid, Chart, Domain};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::func::ScalarFn;
use crate::num::sampled_extrema;

/// Ratios `log T(r)/log r` at or above this value count as infinite order.
pub const ORDER_INFINITY_THRESHOLD: f64 = 1e6;
/// Zig-zags are built until `log r` passes this point.
pub const ZIGZAG_X_MAX: f64 = 1e300;
pub const MONOTONE_CHECK_POINTS: usize = 1000;

/// Piecewise linear `y(x)` through `(xs[i], ys[i])`, with `y = ell·x` left of
/// the first vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub ell: f64,
    /// `None` for infinite order.
    pub big_l: Option<f64>,
}

impl Polyline {
    pub fn eval(&self, x: f64) -> f64 {
        let (xs, ys) = (&self.xs, &self.ys);
        if x <= xs[0] {
            return self.ell * x;
        }
        let i = xs.partition_point(|&v| v <= x);
        if i >= xs.len() {
            return if x == xs[xs.len() - 1] { ys[ys.len() - 1] } else { f64::NAN };
        }
        let (x1, y1, x2, y2) = (xs[i - 1], ys[i - 1], xs[i], ys[i]);
        if y2 == y1 {
            y1
        } else {
            y1 + (y2 - y1) / (x2 - x1) * (x - x1)
        }
    }

    fn scaled(&self, c: f64) -> Polyline {
        Polyline {
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|y| c * y).collect(),
            ell: c * self.ell,
            big_l: self.big_l.map(|l| c * l),
        }
    }

    pub fn breakpoints_between(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.xs.iter().copied().filter(|&x| x > lo && x <= hi).collect()
    }
}

/// Zig-zag construction: from `(x0, ell·x0)` alternately rise with slope `L`
/// until `y/x = L − δ_n`, then stay flat until `y/x = ell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZigzagParams {
    pub ell: f64,
    /// `None` builds an infinite-order zig-zag whose `n`-th rise has slope
    /// `ell + n` and ends at ratio `ell + n − δ_n`.
    pub big_l: Option<f64>,
    pub x0: f64,
}

impl ZigzagParams {
    pub fn new(ell: f64, big_l: f64) -> Self {
        ZigzagParams {
            ell,
            big_l: Some(big_l),
            x0: 1.0,
        }
    }

    /// Default rule `δ_n = min(1, L − ell)/(n + 1)`.
    pub fn default_delta(&self, n: u32) -> f64 {
        let band = self.big_l.map_or(1.0, |l| (l - self.ell).min(1.0));
        band / f64::from(n + 1)
    }
}

pub fn make_zigzag(p: ZigzagParams) -> Result<GrowthFunction> {
    make_zigzag_with(p, |n| p.default_delta(n))
}

pub fn make_zigzag_with(p: ZigzagParams, delta: impl Fn(u32) -> f64) -> Result<GrowthFunction> {
    let ZigzagParams { ell, big_l, x0 } = p;
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidParameter(format!("need ell > 0, got {ell}")));
    }
    if let Some(l) = big_l {
        if !(l > ell && l.is_finite()) {
            return Err(Error::InvalidParameter(format!("need ell < L < inf, got ell = {ell}, L = {l}")));
        }
    }
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::InvalidParameter(format!("need x0 > 0, got {x0}")));
    }
    let (mut xs, mut ys) = (vec![x0], vec![ell * x0]);
    let mut n = 1u32;
    while *xs.last().unwrap() <= ZIGZAG_X_MAX {
        let (x1, y1) = (*xs.last().unwrap(), *ys.last().unwrap());
        let slope = big_l.unwrap_or(ell + f64::from(n));
        let d = delta(n);
        if !(d > 0.0 && d < slope - ell) {
            return Err(Error::InvalidParameter(format!(
                "delta_{n} = {d} outside (0, {})",
                slope - ell
            )));
        }
        // (y1 + slope (x − x1)) / x = slope − d
        let x_rise = (slope * x1 - y1) / d;
        let y_rise = y1 + slope * (x_rise - x1);
        let x_flat = y_rise / ell;
        if !x_flat.is_finite() {
            break;
        }
        xs.extend([x_rise, x_flat]);
        ys.extend([y_rise, y_rise]);
        n += 1;
    }
    let poly = Polyline { xs, ys, ell, big_l };
    let name = match big_l {
        Some(l) => format!("zigzag:{ell},{l}"),
        None => format!("zigzag:{ell},inf"),
    };
    Ok(GrowthFunction::from_polyline(name, poly))
}

type LogFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A positive non-decreasing function, accessed through `x ↦ log T(e^x)`.
#[derive(Clone)]
pub struct GrowthFunction {
    name: String,
    log_fn: LogFn,
    polyline: Option<Arc<Polyline>>,
    start_x: f64,
}

impl fmt::Debug for GrowthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrowthFunction({})", self.name)
    }
}

impl GrowthFunction {
    /// `log_fn` maps `log r` to `log T(r)` (NaN where `T ≤ 0`).
    pub fn new(name: impl Into<String>, start_x: f64, log_fn: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        GrowthFunction {
            name: name.into(),
            log_fn: Arc::new(log_fn),
            polyline: None,
            start_x,
        }
    }

    /// `T(r)` given as an expression in `t`, sampled for `r ≥ e`.
    pub fn from_expr(expr: Expression) -> Self {
        let name = expr.source().to_string();
        Self::new(name, 1.0, move |x| match expr.evaluate_log(x) {
            Ok(v) if v.sign > 0 => v.ln_abs,
            _ => f64::NAN,
        })
    }

    pub fn from_polyline(name: impl Into<String>, poly: Polyline) -> Self {
        let poly = Arc::new(poly);
        let p = poly.clone();
        GrowthFunction {
            name: name.into(),
            log_fn: Arc::new(move |x| p.eval(x)),
            start_x: poly.xs[0].min(1.0),
            polyline: Some(poly),
        }
    }

    /// `T^c`.
    pub fn powered(&self, c: f64) -> Self {
        let f = self.log_fn.clone();
        GrowthFunction {
            name: format!("({})^{c}", self.name),
            log_fn: Arc::new(move |x| c * f(x)),
            polyline: self.polyline.as_ref().map(|p| Arc::new(p.scaled(c))),
            start_x: self.start_x,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start_x(&self) -> f64 {
        self.start_x
    }

    pub fn with_start_x(mut self, x: f64) -> Self {
        self.start_x = x;
        self
    }

    pub fn log_value(&self, x: f64) -> f64 {
        (self.log_fn)(x)
    }

    pub fn polyline(&self) -> Option<&Polyline> {
        self.polyline.as_deref()
    }

    /// `(ell, L)` known from the construction.
    pub fn prescribed_orders(&self) -> Option<(f64, Option<f64>)> {
        self.polyline.as_ref().map(|p| (p.ell, p.big_l))
    }

    /// Kinks of `y(x)` in `(lo, hi]`.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.polyline
            .as_ref()
            .map(|p| p.breakpoints_between(lo, hi))
            .unwrap_or_default()
    }

    /// `φ(r) = log T(r)/log r` as a scalar function.
    pub fn order_ratio(&self) -> GrowthRatio {
        GrowthRatio {
            t: self.clone(),
            rho: None,
        }
    }

    /// `log(T(r)/r^ρ)` as a scalar function.
    pub fn log_type_ratio(&self, rho: f64) -> GrowthRatio {
        GrowthRatio {
            t: self.clone(),
            rho: Some(rho),
        }
    }

    /// Spot check on at least [`MONOTONE_CHECK_POINTS`] log-spaced points.
    pub fn check_monotone(&self, cutoff_x: f64) -> Result<()> {
        let grid = self.sample_grid(cutoff_x);
        let mut prev = f64::NEG_INFINITY;
        for &x in &grid {
            let y = self.log_value(x);
            if y.is_nan() {
                return Err(Error::NonPositive { ln_r: x });
            }
            if y < prev - 1e-12 * prev.abs().max(1.0) {
                return Err(Error::NonMonotone { ln_r: x });
            }
            prev = prev.max(y);
        }
        Ok(())
    }

    fn sample_grid(&self, cutoff_x: f64) -> Vec<f64> {
        let start = self.start_x;
        let range = cutoff_x - start;
        let decades = (range.log10() + 3.0).clamp(9.0, 320.0);
        let per_decade = ((MONOTONE_CHECK_POINTS as f64 / decades).ceil() as usize).max(64);
        let mut grid = log_grid(start, cutoff_x, per_decade, decades);
        let tail = range.min(64.0);
        grid.extend((0..=4096).map(|k| cutoff_x - tail + tail * k as f64 / 4096.0));
        grid.extend(self.breakpoints(start, cutoff_x));
        grid.retain(|&x| x > start && x <= cutoff_x);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }

    /// Candidate extrema of `h(x, y)`, in order, with the cutoff itself last.
    /// Sampled functions only contribute extrema from the upper half of
    /// `(start, cutoff]` in `log r`.
    fn candidate_extrema(&self, cutoff_x: f64, h: impl Fn(f64, f64) -> f64) -> Vec<(f64, f64)> {
        let value = |x: f64| h(x, self.log_value(x));
        let mut out: Vec<(f64, f64)> = Vec::new();
        if let Some(p) = &self.polyline {
            out.extend(
                p.breakpoints_between(self.start_x, cutoff_x)
                    .into_iter()
                    .filter(|&x| x < cutoff_x)
                    .map(|x| (x, value(x))),
            );
        } else {
            // extrema far below the cutoff say nothing about limsup/liminf
            let from = self.start_x + 0.5 * (cutoff_x - self.start_x);
            let grid: Vec<f64> = self.sample_grid(cutoff_x).into_iter().filter(|&x| x >= from).collect();
            out.extend(sampled_extrema(&value, &grid));
        }
        out.push((cutoff_x, value(cutoff_x)));
        out
    }
}

/// `log T(r)/log r` or `log(T(r)/r^ρ)` seen as a function of `r`.
#[derive(Debug, Clone)]
pub struct GrowthRatio {
    t: GrowthFunction,
    rho: Option<f64>,
}

impl GrowthRatio {
    pub fn at_ln_r(&self, x: f64) -> f64 {
        let y = self.t.log_value(x);
        match self.rho {
            None => y / x,
            Some(rho) => y - rho * x,
        }
    }
}

impl ScalarFn for GrowthRatio {
    fn eval(&self, r: f64) -> f64 {
        self.at_ln_r(r.ln())
    }

    fn eval_coord(&self, domain: &Domain, u: f64) -> f64 {
        self.at_ln_r(domain.ln_r(u))
    }

    fn breakpoints(&self, domain: &Domain, lo: f64, hi: f64) -> Vec<f64> {
        self.t
            .breakpoints(domain.ln_r(lo), domain.ln_r(hi))
            .into_iter()
            .map(|x| domain.coord_from_ln_r(x))
            .collect()
    }

    fn describe(&self) -> String {
        match self.rho {
            None => format!("log({})/log(t)", self.t.name),
            Some(rho) => format!("log(({})/t^{rho})", self.t.name),
        }
    }
}

impl ScalarFn for GrowthFunction {
    fn eval(&self, r: f64) -> f64 {
        self.log_value(r.ln()).exp()
    }

    fn eval_coord(&self, domain: &Domain, u: f64) -> f64 {
        match domain.chart {
            Chart::Identity => self.eval(u),
            Chart::Log => self.log_value(u).exp(),
        }
    }

    fn breakpoints(&self, domain: &Domain, lo: f64, hi: f64) -> Vec<f64> {
        self.breakpoints(domain.ln_r(lo), domain.ln_r(hi))
            .into_iter()
            .map(|x| domain.coord_from_ln_r(x))
            .collect()
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// A growth index that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Order {
    Finite(f64),
    Infinite { ratio_at_cutoff: f64 },
}

impl Order {
    pub fn finite(self) -> Option<f64> {
        match self {
            Order::Finite(v) => Some(v),
            Order::Infinite { .. } => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Order::Infinite { .. })
    }

    /// The value, with `+∞` for infinite orders.
    pub fn value(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(v) => write!(f, "{v}"),
            Order::Infinite { .. } => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEstimate {
    pub upper_order: Order,
    pub lower_order: Order,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub type_value: Option<Order>,
    /// `log r` at the cutoff.
    pub cutoff: f64,
    pub tail_window: usize,
    pub eval_points: usize,
    pub low_confidence: bool,
    /// `(log r, ratio)` at every candidate extremum.
    #[serde(skip)]
    pub trajectory: Vec<(f64, f64)>,
}

fn check_common(t: &GrowthFunction, cutoff_x: f64, tail_window: usize) -> Result<()> {
    if tail_window < 4 {
        return Err(Error::InvalidParameter(format!(
            "tail window must be at least 4, got {tail_window}"
        )));
    }
    if !(cutoff_x > t.start_x) || cutoff_x.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "cutoff log r = {cutoff_x} must exceed {}",
            t.start_x
        )));
    }
    t.check_monotone(cutoff_x)
}

fn window(c: &[(f64, f64)], tail_window: usize) -> (f64, f64) {
    let tail = &c[c.len().saturating_sub(tail_window)..];
    let hi = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    (hi, lo)
}

fn as_order(v: f64, ratio_at_cutoff: f64) -> Order {
    if v >= ORDER_INFINITY_THRESHOLD || v.is_nan() {
        Order::Infinite { ratio_at_cutoff }
    } else {
        Order::Finite(v)
    }
}

/// Order and lower order from the last `tail_window` extrema of
/// `log T(r)/log r` below `r = e^{cutoff_x}`.
pub fn estimate_orders(t: &GrowthFunction, cutoff_x: f64, tail_window: usize) -> Result<OrderEstimate> {
    check_common(t, cutoff_x, tail_window)?;
    let cands = t.candidate_extrema(cutoff_x, |x, y| y / x);
    let (hi, lo) = window(&cands, tail_window);
    let at_cut = cands.last().unwrap().1;
    Ok(OrderEstimate {
        upper_order: as_order(hi, at_cut),
        lower_order: as_order(lo, at_cut),
        type_value: None,
        cutoff: cutoff_x,
        tail_window,
        eval_points: cands.len(),
        low_confidence: cands.len() < tail_window,
        trajectory: cands,
    })
}

/// Type `limsup T(r)/r^ρ` from the last `tail_window` extrema.
pub fn estimate_type(t: &GrowthFunction, rho: f64, cutoff_x: f64, tail_window: usize) -> Result<Order> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 0 < rho < inf, got {rho}")));
    }
    check_common(t, cutoff_x, tail_window)?;
    let cands = t.candidate_extrema(cutoff_x, |x, y| y - rho * x);
    let (hi, _) = window(&cands, tail_window);
    let at_cut = cands.last().unwrap().1.exp();
    let v = hi.exp();
    Ok(if v.is_finite() { Order::Finite(v) } else { Order::Infinite { ratio_at_cutoff: at_cut } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr(s: &str) -> GrowthFunction {
        GrowthFunction::from_expr(Expression::parse(s).unwrap())
    }

    #[test]
    fn power_has_constant_order() {
        let e = estimate_orders(&expr("t^3"), 200.0, 8).unwrap();
        assert!((e.upper_order.value() - 3.0).abs() < 1e-9, "{e:?}");
        assert!((e.lower_order.value() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn exp_has_infinite_order() {
        let e = estimate_orders(&expr("exp(t)"), 50.0, 8).unwrap();
        assert!(e.upper_order.is_infinite() && e.lower_order.is_infinite(), "{e:?}");
    }

    #[test]
    fn zigzag_breakpoints() {
        let z = make_zigzag(ZigzagParams::new(1.0, 3.0)).unwrap();
        let p = z.polyline().unwrap();
        assert_eq!(&p.xs[..5], &[1.0, 4.0, 10.0, 60.0, 160.0]);
        assert_eq!(&p.ys[..5], &[1.0, 10.0, 10.0, 160.0, 160.0]);
        assert_eq!(p.ys[1] / p.xs[1], 2.5);
        assert!(p.ys.windows(2).all(|w| w[1] >= w[0]));
        assert!(*p.xs.last().unwrap() > ZIGZAG_X_MAX);
        for (i, (&x, &y)) in p.xs.iter().zip(&p.ys).enumerate().skip(1) {
            assert_eq!(z.log_value(x), y);
            if i % 2 == 0 {
                assert!((y / x - 1.0).abs() < 1e-12);
            } else {
                let n = i.div_ceil(2);
                assert!((y / x - (3.0 - 1.0 / (n as f64 + 1.0))).abs() < 1e-12);
            }
        }
        assert!(make_zigzag(ZigzagParams::new(2.0, 2.0)).is_err());
    }

    #[test]
    fn zigzag_orders() {
        let z = make_zigzag(ZigzagParams::new(1.0, 3.0)).unwrap();
        // breakpoints below 1e4: ..., (160,160), (1280, 3520), (3520, 3520)
        let e = estimate_orders(&z, 1e4, 8).unwrap();
        assert_eq!(e.upper_order, Order::Finite(2.75));
        assert_eq!(e.lower_order, Order::Finite(1.0));
        let e = estimate_orders(&z, 1e300, 8).unwrap();
        assert!((e.upper_order.value() - 3.0).abs() < 2e-2);
        assert_eq!(e.lower_order, Order::Finite(1.0));
    }

    #[test]
    fn types() {
        let t = estimate_type(&expr("5*t^2"), 2.0, 200.0, 8).unwrap();
        assert!((t.value() - 5.0).abs() < 1e-9, "{t:?}");
        let t = estimate_type(&expr("t^2*(2+sin(log(t)))"), 2.0, 400.0, 8).unwrap();
        assert!((t.value() - 3.0).abs() < 1e-2, "{t:?}");
        let t = estimate_type(&expr("t"), 2.0, 200.0, 8).unwrap();
        assert!(t.value() < 1e-80);
    }

    #[test]
    fn nonmonotone_and_nonpositive_rejected() {
        assert!(matches!(
            estimate_orders(&expr("t^2*(2+sin(t))"), 50.0, 8),
            Err(Error::NonMonotone { .. })
        ));
        assert!(matches!(
            estimate_orders(&expr("log(t)-2"), 50.0, 8),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn infinite_order_zigzag() {
        let p = ZigzagParams {
            ell: 1.0,
            big_l: None,
            x0: 1.0,
        };
        let z = make_zigzag(p).unwrap();
        let e = estimate_orders(&z, 1e300, 8).unwrap();
        assert_eq!(e.lower_order, Order::Finite(1.0));
        assert!(e.upper_order.value() > 50.0, "{e:?}");
    }
}
