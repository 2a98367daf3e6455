//! Upper and lower ψ-densities of interval sets.
//!
//! The density ratio `D(r) = m_ψ(E ∩ [r0, r)) / ψ(r)` increases inside the
//! intervals of `E` and decreases on the gaps, so its local extrema sit at
//! interval endpoints. Estimates take the extreme values of `D` over the
//! last few of those endpoints below a cutoff.

use serde::Serialize;

use crate::domain::{log_grid, Chart, Domain};
use crate::error::{Error, Result};
use crate::intervals::IntervalSet;
use crate::num::ln_add;
use crate::scale::PsiScale;

pub const DEFAULT_TAIL_WINDOW: usize = 8;
/// A final candidate-free stretch this many times longer than the recent
/// periods marks a set that has ended.
pub const STALE_GAP_FACTOR: f64 = 4.0;
pub const CHAIN_SLACK: f64 = 1e-2;
/// Largest admissible change of the ψ-measure between the last two cutoffs
/// when a set is claimed to have finite measure.
pub const MEASURE_CONVERGENCE_TOL: f64 = 1e-6;
pub const ZERO_DENSITY_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Extremum {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint {
    /// Chart coordinate.
    pub coord: f64,
    pub ln_r: f64,
    pub ratio: f64,
    pub kind: Extremum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub upper: f64,
    pub lower: f64,
    /// Chart coordinate of the cutoff.
    pub cutoff: f64,
    pub cutoff_ln_r: f64,
    pub eval_points: usize,
    pub tail_window: usize,
    /// Fewer than `tail_window` candidate extrema were available.
    pub low_confidence: bool,
    #[serde(skip)]
    pub trajectory: Vec<DensityPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Le => "<=",
            Relation::Eq => "=",
        }
    }

    pub fn holds(self, measured: f64, bound: f64, slack: f64) -> bool {
        match self {
            Relation::Ge => measured >= bound - slack,
            Relation::Le => measured <= bound + slack,
            Relation::Eq => (measured - bound).abs() <= slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub id: String,
    pub measured: f64,
    pub bound: f64,
    pub relation: Relation,
    pub slack: f64,
    pub pass: bool,
    /// False when the hypotheses of the checked statement do not hold.
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    pub fn new(id: impl Into<String>, measured: f64, relation: Relation, bound: f64, slack: f64) -> Self {
        BoundReport {
            id: id.into(),
            measured,
            bound,
            relation,
            slack,
            pass: relation.holds(measured, bound, slack),
            applicable: true,
            note: None,
        }
    }

    pub fn inapplicable(id: impl Into<String>, note: impl Into<String>) -> Self {
        BoundReport {
            id: id.into(),
            measured: f64::NAN,
            bound: f64::NAN,
            relation: Relation::Eq,
            slack: 0.0,
            pass: false,
            applicable: false,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Overrides the verdict, e.g. for reports on a predicate rather than an
    /// inequality.
    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

fn check_pair(set: &IntervalSet, s: &PsiScale) -> Result<()> {
    if !set.domain().same_points(s.domain()) {
        return Err(Error::DomainMismatch(format!(
            "set on {} measured with scale on {}",
            set.domain(),
            s.domain()
        )));
    }
    Ok(())
}

fn check_cutoff(set: &IntervalSet, cutoff: f64) -> Result<()> {
    set.domain().check_cutoff(cutoff)?;
    if cutoff > set.extent() {
        return Err(Error::Precondition(format!(
            "set is only materialised up to coordinate {}",
            set.extent()
        )));
    }
    Ok(())
}

/// `log m_ψ(E ∩ [r0, u))`.
pub fn ln_measure(set: &IntervalSet, s: &PsiScale, u: f64) -> f64 {
    set.spans()
        .iter()
        .take_while(|sp| sp.lo < u)
        .fold(f64::NEG_INFINITY, |acc, sp| ln_add(acc, s.ln_increment(sp.lo, sp.hi.min(u))))
}

/// `D(r)` at chart coordinate `u`.
pub fn density_ratio(set: &IntervalSet, s: &PsiScale, u: f64) -> Result<f64> {
    check_pair(set, s)?;
    check_cutoff(set, u)?;
    Ok(ratio(ln_measure(set, s, u), s.ln_psi(u)))
}

fn ratio(ln_m: f64, ln_psi: f64) -> f64 {
    if ln_m == f64::NEG_INFINITY {
        0.0
    } else {
        (ln_m - ln_psi).exp().clamp(0.0, 1.0)
    }
}

/// Density ratio at every candidate extremum up to `cutoff`, in order.
pub fn density_trajectory(set: &IntervalSet, s: &PsiScale, cutoff: f64) -> Result<Vec<DensityPoint>> {
    check_pair(set, s)?;
    check_cutoff(set, cutoff)?;
    let d = set.domain();
    let point = |u: f64, ln_m: f64, kind| DensityPoint {
        coord: u,
        ln_r: d.ln_r(u),
        ratio: ratio(ln_m, s.ln_psi(u)),
        kind,
    };
    let mut out = Vec::new();
    let mut ln_m = f64::NEG_INFINITY;
    let mut cutoff_seen = false;
    for sp in set.spans().iter().take_while(|sp| sp.lo < cutoff) {
        if sp.lo > d.start() {
            out.push(point(sp.lo, ln_m, Extremum::Min));
        }
        let b = sp.hi.min(cutoff);
        ln_m = ln_add(ln_m, s.ln_increment(sp.lo, b));
        out.push(point(b, ln_m, Extremum::Max));
        cutoff_seen = b == cutoff;
    }
    if !cutoff_seen {
        out.push(point(cutoff, ln_m, Extremum::Min));
    }
    Ok(out)
}

/// Upper and lower ψ-density of `set` as seen from `cutoff` (chart
/// coordinate): the max and min of `D` over the last `tail_window`
/// candidate extrema, or the ratio at the cutoff alone once the set has
/// ended (no candidate over a final stretch much longer than its recent
/// gaps, e.g. a bounded set).
pub fn estimate_density(set: &IntervalSet, s: &PsiScale, cutoff: f64, tail_window: usize) -> Result<DensityEstimate> {
    if tail_window < 4 {
        return Err(Error::InvalidParameter(format!(
            "tail window must be at least 4, got {tail_window}"
        )));
    }
    let trajectory = density_trajectory(set, s, cutoff)?;
    let n = trajectory.len();
    let tail = if n >= 2 && has_ended(&trajectory, s, tail_window) {
        &trajectory[n - 1..]
    } else {
        &trajectory[n.saturating_sub(tail_window)..]
    };
    let upper = tail.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    let lower = tail.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    Ok(DensityEstimate {
        upper,
        lower,
        cutoff,
        cutoff_ln_r: set.domain().ln_r(cutoff),
        eval_points: trajectory.len(),
        tail_window,
        low_confidence: trajectory.len() < tail_window,
        trajectory,
    })
}

/// The set shows no candidate over a final stretch (in `log ψ`) longer than
/// [`STALE_GAP_FACTOR`] times the largest period between successive maxima
/// in the window, scaled by the largest growth between consecutive periods.
/// Its old extrema then say nothing about the limit and only the cutoff
/// ratio is used.
fn has_ended(trajectory: &[DensityPoint], s: &PsiScale, tail_window: usize) -> bool {
    let n = trajectory.len();
    let window = &trajectory[n.saturating_sub(tail_window + 1)..n - 1];
    let last_gap = s.ln_psi(trajectory[n - 1].coord) - s.ln_psi(window[window.len() - 1].coord);
    let maxima: Vec<f64> = window
        .iter()
        .filter(|p| p.kind == Extremum::Max)
        .map(|p| s.ln_psi(p.coord))
        .collect();
    let periods: Vec<f64> = maxima.windows(2).map(|w| w[1] - w[0]).collect();
    let longest = periods.iter().copied().fold(0.0, f64::max);
    let growth = periods
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(1.0, f64::max);
    last_gap > STALE_GAP_FACTOR * longest * growth
}

/// Checks `0 ≤ lower_{e^ψ} ≤ lower_ψ ≤ upper_ψ ≤ upper_{e^ψ} ≤ 1`.
pub fn check_chain(set: &IntervalSet, s: &PsiScale, cutoff: f64) -> Result<Vec<BoundReport>> {
    if s.is_lift() {
        return Err(Error::Precondition(format!(
            "`{}` is already an exponential lift",
            s.name()
        )));
    }
    let base = estimate_density(set, s, cutoff, DEFAULT_TAIL_WINDOW)?;
    let lifted = estimate_density(set, &s.exp_lift()?, cutoff, DEFAULT_TAIL_WINDOW)?;
    let name = s.name();
    Ok(vec![
        BoundReport::new(
            format!("chain: lower e^{name} <= lower {name}"),
            lifted.lower,
            Relation::Le,
            base.lower,
            CHAIN_SLACK,
        ),
        BoundReport::new(
            format!("chain: lower {name} <= upper {name}"),
            base.lower,
            Relation::Le,
            base.upper,
            CHAIN_SLACK,
        ),
        BoundReport::new(
            format!("chain: upper {name} <= upper e^{name}"),
            base.upper,
            Relation::Le,
            lifted.upper,
            CHAIN_SLACK,
        ),
        BoundReport::new(
            format!("chain: 0 <= lower e^{name}, upper e^{name} <= 1"),
            lifted.upper,
            Relation::Le,
            1.0,
            CHAIN_SLACK,
        )
        .with_pass(lifted.lower >= -CHAIN_SLACK && lifted.upper <= 1.0 + CHAIN_SLACK),
    ])
}

/// A set of finite ψ-measure has zero upper e^ψ-density.
///
/// `cutoffs` are increasing chart coordinates. The measure must agree to
/// [`MEASURE_CONVERGENCE_TOL`] at the last two cutoffs; the largest e^ψ
/// ratio on each window `(c_{i-1}, c_i]` must not increase and must end
/// below [`ZERO_DENSITY_THRESHOLD`].
pub fn check_finite_measure_zero_density(set: &IntervalSet, s: &PsiScale, cutoffs: &[f64]) -> Result<BoundReport> {
    if cutoffs.len() < 2 || cutoffs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "need at least two increasing cutoffs".into(),
        ));
    }
    check_pair(set, s)?;
    let last = *cutoffs.last().unwrap();
    check_cutoff(set, last)?;
    let m_prev = set.psi_measure_coord(s, cutoffs[cutoffs.len() - 2])?;
    let m_last = set.psi_measure_coord(s, last)?;
    if !((m_last - m_prev).abs() <= MEASURE_CONVERGENCE_TOL) {
        return Err(Error::Precondition(format!(
            "ψ-measure has not converged: {m_prev} then {m_last} at the last two cutoffs"
        )));
    }
    let lifted = s.exp_lift()?;
    let trajectory = density_trajectory(set, &lifted, last)?;
    let mut window_max = Vec::with_capacity(cutoffs.len());
    let mut lo = f64::NEG_INFINITY;
    for &c in cutoffs {
        let at_cut = density_ratio(set, &lifted, c)?;
        let m = trajectory
            .iter()
            .filter(|p| p.coord > lo && p.coord <= c)
            .map(|p| p.ratio)
            .fold(at_cut, f64::max);
        window_max.push(m);
        lo = c;
    }
    let decreasing = window_max.windows(2).all(|w| w[1] <= w[0]);
    let final_value = *window_max.last().unwrap();
    Ok(BoundReport::new(
        format!("lemma2.1: upper e^{} density of a finite-measure set", s.name()),
        final_value,
        Relation::Le,
        ZERO_DENSITY_THRESHOLD,
        0.0,
    )
    .with_pass(decreasing && final_value < ZERO_DENSITY_THRESHOLD)
    .with_note(format!("window maxima {window_max:?}")))
}

/// Result of [`avoid_exceptional`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Avoidance {
    /// Chart coordinate of `r′`.
    pub r_prime: f64,
    pub report: BoundReport,
}

/// Finds `r′` with `f(r) ≤ g(ψ⁻¹(αψ(r)))` on every grid point of
/// `(r′, cutoff]`, given `f ≤ g` off `E` and `α > 1/(1 − upper density E)`.
pub fn avoid_exceptional(
    f: &dyn crate::func::ScalarFn,
    g: &dyn crate::func::ScalarFn,
    set: &IntervalSet,
    s: &PsiScale,
    alpha: f64,
    cutoff: f64,
) -> Result<Avoidance> {
    let est = estimate_density(set, s, cutoff, DEFAULT_TAIL_WINDOW)?;
    let needed = if est.upper < 1.0 { 1.0 / (1.0 - est.upper) } else { f64::INFINITY };
    if !(alpha > needed) {
        return Err(Error::Precondition(format!(
            "alpha = {alpha} must exceed 1/(1 - upper density) = {needed}"
        )));
    }
    let d = *set.domain();
    let grid = spot_grid(&d, set, cutoff, &[f, g]);
    for (name, h) in [("f", f), ("g", g)] {
        let mut prev = f64::NEG_INFINITY;
        for &u in &grid {
            let v = h.eval_coord(&d, u);
            if v < prev - 1e-12 * prev.abs().max(1.0) {
                return Err(Error::Precondition(format!(
                    "{name} decreases near r = {}",
                    d.to_r(u)
                )));
            }
            prev = prev.max(v);
        }
    }
    if let Some(&u) = grid
        .iter()
        .find(|&&u| !set.contains_coord(u) && f.eval_coord(&d, u) > g.eval_coord(&d, u))
    {
        return Err(Error::Precondition(format!(
            "f > g at r = {} outside the exceptional set",
            d.to_r(u)
        )));
    }
    let holds = |u: f64| f.eval_coord(&d, u) <= g.eval_coord(&d, s.shift(u, alpha));
    let last_fail = grid.iter().rposition(|&u| !holds(u));
    let r_prime = match last_fail {
        None => d.start(),
        Some(i) => grid[i],
    };
    let report = BoundReport::new(
        format!("lemma2.2: f(r) <= g(s(r)) beyond r', alpha = {alpha}"),
        r_prime,
        Relation::Le,
        cutoff,
        0.0,
    )
    .with_pass(r_prime < cutoff)
    .with_note(format!("r' = {}", d.to_r(r_prime)));
    Ok(Avoidance { r_prime, report })
}

fn spot_grid(d: &Domain, set: &IntervalSet, cutoff: f64, fns: &[&dyn crate::func::ScalarFn]) -> Vec<f64> {
    let mut grid = sample_grid(d, cutoff, 64);
    for f in fns {
        grid.extend(f.breakpoints(d, d.start(), cutoff));
    }
    for sp in set.spans().iter().take_while(|sp| sp.lo < cutoff) {
        grid.push(sp.lo);
        grid.push(sp.hi.min(cutoff));
    }
    grid.retain(|&u| u > d.start() && u <= cutoff);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Decades spanned by a sampling grid on `(start, cutoff]`: nine, or enough
/// to reach offsets of order `10^{-3}` on long ranges.
pub fn grid_decades(start: f64, cutoff: f64) -> f64 {
    let range = cutoff - start;
    (range.log10() + 3.0).clamp(9.0, 320.0)
}

const MAX_UNIFORM_LOG_POINTS: f64 = (1u64 << 20) as f64;

/// Sample points on `(start, cutoff]` that are log-spaced in `r` with
/// `per_decade` points per decade. In the log chart this is a uniform grid
/// in `log r`; when that would be too long the grid falls back to
/// log-spaced offsets in `log r`. Doubling `per_decade` refines the grid.
pub fn sample_grid(d: &Domain, cutoff: f64, per_decade: usize) -> Vec<f64> {
    let start = d.start();
    match d.chart {
        Chart::Identity => log_grid(start, cutoff, per_decade, grid_decades(start, cutoff)),
        Chart::Log => {
            let h = std::f64::consts::LN_10 / per_decade as f64;
            let n = (cutoff - start) / h;
            if n > MAX_UNIFORM_LOG_POINTS {
                return log_grid(start, cutoff, per_decade, grid_decades(start, cutoff));
            }
            let mut pts: Vec<f64> = (1..)
                .map(|k| start + k as f64 * h)
                .take_while(|&u| u < cutoff)
                .collect();
            pts.push(cutoff);
            pts
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    pub per_decade: usize,
    pub refine_tol: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            per_decade: 64,
            refine_tol: 1e-9,
        }
    }
}

const MAX_BISECTIONS: usize = 400;

/// `{r : g(r) > 0}` below `cutoff` (chart coordinate). Sign changes between
/// neighbouring grid points are located by bisection; each boundary point
/// belongs to the interval on its right.
pub fn extract_set(
    g: &dyn crate::func::ScalarFn,
    domain: &Domain,
    cutoff: f64,
    opts: ExtractOptions,
) -> Result<IntervalSet> {
    if opts.per_decade < 64 {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least 64 points per decade, got {}",
            opts.per_decade
        )));
    }
    if !(opts.refine_tol > 0.0) {
        return Err(Error::InvalidParameter("refine_tol must be positive".into()));
    }
    domain.check_cutoff(cutoff)?;
    let start = domain.start();
    let mut grid = sample_grid(domain, cutoff, opts.per_decade);
    if !domain.end.is_infinite() {
        let mirrored: Vec<f64> = grid.iter().map(|&u| cutoff - (u - start)).collect();
        grid.extend(mirrored);
    }
    let mut breaks = g.breakpoints(domain, start, cutoff);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    // Kinks or jumps may come in pairs with no grid point between them.
    let mids: Vec<f64> = breaks.windows(2).map(|w| w[0] + 0.5 * (w[1] - w[0])).collect();
    grid.extend(breaks);
    grid.extend(mids);
    grid.retain(|&u| u > start && u <= cutoff);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let inside = |u: f64| g.eval_coord(domain, u) > 0.0;
    let width_ok = |lo: f64, hi: f64| match domain.chart {
        Chart::Identity => hi - lo <= opts.refine_tol * hi.abs(),
        Chart::Log => hi - lo <= opts.refine_tol,
    };
    let boundary = |mut lo: f64, mut hi: f64, lo_inside: bool| {
        for _ in 0..MAX_BISECTIONS {
            if width_ok(lo, hi) {
                break;
            }
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                break;
            }
            if inside(mid) == lo_inside {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };

    let mut pairs = Vec::new();
    let mut prev_u = start;
    let mut prev_in = match grid.first() {
        Some(&u) => inside(u),
        None => false,
    };
    let mut open = if prev_in { Some(start) } else { None };
    for &u in &grid {
        let now = inside(u);
        if now != prev_in && prev_u > start {
            let b = boundary(prev_u, u, prev_in);
            match open.take() {
                Some(a) => pairs.push((a, b)),
                None => open = Some(b),
            }
        }
        prev_u = u;
        prev_in = now;
    }
    if let Some(a) = open {
        pairs.push((a, cutoff));
    }
    Ok(IntervalSet::from_coords(*domain, pairs, cutoff))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::domain::Domain;
    use crate::expr::Expression;
    use crate::func::{Constant, FnScalar};
    use crate::intervals::{Accelerated, ExpBumps, GeneratedSet, Geometric};
    use crate::scale::ScaleKind;

    fn lin_domain() -> Domain {
        Domain::linear_infinite(1.0).unwrap()
    }

    fn geo2(d: Domain, cutoff: f64) -> IntervalSet {
        GeneratedSet::new(d, Arc::new(Geometric { base: 2.0 })).materialize(cutoff).unwrap()
    }

    #[test]
    fn full_domain_has_density_one() {
        let d = lin_domain();
        let s = PsiScale::new(ScaleKind::Log, d).unwrap();
        let e = IntervalSet::full(d, 1e6);
        let est = estimate_density(&e, &s, 1e6, 8).unwrap();
        assert_eq!((est.upper, est.lower), (1.0, 1.0));
        assert!(est.low_confidence);
    }

    #[test]
    fn geo2_log_and_linear() {
        let d = lin_domain();
        let cutoff = 2f64.powi(81);
        let e = geo2(d, cutoff);
        let log = PsiScale::new(ScaleKind::Log, d).unwrap();
        let est = estimate_density(&e, &log, cutoff, 8).unwrap();
        assert!((est.upper - 0.5).abs() < 1e-2 && (est.lower - 0.5).abs() < 1e-2, "{est:?}");
        let lin = PsiScale::new(ScaleKind::Linear, d).unwrap();
        let est = estimate_density(&e, &lin, cutoff, 8).unwrap();
        assert!((est.upper - 2.0 / 3.0).abs() < 1e-2, "{est:?}");
        assert!((est.lower - 1.0 / 3.0).abs() < 1e-2, "{est:?}");
        assert!(!est.low_confidence);
    }

    #[test]
    fn accel4_in_log_chart() {
        let d = Domain::log_infinite(1.0).unwrap();
        let cutoff = 4f64.powi(9);
        let e = GeneratedSet::new(d, Arc::new(Accelerated { q: 4.0 })).materialize(cutoff).unwrap();
        let log = PsiScale::new(ScaleKind::Log, d).unwrap();
        let est = estimate_density(&e, &log, cutoff, 8).unwrap();
        assert!((est.upper - 2.0 / 3.0).abs() < 1e-2, "{est:?}");
        assert!((est.lower - 1.0 / 3.0).abs() < 1e-2, "{est:?}");
    }

    #[test]
    fn tail_window_validated() {
        let d = lin_domain();
        let s = PsiScale::new(ScaleKind::Log, d).unwrap();
        assert!(estimate_density(&IntervalSet::empty(d), &s, 10.0, 3).is_err());
        let est = estimate_density(&IntervalSet::empty(d), &s, 10.0, 4).unwrap();
        assert_eq!((est.upper, est.lower), (0.0, 0.0));
    }

    #[test]
    fn chain_examples() {
        let d = lin_domain();
        let s = PsiScale::new(ScaleKind::Log, d).unwrap();
        let cutoff = 2f64.powi(81);
        for set in [geo2(d, cutoff), IntervalSet::empty(d), IntervalSet::full(d, cutoff)] {
            let reports = check_chain(&set, &s, cutoff).unwrap();
            assert_eq!(reports.len(), 4);
            assert!(reports.iter().all(|r| r.pass), "{reports:?}");
        }
        assert!(check_chain(&IntervalSet::empty(d), &s.exp_lift().unwrap(), 10.0).is_err());
    }

    #[test]
    fn finite_measure_sets_have_zero_density() {
        let d = Domain::log_infinite(1.0).unwrap();
        let s = PsiScale::new(ScaleKind::Log, d).unwrap();
        let cutoffs = [14.0, 18.0, 22.0, 26.0];
        let e = GeneratedSet::new(d, Arc::new(ExpBumps)).materialize(26.0).unwrap();
        let rep = check_finite_measure_zero_density(&e, &s, &cutoffs).unwrap();
        assert!(rep.pass, "{rep:?}");
        let single = IntervalSet::from_coords(d, [(2f64.ln(), 3f64.ln())], 26.0);
        assert!(check_finite_measure_zero_density(&single, &s, &cutoffs).unwrap().pass);
        let g = GeneratedSet::new(d, Arc::new(Geometric { base: 2.0 })).materialize(26.0).unwrap();
        assert!(matches!(
            check_finite_measure_zero_density(&g, &s, &cutoffs),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn exceptional_set_avoidance() {
        let d = lin_domain();
        let s = PsiScale::new(ScaleKind::Log, d).unwrap();
        let cutoff = 1e12;
        let id = FnScalar::new("t", |r| r);
        let got = avoid_exceptional(&id, &id, &IntervalSet::empty(d), &s, 2.0, cutoff).unwrap();
        assert_eq!(got.r_prime, d.start());
        assert!(got.report.pass);

        let e = geo2(d, cutoff);
        let e2 = e.clone();
        let f = FnScalar::new("right endpoint on E", move |r| {
            let k = e2.spans().partition_point(|sp| sp.hi <= r);
            match e2.spans().get(k) {
                Some(sp) if sp.lo <= r => sp.hi,
                _ => r,
            }
        });
        let got = avoid_exceptional(&f, &id, &e, &s, 3.0, cutoff).unwrap();
        assert!(got.report.pass, "{got:?}");
        assert!(got.r_prime < cutoff);
        assert!(matches!(
            avoid_exceptional(&f, &id, &e, &s, 1.5, cutoff),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn extract_sin_log() {
        let d = Domain::finite(1.0, (4.0 * PI).exp()).unwrap();
        let g = Expression::parse("sin(log(t))").unwrap();
        let cutoff = (4.0 * PI).exp();
        let set = extract_set(&g, &d, cutoff, ExtractOptions::default()).unwrap();
        let pairs = set.to_r_pairs();
        assert_eq!(pairs.len(), 2, "{pairs:?}");
        let want = [(1.0, PI.exp()), ((2.0 * PI).exp(), (3.0 * PI).exp())];
        for ((a, b), (wa, wb)) in pairs.iter().zip(want) {
            assert!((a - wa).abs() <= 2e-9 * wa, "{a} vs {wa}");
            assert!((b - wb).abs() <= 2e-9 * wb, "{b} vs {wb}");
        }
    }

    #[test]
    fn extract_constants() {
        let d = lin_domain();
        let full = extract_set(&Constant(1.0), &d, 100.0, ExtractOptions::default()).unwrap();
        assert_eq!(full.to_r_pairs(), vec![(1.0, 100.0)]);
        let empty = extract_set(&Constant(-1.0), &d, 100.0, ExtractOptions::default()).unwrap();
        assert!(empty.is_empty());
        let bad = ExtractOptions {
            per_decade: 10,
            ..Default::default()
        };
        assert!(extract_set(&Constant(1.0), &d, 100.0, bad).is_err());
    }

    #[test]
    fn extract_then_estimate() {
        let d = Domain::log_infinite(1.0).unwrap();
        let cutoff = 400.0 * PI;
        let g = Expression::parse("sin(log(t))").unwrap();
        let set = extract_set(&g, &d, cutoff, ExtractOptions::default()).unwrap();
        let s = PsiScale::new(ScaleKind::Log, d).unwrap();
        let est = estimate_density(&set, &s, cutoff, 8).unwrap();
        assert!((est.upper - 0.5).abs() < 1e-2 && (est.lower - 0.5).abs() < 1e-2, "{est:?}");
    }

    #[test]
    fn bounded_sets_have_ended() {
        let d = lin_domain();
        let lin = PsiScale::new(ScaleKind::Linear, d).unwrap();
        let cutoff = d.to_coord(1e6);
        let one = IntervalSet::from_r_pairs(d, &[(1.0, 100.0)]);
        let est = estimate_density(&one, &lin, cutoff, 8).unwrap();
        assert!((est.upper - 99.0 / 1e6).abs() < 1e-12 && est.upper == est.lower, "{est:?}");
        let pairs: Vec<(f64, f64)> = (1..20).map(|n| (n as f64, n as f64 + 0.5)).collect();
        let many = IntervalSet::from_r_pairs(d, &pairs);
        let est = estimate_density(&many, &lin, cutoff, 8).unwrap();
        assert!((est.upper - 9.5 / 1e6).abs() < 1e-12, "{est:?}");
        // Still in progress: the last period is as long as the earlier ones.
        let est = estimate_density(&many, &lin, d.to_coord(19.9), 8).unwrap();
        assert!(est.upper > 0.45, "{est:?}");
    }
}
