//! Limits of functions in ψ-density, integrability tests through weighted
//! averages, and conditions under which a density limit is a usual limit.

use serde::{Serialize, Serializer};

use crate::density::{estimate_density, extract_set, sample_grid, BoundReport, ExtractOptions, Relation, DEFAULT_TAIL_WINDOW};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::func::{FnScalar, ScalarFn};
use crate::quad::integrate;
use crate::scale::PsiScale;
use crate::verify::estimate_limits;

pub const DEFAULT_EPS_GRID: [f64; 5] = [1.0, 0.3, 0.1, 0.03, 0.01];
pub const DEFAULT_THRESHOLD: f64 = 1e-2;
/// Trailing points used to decide whether a trajectory has stabilised.
pub const STABILIZATION_WINDOW: usize = 5;
pub const MONOTONE_POINTS: usize = 1000;
/// Successive doubling blocks of `∫|f|` in `log r` must shrink at least by
/// this ratio for the integral to count as convergent.
pub const BLOCK_RATIO_MAX: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    UsualLimit,
    PsiDensityLimit,
    NoLimitDetected,
    DivergenceWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str, passed: bool, note: Option<String>) -> Self {
        Check { name: name.into(), passed, note }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitVerdict {
    pub kind: VerdictKind,
    /// The limit, `±∞` written as `"inf"` / `"-inf"`.
    #[serde(serialize_with = "ser_real")]
    pub value: Option<f64>,
    pub psi: String,
    /// `(r, quantity)` pairs, or `(ε, upper density of S_ε)` for density
    /// certificates.
    pub evidence: Vec<(f64, f64)>,
    pub eps_grid: Vec<f64>,
    pub checks: Vec<Check>,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LimitVerdict {
    fn new(kind: VerdictKind, value: Option<f64>, psi: &PsiScale) -> Self {
        LimitVerdict {
            kind,
            value,
            psi: psi.name(),
            evidence: Vec::new(),
            eps_grid: Vec::new(),
            checks: Vec::new(),
            applicable: true,
            note: None,
        }
    }

    /// A certificate (usual limit, density limit or divergence witness) was
    /// produced.
    pub fn certified(&self) -> bool {
        self.applicable && self.kind != VerdictKind::NoLimitDetected
    }
}

fn ser_real<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_finite() => s.serialize_f64(*x),
        Some(x) if *x == f64::INFINITY => s.serialize_str("inf"),
        Some(x) if *x == f64::NEG_INFINITY => s.serialize_str("-inf"),
        _ => s.serialize_none(),
    }
}

/// `count` points from `a` to `b` spaced evenly in `log r`, both ends included.
pub fn log_spaced(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![b];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|i| match i {
            0 => a,
            i if i == count - 1 => b,
            i => (la + (lb - la) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

/// `per_decade` log-spaced points per decade from `a` to `b`.
pub fn log_spaced_per_decade(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    let n = ((b / a).log10() * per_decade as f64).ceil().max(1.0) as usize + 1;
    log_spaced(a, b, n)
}

fn check_r_values(d: &Domain, r_values: &[f64]) -> Result<()> {
    if r_values.is_empty() {
        return Err(Error::InvalidParameter("no r values".into()));
    }
    let mut prev = d.r0;
    for &r in r_values {
        if !(r > prev && r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "r values must be finite, increasing and above r0 = {}, got {r}",
                d.r0
            )));
        }
        prev = r;
    }
    Ok(())
}

/// `(1/ψ(r)) ∫_{r₀}^r ψ(t) f(t) dt` for each `r` in `r_values`. Each panel
/// is integrated once; panels follow the half period of `f` when one is
/// known and otherwise double in length. `tol` bounds the total absolute
/// quadrature error of the last integral.
pub fn cesaro_psi_average(f: &dyn ScalarFn, psi: &PsiScale, r_values: &[f64], tol: f64) -> Result<Vec<(f64, f64)>> {
    let d = *psi.domain();
    check_r_values(&d, r_values)?;
    let r0 = d.r0;
    let total = r_values[r_values.len() - 1] - r0;
    let integrand = |t: f64| psi.psi(d.to_coord(t)) * f.eval(t);
    let panel = |a: f64, b: f64| integrate(integrand, a, b, (tol * (b - a) / total).max(f64::MIN_POSITIVE));
    let half = f.half_period().filter(|h| *h > 0.0 && h.is_finite());

    let mut acc = 0.0;
    let mut lo = r0;
    let mut out = Vec::with_capacity(r_values.len());
    for &r in r_values {
        match half {
            Some(h) => {
                let mut a = lo;
                let mut k = (lo / h).floor() + 1.0;
                while a < r {
                    let b = (k * h).min(r);
                    if b > a {
                        acc += panel(a, b)?;
                    }
                    a = b;
                    k += 1.0;
                }
            }
            None => {
                let mut a = lo;
                while a < r {
                    let b = if a > 0.0 { (2.0 * a).min(r) } else { r };
                    acc += panel(a, b)?;
                    a = b;
                }
            }
        }
        lo = r;
        let p = psi.psi(d.to_coord(r));
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(format!("psi vanishes at r = {r}")));
        }
        out.push((r, acc / p));
    }
    Ok(out)
}

/// A trajectory of `(1/ψ)∫ψf` that settles at a non-zero value, or grows
/// without settling, shows that `∫f` diverges.
///
/// Stabilised: the spread of the last [`STABILIZATION_WINDOW`] values is
/// below `tol·|last|`. Escaping: `|value|` increases strictly over the second
/// half of the trajectory and the rise over the last quarter is at least 0.8
/// of the rise over the third quarter. Either must end with `|value| > 10·tol`.
/// Quadrature runs at `tol·1e-3`.
pub fn divergence_witness(f: &dyn ScalarFn, psi: &PsiScale, r_values: &[f64], tol: f64) -> Result<LimitVerdict> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if r_values.len() < 2 * STABILIZATION_WINDOW {
        return Err(Error::InvalidParameter(format!(
            "need at least {} r values",
            2 * STABILIZATION_WINDOW
        )));
    }
    let traj = cesaro_psi_average(f, psi, r_values, tol * 1e-3)?;
    let vals: Vec<f64> = traj.iter().map(|p| p.1).collect();
    let last = vals[vals.len() - 1];
    let window = &vals[vals.len() - STABILIZATION_WINDOW..];
    let spread = window.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) - window.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let stabilized = spread < tol * last.abs();

    let n = vals.len();
    let abs: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    let (q2, q3) = (n / 2, (3 * n) / 4);
    let increasing = abs[q2..].windows(2).all(|w| w[1] > w[0]);
    let escaping = increasing && (abs[n - 1] - abs[q3]) >= 0.8 * (abs[q3] - abs[q2]);

    let big = last.abs() > 10.0 * tol;
    let mut v = if stabilized && big {
        let mut v = LimitVerdict::new(VerdictKind::DivergenceWitness, Some(last), psi);
        v.note = Some(format!("stabilized at {last} (spread {spread:e})"));
        v
    } else if !stabilized && escaping && big {
        let mut v = LimitVerdict::new(VerdictKind::DivergenceWitness, Some(f64::INFINITY.copysign(last)), psi);
        v.note = Some(format!("escaping, last value {last}"));
        v
    } else {
        let mut v = LimitVerdict::new(VerdictKind::NoLimitDetected, None, psi);
        v.note = Some(if stabilized {
            format!("stabilized near {last}, too small to witness divergence")
        } else {
            format!("neither stabilized nor escaping (last value {last}); inconclusive")
        });
        v
    };
    v.checks = vec![
        Check::new("stabilized", stabilized, Some(format!("spread {spread:e}"))),
        Check::new("escaping", escaping, None),
    ];
    v.evidence = traj;
    Ok(v)
}

fn check_eps_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) || eps_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter(format!(
            "eps grid must be non-empty, positive and decreasing, got {eps_grid:?}"
        )));
    }
    Ok(())
}

/// Upper ψ-density of `S_ε = {|f − l| ≥ ε}` (or `{f ≤ 1/ε}` for `l = ∞`,
/// `{f ≥ −1/ε}` for `l = −∞`) at `cutoff`, for each `ε`.
pub fn exceptional_densities(f: &dyn ScalarFn, l: f64, psi: &PsiScale, eps_grid: &[f64], cutoff: f64) -> Result<Vec<(f64, f64)>> {
    check_eps_grid(eps_grid)?;
    if l.is_nan() {
        return Err(Error::InvalidParameter("limit is NaN".into()));
    }
    let d = *psi.domain();
    d.check_cutoff(cutoff)?;
    let mut out = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let m = 1.0 / eps;
        let g = move |v: f64| {
            if l == f64::INFINITY {
                m - v
            } else if l == f64::NEG_INFINITY {
                v + m
            } else {
                (v - l).abs() - eps
            }
        };
        let pred = Composed { inner: f, g };
        let set = extract_set(&pred, &d, cutoff, ExtractOptions::default())?;
        let est = estimate_density(&set, psi, cutoff, DEFAULT_TAIL_WINDOW)?;
        out.push((eps, est.upper));
    }
    Ok(out)
}

struct Composed<'a, G> {
    inner: &'a dyn ScalarFn,
    g: G,
}

impl<G: Fn(f64) -> f64 + Send + Sync> ScalarFn for Composed<'_, G> {
    fn eval(&self, r: f64) -> f64 {
        (self.g)(self.inner.eval(r))
    }

    fn eval_coord(&self, domain: &Domain, u: f64) -> f64 {
        (self.g)(self.inner.eval_coord(domain, u))
    }

    fn breakpoints(&self, domain: &Domain, lo: f64, hi: f64) -> Vec<f64> {
        self.inner.breakpoints(domain, lo, hi)
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }
}

/// Certifies `l` as the limit of `f` in ψ-density when every `S_ε` has
/// upper ψ-density below `threshold` at `cutoff` (chart coordinate).
pub fn density_limit_certify(
    f: &dyn ScalarFn,
    l: f64,
    psi: &PsiScale,
    eps_grid: &[f64],
    cutoff: f64,
    threshold: f64,
) -> Result<LimitVerdict> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold must be positive, got {threshold}")));
    }
    let evidence = exceptional_densities(f, l, psi, eps_grid, cutoff)?;
    let ok = evidence.iter().all(|p| p.1 < threshold);
    let mut v = if ok {
        LimitVerdict::new(VerdictKind::PsiDensityLimit, Some(l), psi)
    } else {
        let worst = evidence.iter().find(|p| p.1 >= threshold).expect("some density is large");
        let mut v = LimitVerdict::new(VerdictKind::NoLimitDetected, None, psi);
        v.note = Some(format!("S_eps has upper density {} >= {threshold} at eps = {}", worst.1, worst.0));
        v
    };
    v.evidence = evidence;
    v.eps_grid = eps_grid.to_vec();
    Ok(v)
}

/// Usual limit from a trailing window of extrema: `limsup − liminf ≤ tol`.
pub fn trailing_limit_check(f: &dyn ScalarFn, psi: &PsiScale, cutoff: f64, tail_window: usize, tol: f64) -> Result<LimitVerdict> {
    let (hi, lo) = estimate_limits(f, psi.domain(), cutoff, tail_window)?;
    let mut v = if hi - lo <= tol {
        LimitVerdict::new(VerdictKind::UsualLimit, Some(0.5 * (hi + lo)), psi)
    } else {
        LimitVerdict::new(VerdictKind::NoLimitDetected, None, psi)
    };
    v.note = Some(format!("trailing limsup {hi}, liminf {lo}"));
    Ok(v)
}

fn non_decreasing(v: &[f64]) -> Option<usize> {
    v.windows(2).position(|w| !(w[1] >= w[0]))
}

/// `∫|f|` over doubling blocks `[x/2, x]` of `log r` ending at the cutoff.
/// Returns the blocks in increasing order, or `None` if fewer than three fit
/// above `r1`.
fn abs_blocks(f: &dyn ScalarFn, r1: f64, cutoff: f64) -> Result<Option<Vec<f64>>> {
    let (x1, xc) = (r1.ln(), cutoff.ln());
    let mut bounds = vec![xc];
    while bounds[bounds.len() - 1] / 2.0 >= x1 * (1.0 - 1e-12) {
        let next = bounds[bounds.len() - 1] / 2.0;
        bounds.push(next);
    }
    if bounds.len() < 4 {
        return Ok(None);
    }
    bounds.reverse();
    let g = |x: f64| {
        let r = x.exp();
        f.eval(r).abs() * r
    };
    let mut out = Vec::new();
    for w in bounds.windows(2) {
        let rough = integrate(g, w[0], w[1], 1e-6)?;
        out.push(integrate(g, w[0], w[1], (rough.abs() * 1e-8).max(1e-300))?);
    }
    Ok(Some(out))
}

/// Upgrades the density limit `lim_ψ (ψ/ψ′) f = 0` to a usual limit when
/// `∫|f| < ∞` and either (i) `ψ²|f|/ψ′` is non-decreasing or (ii) `|f|/ψ′`
/// is non-increasing on `(r1, cutoff]`. Falls back to the density limit
/// otherwise. `cutoff` is in `r`.
pub fn usual_limit_certify(f: &dyn ScalarFn, psi: &PsiScale, r1: f64, cutoff: f64) -> Result<LimitVerdict> {
    let d = *psi.domain();
    if !(r1 >= d.r0 && r1 > 1.0 && cutoff > r1 && cutoff.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need max(r0, 1) < r1 < cutoff < inf, got r1 = {r1}, cutoff = {cutoff}"
        )));
    }
    if !d.end.is_infinite() {
        return Err(Error::InvalidParameter("usual limits are certified on (r0, inf) only".into()));
    }
    let mut checks = Vec::new();

    let integrable = match abs_blocks(f, r1, cutoff)? {
        None => {
            return Err(Error::Precondition(format!(
                "cutoff {cutoff} leaves fewer than three doubling blocks of log r above r1 = {r1}"
            )))
        }
        Some(blocks) => {
            let n = blocks.len();
            let q = [blocks[n - 2] / blocks[n - 3], blocks[n - 1] / blocks[n - 2]];
            let ok = q.iter().all(|q| *q <= BLOCK_RATIO_MAX);
            let note = if ok {
                let qq = q[1];
                format!("block ratios {:.4}, {:.4}; tail about {:e}", q[0], q[1], blocks[n - 1] * qq / (1.0 - qq))
            } else {
                format!("block ratios {:.4}, {:.4}", q[0], q[1])
            };
            checks.push(Check::new("integrable", ok, Some(note)));
            ok
        }
    };
    if !integrable {
        let mut v = LimitVerdict::new(VerdictKind::NoLimitDetected, None, psi);
        v.applicable = false;
        v.note = Some("integral of |f| did not converge numerically".into());
        v.checks = checks;
        return Ok(v);
    }

    let grid = log_spaced(r1, cutoff, MONOTONE_POINTS + 1);
    let grid = &grid[1..];
    let mut q1 = Vec::with_capacity(grid.len());
    let mut q2 = Vec::with_capacity(grid.len());
    for &r in grid {
        let (p, dp, fa) = (psi.forward(r)?, psi.derivative(r)?, f.eval(r).abs());
        q1.push(p * p * fa / dp);
        q2.push(fa / dp);
    }
    let cond1 = non_decreasing(&q1);
    let neg: Vec<f64> = q2.iter().map(|v| -v).collect();
    let cond2 = non_decreasing(&neg);
    let at = |i: Option<usize>| i.map(|i| format!("fails near r = {:e}", grid[i + 1]));
    checks.push(Check::new("(i) psi^2|f|/psi' non-decreasing", cond1.is_none(), at(cond1)));
    checks.push(Check::new("(ii) |f|/psi' non-increasing", cond2.is_none(), at(cond2)));

    let quantity = |r: f64| -> Result<f64> { Ok(psi.forward(r)? * f.eval(r) / psi.derivative(r)?) };
    if cond1.is_none() || cond2.is_none() {
        let mut evidence = Vec::new();
        for r in log_spaced_per_decade(r1, cutoff, 10).into_iter().skip(1) {
            evidence.push((r, quantity(r)?.abs()));
        }
        if cond2.is_none() {
            let mut ok = true;
            for &(r, q) in &evidence {
                let s = psi.inverse(psi.forward(r)? / 2.0)?;
                if s >= d.r0 && s < r {
                    let bound = 2.0 * integrate(|x: f64| f.eval(x.exp()).abs() * x.exp(), s.ln(), r.ln(), 1e-12)?;
                    ok &= q <= bound * (1.0 + 1e-9);
                }
            }
            checks.push(Check::new("|psi f/psi'| <= 2 int_{s(r)}^r |f|", ok, None));
        }
        let last = evidence.last().map(|p| p.1);
        let mut v = LimitVerdict::new(VerdictKind::UsualLimit, Some(0.0), psi);
        v.note = Some(format!("|psi f/psi'| at r = {cutoff:e} is {:e}", last.unwrap_or(f64::NAN)));
        v.evidence = evidence;
        v.checks = checks;
        return Ok(v);
    }

    let q = FnScalar::new("psi f / psi'", move |r: f64| quantity(r).unwrap_or(f64::NAN));
    let mut v = density_limit_certify(&q, 0.0, psi, &DEFAULT_EPS_GRID, d.to_coord(cutoff), DEFAULT_THRESHOLD)?;
    checks.append(&mut v.checks);
    v.checks = checks;
    Ok(v)
}

/// Either `f → l` in the usual sense or `fψ` is not non-decreasing, given
/// that `l` is the limit of `f` in ψ-density.
///
/// The usual limit counts as observed when the largest `|f − l|` over the
/// last quarter of the grid (in `log r`) is at most 0.9 times the largest
/// over the third quarter, or is negligible.
pub fn dichotomy_check(f: &dyn ScalarFn, l: f64, psi: &PsiScale, cutoff: f64) -> Result<BoundReport> {
    const ID: &str = "lemma5.4";
    let dl = density_limit_certify(f, l, psi, &DEFAULT_EPS_GRID, cutoff, DEFAULT_THRESHOLD)?;
    if !dl.certified() {
        return Ok(BoundReport::inapplicable(ID, "no limit in psi-density was certified"));
    }
    if !l.is_finite() {
        return Ok(BoundReport::inapplicable(ID, "the dichotomy check needs a finite limit"));
    }
    let d = *psi.domain();
    let mut grid = sample_grid(&d, cutoff, 64);
    grid.extend(f.breakpoints(&d, d.start(), cutoff));
    grid.retain(|u| *u > d.start() && *u <= cutoff);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut decrease = None;
    let mut prev = f64::NEG_INFINITY;
    for &u in &grid {
        let h = f.eval_coord(&d, u) * psi.psi(u);
        if !(h >= prev - 1e-12 * prev.abs()) {
            decrease = Some(d.ln_r(u));
            break;
        }
        prev = h;
    }

    let (xs, xc) = (d.ln_r(d.start()), d.ln_r(cutoff));
    let quarter_sup = |from: f64, to: f64| {
        grid.iter()
            .filter(|&&u| {
                let x = d.ln_r(u);
                x >= from && x <= to
            })
            .map(|&u| (f.eval_coord(&d, u) - l).abs())
            .fold(0.0, f64::max)
    };
    let span = xc - xs;
    let s3 = quarter_sup(xs + 0.5 * span, xs + 0.75 * span);
    let s4 = quarter_sup(xs + 0.75 * span, xc);
    let observed = s4 <= 1e-9 * l.abs().max(1.0) || s4 <= 0.9 * s3;

    let report = BoundReport::new(
        format!("{ID}: usual limit or f*psi not non-decreasing (l = {l})"),
        s4,
        Relation::Le,
        0.9 * s3,
        0.0,
    );
    Ok(match decrease {
        Some(x) => report
            .with_pass(true)
            .with_note(format!("f*psi decreases near log r = {x}")),
        None => report.with_pass(observed).with_note(if observed {
            "f*psi non-decreasing and |f - l| shrinking".to_string()
        } else {
            "f*psi non-decreasing but no usual limit observed".to_string()
        }),
    })
}
