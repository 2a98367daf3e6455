//! Finite unions of half-open intervals `[a, b)` inside a domain, stored in
//! chart coordinates, plus pull-based rules for infinite families such as
//! `⋃ [2^{2k}, 2^{2k+1})`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::domain::{Chart, Domain};
use crate::error::{Error, Result};
use crate::scale::PsiScale;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    pub fn new(lo: f64, hi: f64) -> Self {
        Span { lo, hi }
    }
}

/// Sorted, disjoint, non-degenerate spans. The set is exact on
/// `[start, extent)`; nothing is known beyond `extent`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    domain: Domain,
    spans: Vec<Span>,
    extent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersection,
    Difference,
    Complement,
}

impl IntervalSet {
    pub fn empty(domain: Domain) -> Self {
        IntervalSet {
            domain,
            spans: Vec::new(),
            extent: domain.end_coord(),
        }
    }

    /// The whole domain, known up to `extent`.
    pub fn full(domain: Domain, extent: f64) -> Self {
        Self::from_coords(domain, [(domain.start(), extent)], extent)
    }

    /// Builds a normalised set from coordinate pairs: clipped to the domain
    /// and `extent`, sorted, merged, degenerate spans dropped.
    pub fn from_coords(domain: Domain, pairs: impl IntoIterator<Item = (f64, f64)>, extent: f64) -> Self {
        let extent = extent.min(domain.end_coord());
        let start = domain.start();
        let mut spans: Vec<Span> = pairs
            .into_iter()
            .map(|(lo, hi)| Span::new(lo.max(start), hi.min(extent)))
            .filter(|s| s.lo < s.hi)
            .collect();
        spans.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Span> = Vec::with_capacity(spans.len());
        for s in spans {
            match merged.last_mut() {
                Some(last) if s.lo <= last.hi => last.hi = last.hi.max(s.hi),
                _ => merged.push(s),
            }
        }
        IntervalSet {
            domain,
            spans: merged,
            extent,
        }
    }

    /// Builds a set from `[a, b)` pairs given in `r`.
    pub fn from_r_pairs(domain: Domain, pairs: &[(f64, f64)]) -> Self {
        let coords: Vec<_> = pairs
            .iter()
            .map(|&(a, b)| (domain.to_coord(a), domain.to_coord(b)))
            .collect();
        Self::from_coords(domain, coords, domain.end_coord())
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn to_r_pairs(&self) -> Vec<(f64, f64)> {
        self.spans
            .iter()
            .map(|s| (self.domain.to_r(s.lo), self.domain.to_r(s.hi)))
            .collect()
    }

    pub fn contains_coord(&self, u: f64) -> bool {
        let idx = self.spans.partition_point(|s| s.hi <= u);
        self.spans.get(idx).is_some_and(|s| s.lo <= u)
    }

    /// The part of the set below `cutoff` (extent lowered accordingly).
    pub fn truncate(&self, cutoff: f64) -> Self {
        Self::from_coords(self.domain, self.spans.iter().map(|s| (s.lo, s.hi)), cutoff.min(self.extent))
    }

    pub fn combine(&self, other: &IntervalSet, op: SetOp) -> Result<IntervalSet> {
        if op != SetOp::Complement && !self.domain.same_points(&other.domain) {
            return Err(Error::DomainMismatch(format!(
                "cannot combine sets on {} and {}",
                self.domain, other.domain
            )));
        }
        Ok(match op {
            SetOp::Union => self.union(other),
            SetOp::Intersection => self.intersection(other),
            SetOp::Difference => self.intersection(&other.complement()),
            SetOp::Complement => self.complement(),
        })
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let extent = self.extent.min(other.extent);
        Self::from_coords(
            self.domain,
            self.spans.iter().chain(&other.spans).map(|s| (s.lo, s.hi)),
            extent,
        )
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let extent = self.extent.min(other.extent);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.spans.len() && j < other.spans.len() {
            let (a, b) = (self.spans[i], other.spans[j]);
            let lo = a.lo.max(b.lo);
            let hi = a.hi.min(b.hi);
            if lo < hi {
                out.push((lo, hi));
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_coords(self.domain, out, extent)
    }

    /// Complement within `[start, extent)`.
    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::with_capacity(self.spans.len() + 1);
        let mut cursor = self.domain.start();
        for s in &self.spans {
            if s.lo > cursor {
                out.push((cursor, s.lo));
            }
            cursor = s.hi;
        }
        if cursor < self.extent {
            out.push((cursor, self.extent));
        }
        Self::from_coords(self.domain, out, self.extent)
    }

    fn check_upto(&self, s: &PsiScale, upto: f64) -> Result<()> {
        if !self.domain.same_points(s.domain()) {
            return Err(Error::DomainMismatch(format!(
                "set on {} measured with scale on {}",
                self.domain,
                s.domain()
            )));
        }
        self.domain.check_cutoff(upto)?;
        if upto > self.extent {
            return Err(Error::Precondition(format!(
                "set is only materialised up to r = {}",
                self.domain.to_r(self.extent)
            )));
        }
        Ok(())
    }

    /// ψ-measure of `E ∩ [r0, upto)`, `upto` in chart coordinates. Closed
    /// form from ψ at the endpoints.
    pub fn psi_measure_coord(&self, s: &PsiScale, upto: f64) -> Result<f64> {
        self.check_upto(s, upto)?;
        Ok(self
            .spans
            .iter()
            .take_while(|sp| sp.lo < upto)
            .map(|sp| s.ln_increment(sp.lo, sp.hi.min(upto)).exp())
            .sum())
    }

    /// ψ-measure of `E ∩ [r0, upto)` with `upto` given in `r`.
    pub fn psi_measure(&self, s: &PsiScale, upto: f64) -> Result<f64> {
        self.psi_measure_coord(s, self.domain.to_coord(upto))
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .to_r_pairs()
            .iter()
            .map(|(a, b)| format!("[{a}, {b})"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Rule producing the `k`-th interval of an infinite family, in increasing
/// order, directly in chart coordinates.
pub trait IntervalRule: Send + Sync {
    fn span(&self, k: u64, chart: Chart) -> Option<(f64, f64)>;
    fn name(&self) -> String;
}

/// `⋃_{k≥0} [b^{2k}, b^{2k+1})`
#[derive(Debug, Clone, Copy)]
pub struct Geometric {
    pub base: f64,
}

impl IntervalRule for Geometric {
    fn span(&self, k: u64, chart: Chart) -> Option<(f64, f64)> {
        let (e0, e1) = (2 * k, 2 * k + 1);
        Some(match chart {
            Chart::Identity => (pow_u(self.base, e0), pow_u(self.base, e1)),
            Chart::Log => {
                let lb = self.base.ln();
                (e0 as f64 * lb, e1 as f64 * lb)
            }
        })
    }

    fn name(&self) -> String {
        format!("geo:{}", self.base)
    }
}

fn pow_u(b: f64, e: u64) -> f64 {
    if e <= i32::MAX as u64 {
        b.powi(e as i32)
    } else {
        f64::INFINITY
    }
}

/// `⋃_{k≥0} [e^{q^k}, e^{2q^k})`
#[derive(Debug, Clone, Copy)]
pub struct Accelerated {
    pub q: f64,
}

impl IntervalRule for Accelerated {
    fn span(&self, k: u64, chart: Chart) -> Option<(f64, f64)> {
        let x = pow_u(self.q, k);
        Some(match chart {
            Chart::Identity => (x.exp(), (2.0 * x).exp()),
            Chart::Log => (x, 2.0 * x),
        })
    }

    fn name(&self) -> String {
        format!("accel:{}", self.q)
    }
}

/// `⋃_{n≥1} [e^n, e^n(1 + 2^{−n}))`, a set of finite logarithmic measure.
#[derive(Debug, Clone, Copy)]
pub struct ExpBumps;

impl IntervalRule for ExpBumps {
    fn span(&self, k: u64, chart: Chart) -> Option<(f64, f64)> {
        let n = (k + 1) as f64;
        let w = (-n).exp2();
        Some(match chart {
            Chart::Identity => (n.exp(), n.exp() * (1.0 + w)),
            Chart::Log => (n, n + w.ln_1p()),
        })
    }

    fn name(&self) -> String {
        "expbumps".into()
    }
}

/// `⋃_{n≥1} [n, n + 2^{−n})`
#[derive(Debug, Clone, Copy)]
pub struct UnitBumpSet;

impl IntervalRule for UnitBumpSet {
    fn span(&self, k: u64, chart: Chart) -> Option<(f64, f64)> {
        let n = (k + 1) as f64;
        let (a, b) = (n, n + (-n).exp2());
        Some(match chart {
            Chart::Identity => (a, b),
            Chart::Log => (a.ln(), a.ln() + ((-n).exp2() / n).ln_1p()),
        })
    }

    fn name(&self) -> String {
        "bumps".into()
    }
}

/// `⋃_{k≥0} [c q^k, p c q^k)` in `log r`, the family used for random
/// geometric test sets.
#[derive(Debug, Clone, Copy)]
pub struct LogGeometric {
    pub first: f64,
    pub ratio: f64,
    pub fill: f64,
}

impl IntervalRule for LogGeometric {
    fn span(&self, k: u64, chart: Chart) -> Option<(f64, f64)> {
        let x = self.first * pow_u(self.ratio, k);
        let (a, b) = (x, x * self.fill);
        Some(match chart {
            Chart::Identity => (a.exp(), b.exp()),
            Chart::Log => (a, b),
        })
    }

    fn name(&self) -> String {
        format!("loggeo:{},{},{}", self.first, self.ratio, self.fill)
    }
}

/// An infinite set given by a rule; materialised on demand.
#[derive(Clone)]
pub struct GeneratedSet {
    domain: Domain,
    rule: Arc<dyn IntervalRule>,
}

const MAX_GENERATED_SPANS: u64 = 50_000_000;

impl GeneratedSet {
    pub fn new(domain: Domain, rule: Arc<dyn IntervalRule>) -> Self {
        GeneratedSet { domain, rule }
    }

    pub fn rule_name(&self) -> String {
        self.rule.name()
    }

    /// Every interval starting below `cutoff` (chart coordinates), clipped.
    pub fn materialize(&self, cutoff: f64) -> Result<IntervalSet> {
        let chart = self.domain.chart;
        let mut pairs = Vec::new();
        for k in 0..MAX_GENERATED_SPANS {
            match self.rule.span(k, chart) {
                Some((lo, hi)) if lo < cutoff && lo.is_finite() => pairs.push((lo, hi)),
                _ => return Ok(IntervalSet::from_coords(self.domain, pairs, cutoff)),
            }
        }
        Err(Error::Precondition(format!(
            "{} produces more than {MAX_GENERATED_SPANS} intervals below the cutoff",
            self.rule.name()
        )))
    }
}

impl fmt::Debug for GeneratedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneratedSet({} on {})", self.rule.name(), self.domain)
    }
}

/// Set description accepted on the command line.
#[derive(Clone)]
pub enum SetSpec {
    Explicit(Vec<(f64, f64)>),
    Rule(Arc<dyn IntervalRule>),
    Empty,
    Full,
}

impl SetSpec {
    /// `"2:3,5:8"`, `geo2`, `geo:<b>`, `accel4`, `accel:<q>`, `expbumps`,
    /// `bumps`, `empty`, `full`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let param = |p: &str| -> Result<f64> {
            p.parse::<f64>()
                .ok()
                .filter(|v| *v > 1.0 && v.is_finite())
                .ok_or_else(|| Error::InvalidParameter(format!("set parameter must exceed 1, got `{p}`")))
        };
        Ok(match text {
            "empty" => SetSpec::Empty,
            "full" => SetSpec::Full,
            "geo2" => SetSpec::Rule(Arc::new(Geometric { base: 2.0 })),
            "accel4" => SetSpec::Rule(Arc::new(Accelerated { q: 4.0 })),
            "expbumps" => SetSpec::Rule(Arc::new(ExpBumps)),
            "bumps" => SetSpec::Rule(Arc::new(UnitBumpSet)),
            _ if text.starts_with("geo:") => SetSpec::Rule(Arc::new(Geometric { base: param(&text[4..])? })),
            _ if text.starts_with("accel:") => SetSpec::Rule(Arc::new(Accelerated { q: param(&text[6..])? })),
            _ => {
                let mut pairs = Vec::new();
                for item in text.split(',') {
                    let (a, b) = item
                        .split_once(':')
                        .ok_or_else(|| Error::InvalidParameter(format!("expected a:b, got `{item}`")))?;
                    let parse = |s: &str| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::InvalidParameter(format!("bad endpoint `{s}`: {e}")))
                    };
                    let (a, b) = (parse(a)?, parse(b)?);
                    if !(a < b) {
                        return Err(Error::InvalidParameter(format!("empty interval {a}:{b}")));
                    }
                    pairs.push((a, b));
                }
                SetSpec::Explicit(pairs)
            }
        })
    }

    pub fn materialize(&self, domain: Domain, cutoff: f64) -> Result<IntervalSet> {
        Ok(match self {
            SetSpec::Empty => IntervalSet::empty(domain).truncate(cutoff),
            SetSpec::Full => IntervalSet::full(domain, cutoff),
            SetSpec::Explicit(pairs) => IntervalSet::from_r_pairs(domain, pairs).truncate(cutoff),
            SetSpec::Rule(rule) => GeneratedSet::new(domain, rule.clone()).materialize(cutoff)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::ScaleKind;

    fn finite(r0: f64, r1: f64) -> Domain {
        Domain::finite(r0, r1).unwrap()
    }

    #[test]
    fn complement_example() {
        let d = finite(1.0, 10.0);
        let e = IntervalSet::from_r_pairs(d, &[(2.0, 3.0)]);
        let c = e.combine(&e, SetOp::Complement).unwrap();
        assert_eq!(c.to_r_pairs(), vec![(1.0, 2.0), (3.0, 10.0)]);
    }

    #[test]
    fn union_merges_overlaps() {
        let d = finite(0.5, 10.0);
        let a = IntervalSet::from_r_pairs(d, &[(1.0, 3.0)]);
        let b = IntervalSet::from_r_pairs(d, &[(2.0, 5.0)]);
        assert_eq!(a.combine(&b, SetOp::Union).unwrap().to_r_pairs(), vec![(1.0, 5.0)]);
        let adjacent = IntervalSet::from_r_pairs(d, &[(1.0, 2.0), (2.0, 3.0), (4.0, 4.0)]);
        assert_eq!(adjacent.to_r_pairs(), vec![(1.0, 3.0)]);
    }

    #[test]
    fn geometric_intersection_example() {
        let d = Domain::linear_infinite(1.0).unwrap();
        let geo = GeneratedSet::new(d, Arc::new(Geometric { base: 2.0 }))
            .materialize(200.0)
            .unwrap();
        let window = IntervalSet::from_coords(d, [(1.0, 100.0)], 200.0);
        let got = geo.combine(&window, SetOp::Intersection).unwrap();
        assert_eq!(got.to_r_pairs(), vec![(1.0, 2.0), (4.0, 8.0), (16.0, 32.0), (64.0, 100.0)]);
        // the open domain (1, 100) excludes nothing of positive length, and
        // the k = 0 interval [1, 2) is clipped to the domain start
    }

    #[test]
    fn difference_and_mismatch() {
        let d = finite(1.0, 10.0);
        let a = IntervalSet::from_r_pairs(d, &[(1.0, 6.0)]);
        let b = IntervalSet::from_r_pairs(d, &[(2.0, 3.0), (5.0, 8.0)]);
        let diff = a.combine(&b, SetOp::Difference).unwrap();
        assert_eq!(diff.to_r_pairs(), vec![(1.0, 2.0), (3.0, 5.0)]);
        let other = IntervalSet::empty(finite(1.0, 11.0));
        assert!(a.combine(&other, SetOp::Union).is_err());
    }

    #[test]
    fn measures() {
        let d = Domain::log_infinite(1.0).unwrap();
        let log = PsiScale::new(ScaleKind::Log, d).unwrap();
        let e = IntervalSet::from_coords(d, [(1.0, 2.0)], f64::INFINITY);
        assert!((e.psi_measure_coord(&log, 3.0).unwrap() - 1.0).abs() < 1e-15);

        let dl = Domain::linear_infinite(1.0).unwrap();
        let lin = PsiScale::new(ScaleKind::Linear, dl).unwrap();
        let geo = GeneratedSet::new(dl, Arc::new(Geometric { base: 2.0 }))
            .materialize(128.0)
            .unwrap();
        assert!((geo.psi_measure(&lin, 128.0).unwrap() - 85.0).abs() < 1e-12);
        assert_eq!(IntervalSet::empty(dl).psi_measure(&lin, 50.0).unwrap(), 0.0);
    }

    #[test]
    fn measure_needs_materialised_extent() {
        let d = Domain::log_infinite(1.0).unwrap();
        let log = PsiScale::new(ScaleKind::Log, d).unwrap();
        let geo = GeneratedSet::new(d, Arc::new(Geometric { base: 2.0 })).materialize(10.0).unwrap();
        assert!(geo.psi_measure_coord(&log, 20.0).is_err());
        assert!(geo.psi_measure_coord(&log, -1.0).is_err());
    }

    #[test]
    fn materialize_is_monotone_in_cutoff() {
        let d = Domain::log_infinite(1.0).unwrap();
        let g = GeneratedSet::new(d, Arc::new(Accelerated { q: 4.0 }));
        let small = g.materialize(100.0).unwrap();
        let large = g.materialize(5000.0).unwrap();
        assert_eq!(large.truncate(100.0), small);
        assert_eq!(g.materialize(100.0).unwrap(), small);
        assert_eq!(small.spans()[0], Span::new(1.0, 2.0));
    }

    #[test]
    fn parse_specs() {
        assert!(matches!(SetSpec::parse("2:3,5:8").unwrap(), SetSpec::Explicit(v) if v == vec![(2.0, 3.0), (5.0, 8.0)]));
        assert!(matches!(SetSpec::parse("geo2").unwrap(), SetSpec::Rule(_)));
        assert!(matches!(SetSpec::parse("accel:3").unwrap(), SetSpec::Rule(_)));
        assert!(SetSpec::parse("geo:1").is_err());
        assert!(SetSpec::parse("3:2").is_err());
        assert!(SetSpec::parse("nonsense").is_err());
    }
}
