//! Domains `(r0, R)` and the coordinate charts used to store points in them.
//!
//! Points are never stored as raw `r` when `r` could overflow: the
//! logarithmic chart keeps `u = log r`, which lets sets and growth functions
//! live at `r = e^{10^4}` and beyond.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `r` for which [`Chart::choose`] still picks the identity chart.
pub const IDENTITY_CHART_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

impl Horizon {
    pub fn is_infinite(self) -> bool {
        matches!(self, Horizon::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    /// `u = r`
    Identity,
    /// `u = log r`
    Log,
}

impl Chart {
    /// Identity chart whenever the horizon and cutoff are representable.
    pub fn choose(end: Horizon, cutoff_ln_r: f64) -> Chart {
        match end {
            Horizon::Finite(_) => Chart::Identity,
            Horizon::Infinite if cutoff_ln_r <= IDENTITY_CHART_LIMIT.ln() => Chart::Identity,
            Horizon::Infinite => Chart::Log,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub r0: f64,
    pub end: Horizon,
    pub chart: Chart,
}

impl Domain {
    pub fn new(r0: f64, end: Horizon, chart: Chart) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidParameter(format!("r0 must be positive, got {r0}")));
        }
        if let Horizon::Finite(r_end) = end {
            if !(r_end > r0) || !r_end.is_finite() {
                return Err(Error::InvalidParameter(format!("need r0 < R, got ({r0}, {r_end})")));
            }
        }
        Ok(Domain { r0, end, chart })
    }

    /// `(r0, ∞)` stored in the logarithmic chart.
    pub fn log_infinite(r0: f64) -> Result<Self> {
        Self::new(r0, Horizon::Infinite, Chart::Log)
    }

    /// `(r0, ∞)` stored in the identity chart.
    pub fn linear_infinite(r0: f64) -> Result<Self> {
        Self::new(r0, Horizon::Infinite, Chart::Identity)
    }

    pub fn finite(r0: f64, r_end: f64) -> Result<Self> {
        Self::new(r0, Horizon::Finite(r_end), Chart::Identity)
    }

    pub fn with_chart(self, chart: Chart) -> Result<Self> {
        if chart == Chart::Log && !self.end.is_infinite() {
            return Err(Error::InvalidParameter(
                "the logarithmic chart needs an infinite horizon".into(),
            ));
        }
        Ok(Domain { chart, ..self })
    }

    pub fn to_coord(&self, r: f64) -> f64 {
        match self.chart {
            Chart::Identity => r,
            Chart::Log => r.ln(),
        }
    }

    pub fn to_r(&self, u: f64) -> f64 {
        match self.chart {
            Chart::Identity => u,
            Chart::Log => u.exp(),
        }
    }

    /// `log r` of the point with coordinate `u`.
    pub fn ln_r(&self, u: f64) -> f64 {
        match self.chart {
            Chart::Identity => u.ln(),
            Chart::Log => u,
        }
    }

    /// Coordinate of the point with the given `log r`.
    pub fn coord_from_ln_r(&self, x: f64) -> f64 {
        match self.chart {
            Chart::Identity => x.exp(),
            Chart::Log => x,
        }
    }

    pub fn start(&self) -> f64 {
        self.to_coord(self.r0)
    }

    /// Coordinate of `R` (`+∞` for an infinite horizon).
    pub fn end_coord(&self) -> f64 {
        match self.end {
            Horizon::Finite(r) => self.to_coord(r),
            Horizon::Infinite => f64::INFINITY,
        }
    }

    pub fn contains_coord(&self, u: f64) -> bool {
        u > self.start() && u < self.end_coord()
    }

    pub fn check_cutoff(&self, u: f64) -> Result<()> {
        if u > self.start() && u <= self.end_coord() && u.is_finite() {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what: format!("cutoff in {self}"),
                value: self.to_r(u),
            })
        }
    }

    pub fn same_points(&self, other: &Domain) -> bool {
        self.r0 == other.r0 && self.end == other.end && self.chart == other.chart
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.end {
            Horizon::Finite(r) => write!(f, "({}, {})", self.r0, r),
            Horizon::Infinite => write!(f, "({}, inf)", self.r0),
        }
    }
}

/// Log-spaced sample grid in chart coordinates on `(start, cutoff]`.
///
/// Offsets from the left end are `o_min * 10^{k/per_decade}`, so doubling
/// `per_decade` produces a superset of the points.
pub fn log_grid(start: f64, cutoff: f64, per_decade: usize, decades: f64) -> Vec<f64> {
    let range = cutoff - start;
    if !(range > 0.0) {
        return vec![];
    }
    let o_min = range * 10f64.powf(-decades);
    let n = (decades * per_decade as f64).ceil() as usize;
    let mut pts = Vec::with_capacity(n + 1);
    for k in 0..n {
        let o = o_min * 10f64.powf(k as f64 / per_decade as f64);
        if o >= range {
            break;
        }
        pts.push(start + o);
    }
    pts.push(cutoff);
    pts.dedup();
    pts.retain(|&u| u > start);
    pts
}
