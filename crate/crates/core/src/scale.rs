//! Scale functions ψ: positive, unbounded, differentiable and strictly
//! increasing on `(r0, R)`, each with an exact inverse and derivative.
//!
//! Besides the plain `r`-space evaluation, every scale works in chart
//! coordinates and in logarithmic form (`log ψ`, `log(ψ(b) − ψ(a))`), which is
//! what density ratios are computed from. That keeps `ψ(r) = r` usable at
//! `r = e^{10^4}`.

use std::fmt;
use std::str::FromStr;

use crate::domain::{Chart, Domain, Horizon};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ScaleKind {
    /// ψ(r) = r
    Linear,
    /// ψ(r) = log r
    Log,
    /// ψ(r) = log log r
    LogLog,
    /// ψ(r) = (log r)^β
    PowLog(f64),
    /// ψ(r) = −log(1 − r) on (r0, 1)
    NegLog1m,
    /// ψ(r) = e^{φ(r)} for an inner scale φ
    ExpLift(Box<ScaleKind>),
}

impl ScaleKind {
    pub fn name(&self) -> String {
        match self {
            ScaleKind::Linear => "linear".into(),
            ScaleKind::Log => "log".into(),
            ScaleKind::LogLog => "loglog".into(),
            ScaleKind::PowLog(b) => format!("powlog:{b}"),
            ScaleKind::NegLog1m => "neglog1m".into(),
            ScaleKind::ExpLift(inner) => format!("exp:{}", inner.name()),
        }
    }

    /// Left end used when a caller does not supply one.
    pub fn default_r0(&self) -> f64 {
        match self {
            ScaleKind::LogLog => std::f64::consts::E,
            ScaleKind::NegLog1m => 0.5,
            ScaleKind::ExpLift(inner) => inner.default_r0(),
            _ => 1.0,
        }
    }

    pub fn default_horizon(&self) -> Horizon {
        match self {
            ScaleKind::NegLog1m => Horizon::Finite(1.0),
            ScaleKind::ExpLift(inner) => inner.default_horizon(),
            _ => Horizon::Infinite,
        }
    }
}

impl FromStr for ScaleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("exp:") {
            return Ok(ScaleKind::ExpLift(Box::new(rest.parse()?)));
        }
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let kind = match name {
            "linear" => ScaleKind::Linear,
            "log" => ScaleKind::Log,
            "loglog" => ScaleKind::LogLog,
            "neglog1m" => ScaleKind::NegLog1m,
            "powlog" => {
                let beta = param
                    .ok_or_else(|| Error::InvalidParameter("powlog needs a parameter, e.g. powlog:2".into()))?
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidParameter(format!("powlog parameter: {e}")))?;
                return Ok(ScaleKind::PowLog(beta));
            }
            other => return Err(Error::InvalidParameter(format!("unknown scale `{other}`"))),
        };
        if param.is_some() {
            return Err(Error::InvalidParameter(format!("scale `{name}` takes no parameter")));
        }
        Ok(kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiScale {
    kind: ScaleKind,
    domain: Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Forward,
    Derivative,
    Inverse,
}

impl PsiScale {
    /// Validates that `kind` belongs to the scale class on `domain`.
    pub fn new(kind: ScaleKind, domain: Domain) -> Result<Self> {
        validate(&kind, &domain)?;
        Ok(PsiScale { kind, domain })
    }

    /// Convenience constructor choosing the chart from the horizon only.
    pub fn make(kind: ScaleKind, r0: f64, end: Horizon) -> Result<Self> {
        let chart = match end {
            Horizon::Infinite => Chart::Log,
            Horizon::Finite(_) => Chart::Identity,
        };
        Self::new(kind, Domain::new(r0, end, chart)?)
    }

    pub fn kind(&self) -> &ScaleKind {
        &self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn name(&self) -> String {
        self.kind.name()
    }

    pub fn is_lift(&self) -> bool {
        matches!(self.kind, ScaleKind::ExpLift(_))
    }

    /// The same scale stored in another chart.
    pub fn with_chart(&self, chart: Chart) -> Result<Self> {
        Ok(PsiScale {
            kind: self.kind.clone(),
            domain: self.domain.with_chart(chart)?,
        })
    }

    /// The scale `e^ψ`. Only one level of lifting is supported.
    pub fn exp_lift(&self) -> Result<Self> {
        if self.is_lift() {
            return Err(Error::InvalidParameter(format!(
                "`{}` is already an exponential lift",
                self.name()
            )));
        }
        Ok(PsiScale {
            kind: ScaleKind::ExpLift(Box::new(self.kind.clone())),
            domain: self.domain,
        })
    }

    // -- r-space evaluation -------------------------------------------------

    pub fn eval(&self, which: Which, x: f64) -> Result<f64> {
        match which {
            Which::Forward => self.forward(x),
            Which::Derivative => self.derivative(x),
            Which::Inverse => self.inverse(x),
        }
    }

    fn check_r(&self, r: f64) -> Result<()> {
        let ok = r >= self.domain.r0
            && match self.domain.end {
                Horizon::Finite(end) => r < end,
                Horizon::Infinite => r.is_finite(),
            };
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what: format!("{} on {}", self.name(), self.domain),
                value: r,
            })
        }
    }

    pub fn forward(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(self.psi(self.domain.to_coord(r)))
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(derivative_r(&self.kind, r))
    }

    pub fn inverse(&self, v: f64) -> Result<f64> {
        let lo = self.psi(self.domain.start());
        if !(v >= lo) || v.is_infinite() {
            return Err(Error::OutOfDomain {
                what: format!("range of {} on {}", self.name(), self.domain),
                value: v,
            });
        }
        Ok(self.domain.to_r(self.coord_of_psi(v)))
    }

    // -- chart-coordinate evaluation ---------------------------------------

    /// `x₂ − x₁` in `log r`, computed without cancellation in either chart.
    fn dlog(&self, a: f64, b: f64) -> f64 {
        match self.domain.chart {
            Chart::Identity => ((b - a) / a).ln_1p(),
            Chart::Log => b - a,
        }
    }

    /// ψ at chart coordinate `u` (may overflow to `+∞`).
    pub fn psi(&self, u: f64) -> f64 {
        psi_at(&self.kind, &self.domain, u)
    }

    /// `log ψ` at chart coordinate `u`; finite wherever ψ is positive.
    pub fn ln_psi(&self, u: f64) -> f64 {
        ln_psi_at(&self.kind, &self.domain, u)
    }

    /// `log(ψ(b) − ψ(a))` for `a ≤ b` (−∞ when `a == b`).
    pub fn ln_increment(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return f64::NEG_INFINITY;
        }
        ln_increment_at(self, &self.kind, a, b)
    }

    /// Chart coordinate of `ψ⁻¹(v)`.
    pub fn coord_of_psi(&self, v: f64) -> f64 {
        coord_of_psi_at(&self.kind, &self.domain, v)
    }

    /// Chart coordinate of the point where `log ψ` equals `lv`.
    pub fn coord_of_ln_psi(&self, lv: f64) -> f64 {
        let d = &self.domain;
        match &self.kind {
            ScaleKind::Linear => d.coord_from_ln_r(lv),
            ScaleKind::Log => d.coord_from_ln_r(lv.exp()),
            ScaleKind::LogLog => d.coord_from_ln_r(lv.exp().exp()),
            ScaleKind::PowLog(b) => d.coord_from_ln_r((lv / b).exp()),
            ScaleKind::NegLog1m => -(-lv.exp()).exp_m1(),
            ScaleKind::ExpLift(inner) => coord_of_psi_at(inner, d, lv),
        }
    }

    /// `ψ⁻¹(α ψ(u))`, the shifted point used to skip exceptional sets.
    pub fn shift(&self, u: f64, alpha: f64) -> f64 {
        self.coord_of_ln_psi(alpha.ln() + self.ln_psi(u))
    }
}

impl fmt::Display for PsiScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.name(), self.domain)
    }
}

fn validate(kind: &ScaleKind, domain: &Domain) -> Result<()> {
    let infinite = domain.end.is_infinite();
    let need_infinite = |name: &str| -> Result<()> {
        if infinite {
            Ok(())
        } else {
            Err(Error::DomainMismatch(format!("{name} needs R = ∞")))
        }
    };
    match kind {
        ScaleKind::Linear => need_infinite("linear"),
        ScaleKind::Log => {
            need_infinite("log")?;
            if domain.r0 < 1.0 {
                return Err(Error::DomainMismatch("log is not positive below r = 1".into()));
            }
            Ok(())
        }
        ScaleKind::LogLog => {
            need_infinite("loglog")?;
            if domain.r0 < std::f64::consts::E {
                return Err(Error::DomainMismatch(
                    "loglog is undefined or negative below r = e".into(),
                ));
            }
            Ok(())
        }
        ScaleKind::PowLog(beta) => {
            need_infinite("powlog")?;
            if !(*beta > 0.0 && beta.is_finite()) {
                return Err(Error::InvalidParameter(format!("powlog needs β > 0, got {beta}")));
            }
            if domain.r0 < 1.0 {
                return Err(Error::DomainMismatch("powlog is undefined below r = 1".into()));
            }
            Ok(())
        }
        ScaleKind::NegLog1m => {
            if domain.end != Horizon::Finite(1.0) {
                return Err(Error::DomainMismatch("neglog1m needs R = 1".into()));
            }
            Ok(())
        }
        ScaleKind::ExpLift(inner) => {
            if matches!(**inner, ScaleKind::ExpLift(_)) {
                return Err(Error::InvalidParameter("nested exponential lifts are not supported".into()));
            }
            validate(inner, domain)
        }
    }
}

fn psi_at(kind: &ScaleKind, d: &Domain, u: f64) -> f64 {
    match kind {
        ScaleKind::Linear => d.to_r(u),
        ScaleKind::Log => d.ln_r(u),
        ScaleKind::LogLog => d.ln_r(u).ln(),
        ScaleKind::PowLog(b) => d.ln_r(u).powf(*b),
        ScaleKind::NegLog1m => -(-u).ln_1p(),
        ScaleKind::ExpLift(inner) => psi_at(inner, d, u).exp(),
    }
}

fn ln_psi_at(kind: &ScaleKind, d: &Domain, u: f64) -> f64 {
    match kind {
        ScaleKind::Linear => d.ln_r(u),
        ScaleKind::Log => d.ln_r(u).ln(),
        ScaleKind::LogLog => d.ln_r(u).ln().ln(),
        ScaleKind::PowLog(b) => b * d.ln_r(u).ln(),
        ScaleKind::NegLog1m => (-(-u).ln_1p()).ln(),
        ScaleKind::ExpLift(inner) => psi_at(inner, d, u),
    }
}

fn coord_of_psi_at(kind: &ScaleKind, d: &Domain, v: f64) -> f64 {
    match kind {
        ScaleKind::Linear => match d.chart {
            Chart::Identity => v,
            Chart::Log => v.ln(),
        },
        ScaleKind::Log => d.coord_from_ln_r(v),
        ScaleKind::LogLog => d.coord_from_ln_r(v.exp()),
        ScaleKind::PowLog(b) => d.coord_from_ln_r(v.powf(1.0 / b)),
        ScaleKind::NegLog1m => -(-v).exp_m1(),
        ScaleKind::ExpLift(inner) => coord_of_psi_at(inner, d, v.ln()),
    }
}

fn ln_increment_at(s: &PsiScale, kind: &ScaleKind, a: f64, b: f64) -> f64 {
    let d = &s.domain;
    match kind {
        ScaleKind::Linear => match d.chart {
            Chart::Identity => (b - a).ln(),
            Chart::Log => b + (-(a - b).exp_m1()).ln(),
        },
        ScaleKind::Log => s.dlog(a, b).ln(),
        ScaleKind::LogLog => {
            let xa = d.ln_r(a);
            (s.dlog(a, b) / xa).ln_1p().ln()
        }
        ScaleKind::PowLog(beta) => {
            let xa = d.ln_r(a);
            if xa <= 0.0 {
                return beta * d.ln_r(b).ln();
            }
            beta * xa.ln() + (beta * (s.dlog(a, b) / xa).ln_1p()).exp_m1().ln()
        }
        ScaleKind::NegLog1m => ((b - a) / (1.0 - b)).ln_1p().ln(),
        ScaleKind::ExpLift(inner) => {
            let inner_incr = ln_increment_at(s, inner, a, b).exp();
            psi_at(inner, d, b) + (-(-inner_incr).exp_m1()).ln()
        }
    }
}

fn derivative_r(kind: &ScaleKind, r: f64) -> f64 {
    match kind {
        ScaleKind::Linear => 1.0,
        ScaleKind::Log => 1.0 / r,
        ScaleKind::LogLog => 1.0 / (r * r.ln()),
        ScaleKind::PowLog(b) => b * r.ln().powf(b - 1.0) / r,
        ScaleKind::NegLog1m => 1.0 / (1.0 - r),
        ScaleKind::ExpLift(inner) => {
            let inner_value = match **inner {
                ScaleKind::Linear => r,
                ScaleKind::Log => r.ln(),
                ScaleKind::LogLog => r.ln().ln(),
                ScaleKind::PowLog(b) => r.ln().powf(b),
                ScaleKind::NegLog1m => -(-r).ln_1p(),
                ScaleKind::ExpLift(_) => f64::NAN,
            };
            derivative_r(inner, r) * inner_value.exp()
        }
    }
}
