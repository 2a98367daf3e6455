//! Flag value grammars: cutoffs, `k=v` parameter lists, zig-zag pairs.

use std::collections::BTreeMap;

use psi_core::{
    make_zigzag, Chart, Domain, Expression, GrowthFunction, Horizon, PsiScale, ScalarFn, ScaleKind, UnitBumps, ZigzagParams,
};

use crate::CliError;

/// `log r` of a point given as a number (`1e24`) or a power (`e^20`,
/// `e^1e300`, `2^81`).
pub fn parse_ln_r(text: &str) -> Result<f64, CliError> {
    let t = text.trim();
    let bad = || CliError::Usage(format!("cannot read `{text}` as a point r > 0 (use e.g. 1e24 or e^50)"));
    let x = match t.split_once('^') {
        Some((base, exp)) => {
            let exp: f64 = exp.trim().parse().map_err(|_| bad())?;
            let ln_base = match base.trim() {
                "e" => 1.0,
                b => {
                    let b: f64 = b.parse().map_err(|_| bad())?;
                    if !(b > 0.0) {
                        return Err(bad());
                    }
                    b.ln()
                }
            };
            exp * ln_base
        }
        None => {
            let r: f64 = t.parse().map_err(|_| bad())?;
            if !(r > 0.0) {
                return Err(bad());
            }
            r.ln()
        }
    };
    if x.is_nan() || x == f64::INFINITY {
        return Err(bad());
    }
    Ok(x)
}

/// A real number or `inf` / `-inf`.
pub fn parse_extended(text: &str) -> Result<f64, CliError> {
    match text.trim() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("cannot read `{text}` as a number or ±inf"))),
    }
}

pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',').map(parse_extended).collect()
}

/// `a=2,b=2` into an ordered map.
#[derive(Debug, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn parse(text: Option<&str>) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for item in text.unwrap_or("").split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("parameter `{item}` is not of the form key=value")))?;
            if values.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("parameter `{}` given twice", k.trim())));
            }
        }
        Ok(Params { values })
    }

    pub fn real(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.values.get(key).map(|v| parse_extended(v)).transpose()
    }

    pub fn require(&self, key: &str) -> Result<f64, CliError> {
        self.real(key)?
            .ok_or_else(|| CliError::Usage(format!("missing parameter `{key}`")))
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Fails on keys outside `allowed`.
    pub fn only(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Usage(format!(
                "unknown parameter `{k}`; expected one of {}",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }
}

/// `ℓ,L` with `L` possibly `inf`.
pub fn parse_zigzag(text: &str) -> Result<GrowthFunction, CliError> {
    let v = parse_list(text)?;
    if v.len() != 2 {
        return Err(CliError::Usage(format!("--zigzag takes `l,L`, got `{text}`")));
    }
    let p = if v[1].is_infinite() {
        ZigzagParams {
            ell: v[0],
            big_l: None,
            x0: 1.0,
        }
    } else {
        ZigzagParams::new(v[0], v[1])
    };
    Ok(make_zigzag(p)?)
}

pub fn parse_expr(text: &str) -> Result<Expression, CliError> {
    Ok(Expression::parse(text)?)
}

/// An expression in `t`, or `bumps` for the indicator of
/// `⋃ [n, n + 2^{-n}]`.
pub fn scalar_fn(text: &str) -> Result<Box<dyn ScalarFn>, CliError> {
    match text.trim() {
        "bumps" => Ok(Box::new(UnitBumps)),
        t => Ok(Box::new(parse_expr(t)?)),
    }
}

pub fn growth_source(expr: Option<&str>, zigzag: Option<&str>, what: &str) -> Result<GrowthFunction, CliError> {
    match (expr, zigzag) {
        (Some(_), Some(_)) => Err(CliError::Usage(format!("give {what} either as an expression or as a zig-zag, not both"))),
        (Some(e), None) => Ok(GrowthFunction::from_expr(parse_expr(e)?)),
        (None, Some(z)) => parse_zigzag(z),
        (None, None) => Err(CliError::Usage(format!("{what} is missing"))),
    }
}

/// The scale `name` on `(r0, ∞)` or `(r0, R)`, stored in the chart suited to
/// a cutoff at `log r = cutoff_x`. Returns the scale and the cutoff
/// coordinate.
pub fn scale_for(name: &str, r0: Option<f64>, cutoff_x: f64) -> Result<(PsiScale, f64), CliError> {
    let kind: ScaleKind = name.parse()?;
    let end = kind.default_horizon();
    let r0 = r0.unwrap_or_else(|| kind.default_r0());
    let domain = Domain::new(r0, end, Chart::choose(end, cutoff_x))?;
    let psi = PsiScale::new(kind, domain)?;
    let cutoff = domain.coord_from_ln_r(cutoff_x);
    domain.check_cutoff(cutoff)?;
    Ok((psi, cutoff))
}

pub fn horizon_name(h: Horizon) -> String {
    match h {
        Horizon::Infinite => "inf".into(),
        Horizon::Finite(r) => format!("{r}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points() {
        assert!((parse_ln_r("1e24").unwrap() - 24.0 * 10f64.ln()).abs() < 1e-12);
        assert_eq!(parse_ln_r("e^20").unwrap(), 20.0);
        assert_eq!(parse_ln_r("e^1e300").unwrap(), 1e300);
        assert!((parse_ln_r("2^81").unwrap() - 81.0 * 2f64.ln()).abs() < 1e-12);
        for bad in ["", "x", "-3", "0", "e^", "e^inf"] {
            assert!(parse_ln_r(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn params() {
        let p = Params::parse(Some("a=2, b=inf,mode=liminf")).unwrap();
        assert_eq!(p.require("a").unwrap(), 2.0);
        assert_eq!(p.real("b").unwrap(), Some(f64::INFINITY));
        assert_eq!(p.text("mode"), Some("liminf"));
        assert!(p.require("c").is_err());
        assert!(p.only(&["a", "b"]).is_err());
        assert!(Params::parse(Some("a")).is_err());
        assert!(Params::parse(Some("a=1,a=2")).is_err());
    }

    #[test]
    fn zigzags() {
        let z = parse_zigzag("1,3").unwrap();
        assert_eq!(z.prescribed_orders(), Some((1.0, Some(3.0))));
        let z = parse_zigzag("1,inf").unwrap();
        assert_eq!(z.prescribed_orders(), Some((1.0, None)));
        assert!(parse_zigzag("1").is_err());
        assert!(parse_zigzag("3,1").is_err());
    }
}
