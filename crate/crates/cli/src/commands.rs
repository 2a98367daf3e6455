use serde::Serialize;
use serde_json::{json, Value};

use psi_core::{
    check_chain, density_limit_certify, dichotomy_check, divergence_witness, estimate_density, estimate_limits,
    estimate_orders, estimate_type, log_spaced_per_decade, trailing_limit_check, usual_limit_certify, verify_comparison,
    verify_growth_corollary, verify_limsup_sets, verify_linear_extremes, BoundReport, Constant, Error, GrowthCorollary,
    GrowthIndex, LimitMode, LimitSetSpec, LimitVerdict, ScalarFn, SetSpec, DEFAULT_EPS_GRID,
};

use crate::parse::{
    growth_source, horizon_name, parse_extended, parse_list, parse_ln_r, parse_zigzag, scale_for, scalar_fn, Params,
};
use crate::{CliError, DensityArgs, IntegrabilityArgs, LimitArgs, OrderArgs, VerifyArgs};

/// A command result: a JSON document, a table for `--csv`, and whether the
/// command succeeded.
#[derive(Debug, Clone)]
pub struct Report {
    pub ok: bool,
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("values serialise");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.into())
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("values serialise")
}

fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn report_rows(reports: &[BoundReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            vec![
                r.id.clone(),
                num(r.measured),
                r.relation.symbol().to_string(),
                num(r.bound),
                num(r.slack),
                r.pass.to_string(),
                r.applicable.to_string(),
            ]
        })
        .collect()
}

const REPORT_HEADER: [&str; 7] = ["id", "measured", "relation", "bound", "slack", "pass", "applicable"];

fn all_pass(reports: &[BoundReport]) -> bool {
    !reports.is_empty() && reports.iter().all(|r| r.pass && r.applicable)
}

pub fn density(a: &DensityArgs) -> Result<Report, CliError> {
    let x = parse_ln_r(&a.cutoff)?;
    let (mut psi, cutoff) = scale_for(&a.psi, a.r0, x)?;
    if a.lift {
        psi = psi.exp_lift()?;
    }
    let set = SetSpec::parse(&a.set)?.materialize(*psi.domain(), cutoff)?;
    let est = estimate_density(&set, &psi, cutoff, a.tail_window)?;
    let rows = est
        .trajectory
        .iter()
        .map(|p| vec![num(p.ln_r), num(p.ratio), format!("{:?}", p.kind)])
        .collect();
    Ok(Report {
        ok: true,
        json: json!({
            "command": "density",
            "set": a.set,
            "psi": psi.name(),
            "r0": psi.domain().r0,
            "horizon": horizon_name(psi.domain().end),
            "cutoff": a.cutoff,
            "estimate": to_value(&est),
        }),
        header: vec!["ln_r", "ratio", "kind"],
        rows,
    })
}

pub fn chain(a: &DensityArgs) -> Result<Report, CliError> {
    if a.lift {
        return Err(CliError::Usage("chain already compares psi with its lift; drop --lift".into()));
    }
    let x = parse_ln_r(&a.cutoff)?;
    let (psi, cutoff) = scale_for(&a.psi, a.r0, x)?;
    let set = SetSpec::parse(&a.set)?.materialize(*psi.domain(), cutoff)?;
    let reports = check_chain(&set, &psi, cutoff)?;
    Ok(Report {
        ok: all_pass(&reports),
        json: json!({
            "command": "chain",
            "set": a.set,
            "psi": psi.name(),
            "cutoff": a.cutoff,
            "reports": to_value(&reports),
        }),
        header: REPORT_HEADER.to_vec(),
        rows: report_rows(&reports),
    })
}

pub fn order(a: &OrderArgs) -> Result<Report, CliError> {
    let x = parse_ln_r(&a.cutoff)?;
    let t = growth_source(a.function.as_deref(), a.zigzag.as_deref(), "the growth function (--fn or --zigzag)")?;
    let mut est = estimate_orders(&t, x, a.tail_window)?;
    if let Some(rho) = a.rho {
        est.type_value = Some(estimate_type(&t, rho, x, a.tail_window)?);
    }
    let rows = est.trajectory.iter().map(|p| vec![num(p.0), num(p.1)]).collect();
    Ok(Report {
        ok: true,
        json: json!({
            "command": "order",
            "function": t.name(),
            "cutoff": a.cutoff,
            "estimate": to_value(&est),
        }),
        header: vec!["ln_r", "ratio"],
        rows,
    })
}

/// `φ` from `--fn` (an expression in r) or `--zigzag` (the ratio
/// `log T/log r` of a zig-zag), with the limits known from the construction.
type Phi = (Box<dyn ScalarFn>, Option<(f64, f64)>);

fn phi_source(expr: Option<&str>, zigzag: Option<&str>, what: &str) -> Result<Phi, CliError> {
    match (expr, zigzag) {
        (Some(_), Some(_)) => Err(CliError::Usage(format!("give {what} either as an expression or as a zig-zag, not both"))),
        (Some(e), None) => Ok((scalar_fn(e)?, None)),
        (None, Some(z)) => {
            let t = parse_zigzag(z)?;
            let limits = t.prescribed_orders().map(|(l, big)| (big.unwrap_or(f64::INFINITY), l));
            Ok((Box::new(t.order_ratio()), limits))
        }
        (None, None) => Err(CliError::Usage(format!("{what} is missing"))),
    }
}

pub fn verify(a: &VerifyArgs) -> Result<Report, CliError> {
    let x = parse_ln_r(&a.cutoff)?;
    let p = Params::parse(a.params.as_deref())?;
    let id = a.id.trim();
    let reports = match id {
        "thm3.1" | "prop3.2" => {
            p.only(&["eps", "M", "K", "k"])?;
            let (phi, known) = phi_source(a.function.as_deref(), a.zigzag.as_deref(), "phi (--fn or --zigzag)")?;
            let (psi, cutoff) = scale_for(&a.psi, a.r0, x)?;
            let (big_k, k, limits_known) = match (p.real("K")?, p.real("k")?, known) {
                (Some(big_k), Some(k), _) => (big_k, k, true),
                (None, None, Some((big_k, k))) => (big_k, k, true),
                (big_k, k, _) => {
                    let (hi, lo) = estimate_limits(phi.as_ref(), psi.domain(), cutoff, a.tail_window)?;
                    (big_k.unwrap_or(hi), k.unwrap_or(lo), false)
                }
            };
            let spec = LimitSetSpec {
                phi: phi.as_ref(),
                psi,
                big_k,
                k,
                eps: p.require("eps")?,
                m: p.real("M")?,
                limits_known,
            };
            let all = verify_limsup_sets(&spec, cutoff, a.tail_window)?;
            let picked: Vec<_> = all.iter().filter(|r| r.id.starts_with(id)).cloned().collect();
            if picked.is_empty() {
                all
            } else {
                picked
            }
        }
        "cor3.3" => {
            p.only(&["mode", "k1", "k2"])?;
            let mode = match p.text("mode").unwrap_or("limsup") {
                "limsup" => LimitMode::Limsup,
                "liminf" => LimitMode::Liminf,
                m => return Err(CliError::Usage(format!("mode must be limsup or liminf, got `{m}`"))),
            };
            let (phi1, _) = match (&a.function, &a.zigzag) {
                (None, None) => (Box::new(Constant(1.0)) as Box<dyn ScalarFn>, None),
                _ => phi_source(a.function.as_deref(), a.zigzag.as_deref(), "phi1")?,
            };
            let (phi2, _) = phi_source(a.function2.as_deref(), a.zigzag2.as_deref(), "phi2 (--fn2 or --zigzag2)")?;
            let limits = match (p.real("k1")?, p.real("k2")?) {
                (Some(k1), Some(k2)) => Some((k1, k2)),
                (None, None) => None,
                _ => return Err(CliError::Usage("give both k1 and k2, or neither".into())),
            };
            let (psi, cutoff) = scale_for(&a.psi, a.r0, x)?;
            verify_comparison(phi1.as_ref(), phi2.as_ref(), &psi, mode, limits, cutoff, a.tail_window)?
        }
        _ => {
            if a.psi != "log" || a.r0.is_some() {
                return Err(CliError::Usage(format!("{id} uses the logarithmic and linear scales on [1, inf); drop --psi/--r0")));
            }
            let t = || growth_source(a.function.as_deref(), a.zigzag.as_deref(), "T (--fn or --zigzag)");
            let t2 = || growth_source(a.function2.as_deref(), a.zigzag2.as_deref(), "T2 (--fn2 or --zigzag2)");
            let corollary = match id {
                "thm1.1" => {
                    p.only(&["a", "b"])?;
                    return bound_report(id, verify_linear_extremes(&t()?, p.require("a")?, p.require("b")?, x, a.tail_window)?);
                }
                "cor4.1" => {
                    p.only(&["a", "b"])?;
                    GrowthCorollary::NearExtremalPowers { t: t()?, a: p.require("a")?, b: p.require("b")? }
                }
                "cor4.2" => {
                    p.only(&["eps"])?;
                    GrowthCorollary::NearOrder { t: t()?, eps: p.require("eps")? }
                }
                "cor4.3" => {
                    p.only(&["eps"])?;
                    GrowthCorollary::NearLowerOrder { t: t()?, eps: p.require("eps")? }
                }
                "cor4.4" => {
                    p.only(&["eps0", "rho", "tau"])?;
                    GrowthCorollary::NearType { t: t()?, eps0: p.require("eps0")?, rho: p.real("rho")?, tau: p.real("tau")? }
                }
                "cor4.5" => {
                    p.only(&["beta", "index"])?;
                    let index = match p.text("index").unwrap_or("order") {
                        "order" => GrowthIndex::Order,
                        "lower" => GrowthIndex::LowerOrder,
                        i => return Err(CliError::Usage(format!("index must be order or lower, got `{i}`"))),
                    };
                    GrowthCorollary::Dominated { t1: t()?, t2: t2()?, index, beta: p.require("beta")? }
                }
                "cor4.6" => {
                    p.only(&["c", "rho", "tau1", "tau2"])?;
                    GrowthCorollary::TypeComparison {
                        t1: t()?,
                        t2: t2()?,
                        c: p.require("c")?,
                        rho: p.real("rho")?,
                        tau1: p.real("tau1")?,
                        tau2: p.real("tau2")?,
                    }
                }
                "cor4.7" => {
                    p.only(&["c1", "c2", "rho", "tau"])?;
                    GrowthCorollary::Doubling {
                        t: t()?,
                        c1: p.require("c1")?,
                        c2: p.require("c2")?,
                        rho: p.real("rho")?,
                        tau: p.real("tau")?,
                    }
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown id `{other}`; expected thm3.1, prop3.2, cor3.3, cor4.1 .. cor4.7 or thm1.1"
                    )))
                }
            };
            verify_growth_corollary(&corollary, x, a.tail_window)?
        }
    };
    bound_report(id, reports)
}

fn bound_report(id: &str, reports: Vec<BoundReport>) -> Result<Report, CliError> {
    Ok(Report {
        ok: all_pass(&reports),
        json: json!({
            "command": "verify",
            "id": id,
            "reports": to_value(&reports),
        }),
        header: REPORT_HEADER.to_vec(),
        rows: report_rows(&reports),
    })
}

pub fn limit_density(a: &LimitArgs) -> Result<Report, CliError> {
    let x = parse_ln_r(&a.cutoff)?;
    let f = scalar_fn(&a.function)?;
    let f = f.as_ref();
    let l = parse_extended(&a.l)?;
    let eps_grid = match &a.eps_grid {
        Some(g) => parse_list(g)?,
        None => DEFAULT_EPS_GRID.to_vec(),
    };
    let (psi, cutoff) = scale_for(&a.psi, a.r0, x)?;
    let verdict = density_limit_certify(f, l, &psi, &eps_grid, cutoff, a.threshold)?;
    let trailing = trailing_limit_check(f, &psi, cutoff, a.tail_window, a.threshold)?;
    let mut ok = verdict.certified();
    let mut doc = json!({
        "command": "limit-density",
        "function": a.function,
        "l": a.l,
        "psi": psi.name(),
        "cutoff": a.cutoff,
        "verdict": to_value(&verdict),
        "trailing": to_value(&trailing),
    });
    if a.dichotomy {
        let d = dichotomy_check(f, l, &psi, cutoff)?;
        ok &= d.pass && d.applicable;
        doc["dichotomy"] = to_value(&d);
    }
    Ok(Report {
        ok,
        json: doc,
        header: vec!["eps", "upper_density"],
        rows: verdict.evidence.iter().map(|p| vec![num(p.0), num(p.1)]).collect(),
    })
}

/// Failures of the usual-limit checks that describe the function rather
/// than the invocation are reported in the document.
fn verdict_or_note(v: Result<LimitVerdict, Error>) -> Result<Value, CliError> {
    match v {
        Ok(v) => Ok(to_value(&v)),
        Err(e @ (Error::Precondition(_) | Error::NonMonotone { .. } | Error::NonPositive { .. } | Error::Eval(_))) => {
            Ok(json!({ "applicable": false, "note": e.to_string() }))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn integrability(a: &IntegrabilityArgs) -> Result<Report, CliError> {
    let x = parse_ln_r(&a.rmax)?;
    let rmax = x.exp();
    if !rmax.is_finite() {
        return Err(CliError::Usage(format!("--rmax must be below 1.8e308, got {}", a.rmax)));
    }
    if !(a.rmin < rmax) {
        return Err(CliError::Usage(format!("need rmin < rmax, got {} and {}", a.rmin, a.rmax)));
    }
    let f = scalar_fn(&a.function)?;
    let f = f.as_ref();
    let (psi, _) = scale_for(&a.psi, a.r0, x)?;
    let r_values = log_spaced_per_decade(a.rmin, rmax, a.per_decade);
    let witness = divergence_witness(f, &psi, &r_values, a.tol)?;
    let usual = usual_limit_certify(f, &psi, a.r1, rmax);
    let usual_ok = matches!(&usual, Ok(v) if v.certified());
    let usual = verdict_or_note(usual)?;
    Ok(Report {
        ok: witness.certified() || usual_ok,
        json: json!({
            "command": "integrability",
            "function": a.function,
            "psi": psi.name(),
            "rmax": a.rmax,
            "witness": to_value(&witness),
            "usual_limit": usual,
        }),
        header: vec!["r", "average"],
        rows: witness.evidence.iter().map(|p| vec![num(p.0), num(p.1)]).collect(),
    })
}
