//! Densities of sets and limits of functions measured against a scale `ψ`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod expr;
pub mod func;
pub mod growth;
pub mod density;
pub mod intervals;
pub mod limits;
mod num;
pub mod quad;
pub mod scale;
pub mod verify;

pub use domain::{log_grid, Chart, Domain, Horizon};
pub use error::{Error, Result};
pub use expr::{EvalError, Expression, LogMagnitude, ParseError};
pub use density::{
    avoid_exceptional, check_chain, check_finite_measure_zero_density, density_ratio, density_trajectory,
    estimate_density, extract_set, Avoidance, BoundReport, DensityEstimate, DensityPoint, ExtractOptions, Extremum,
    Relation, DEFAULT_TAIL_WINDOW,
};
pub use func::{Constant, CoordFn, FnScalar, ScalarFn, SharedFn, UnitBumps};
pub use growth::{
    estimate_orders, estimate_type, make_zigzag, make_zigzag_with, GrowthFunction, GrowthRatio, Order, OrderEstimate,
    Polyline, ZigzagParams,
};
pub use intervals::{GeneratedSet, IntervalRule, IntervalSet, SetOp, SetSpec, Span};
pub use scale::{PsiScale, ScaleKind};
pub use limits::{
    cesaro_psi_average, density_limit_certify, dichotomy_check, divergence_witness, exceptional_densities, log_spaced,
    log_spaced_per_decade, trailing_limit_check, usual_limit_certify, Check, LimitVerdict, VerdictKind, DEFAULT_EPS_GRID,
};
pub use quad::{integrate, integrate_detailed, Quadrature};
pub use verify::{
    estimate_limits, verify_comparison, verify_growth_corollary, verify_limsup_sets, verify_linear_extremes, GrowthCorollary,
    GrowthIndex, LimitMode, LimitSetSpec,
};
