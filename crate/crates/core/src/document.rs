//! TOML problem documents and the built-in registry.
//!
//! ```toml
//! name = "example-2.2.3"
//! problem_kind = "strong_coupled"      # or "coincidence"
//! map_F = "min(x, y)"                  # expression, { builtin = "..." } or { table = { "a,b" = "c" } }
//! phi = { family = "expr", expr = "t * t" }
//! psi = { family = "identity" }        # strong_coupled only
//! # map_T = "identity"                 # coincidence only; map_T_inverse optional
//!
//! [space]
//! carrier = "real"                     # or "finite" with labels (and optional distances)
//! lo = 0
//! hi = 3
//!
//! [subset_A]
//! points = [1]                         # or intervals = [{ lo = 0, hi = 2 }]
//!
//! [subset_B]
//! points = [1, 2]
//!
//! [solve]                              # SolveOptions fields plus starts
//! starts = [[1, 1], [1, 2]]
//!
//! [check]                              # SamplePlan fields plus budget, tol, t_max
//! step = 0.1
//! ```
//!
//! Numbers may be written as TOML numbers or as `"p/q"` strings.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::DEFAULT_QUADRUPLE_BUDGET;
use crate::control::{ControlClass, ControlFunction};
use crate::expr::{compile, ExprError, Var};
use crate::maps::{CouplingMap, SelfMap};
use crate::metric::{Carrier, Interval, MetricSpace, Point, SamplePlan, SubsetSpec};
use crate::problem::{CoincidenceProblem, Problem, StrongCoupledProblem};
use crate::solver::SolveOptions;

pub const DEFAULT_CHECK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Syntax(String),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("`{key}`: {message}")]
    KindMismatch { key: String, message: String },
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("`{key}`: {source}")]
    Expr { key: String, source: ExprError },
    #[error("unknown problem `{name}`; available: {}", available.join(", "))]
    UnknownBuiltin { name: String, available: Vec<String> },
}

fn invalid(key: impl Into<String>, message: impl ToString) -> DocumentError {
    DocumentError::Invalid { key: key.into(), message: message.to_string() }
}

/// A number written either natively or as a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    pub fn resolve(&self, key: &str) -> Result<f64, DocumentError> {
        match self {
            Num::Int(i) => Ok(*i as f64),
            Num::Float(f) => Ok(*f),
            Num::Text(s) => parse_number(s).ok_or_else(|| invalid(key, format!("`{s}` is not a number"))),
        }
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num::Float(v)
    }
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let (p, q): (f64, f64) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
        return (q != 0.0).then_some(p / q);
    }
    s.parse().ok().filter(|v: &f64| v.is_finite())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub carrier: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<Num>,
    #[serde(default = "yes")]
    pub lo_closed: bool,
    #[serde(default = "yes")]
    pub hi_closed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalDoc {
    pub lo: Num,
    pub hi: Num,
    #[serde(default = "yes")]
    pub lo_closed: bool,
    #[serde(default = "yes")]
    pub hi_closed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<IntervalDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapDoc {
    Expr(String),
    Builtin { builtin: String },
    Table { table: BTreeMap<String, String> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlDoc {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preimage_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<[StartDoc; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartDoc {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
}

/// The raw document, before expressions are compiled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub problem_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(rename = "map_F")]
    pub map_f: Option<MapDoc>,
    #[serde(rename = "map_T", default, skip_serializing_if = "Option::is_none")]
    pub map_t: Option<String>,
    #[serde(rename = "map_T_inverse", default, skip_serializing_if = "Option::is_none")]
    pub map_t_inverse: Option<String>,
    pub phi: Option<ControlDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<ControlDoc>,
    pub space: Option<SpaceDoc>,
    #[serde(rename = "subset_A")]
    pub subset_a: Option<SubsetDoc>,
    #[serde(rename = "subset_B")]
    pub subset_b: Option<SubsetDoc>,
    #[serde(default)]
    pub solve: SolveDoc,
    #[serde(default)]
    pub check: CheckDoc,
}

/// A compiled document with its run settings.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub name: String,
    pub description: Option<String>,
    pub problem: Problem,
    pub check_plan: SamplePlan,
    pub check_tol: f64,
    pub budget: u64,
    /// Upper end of the control-function grid; `None` means derive it from the sets.
    pub t_max: Option<f64>,
    pub solve_opts: SolveOptions,
    pub starts: Vec<(Point, Point)>,
}

pub fn parse_document(text: &str) -> Result<ProblemDocument, DocumentError> {
    toml::from_str(text).map_err(|e| DocumentError::Syntax(e.message().to_string() + &span_hint(text, e.span())))
}

fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    let Some(span) = span else { return String::new() };
    let before = &text[..span.start.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    format!(" (line {line}, column {column})")
}

/// Parses and compiles a TOML problem document.
pub fn parse_problem(text: &str) -> Result<LoadedProblem, DocumentError> {
    load_document(&parse_document(text)?)
}

fn required<'a, T>(value: &'a Option<T>, key: &str) -> Result<&'a T, DocumentError> {
    value.as_ref().ok_or_else(|| DocumentError::MissingKey(key.to_string()))
}

pub fn load_document(doc: &ProblemDocument) -> Result<LoadedProblem, DocumentError> {
    let kind = required(&doc.problem_kind, "problem_kind")?.as_str();
    if kind != "coincidence" && kind != "strong_coupled" {
        return Err(invalid("problem_kind", format!("expected \"coincidence\" or \"strong_coupled\", got \"{kind}\"")));
    }
    let space = resolve_space(required(&doc.space, "space")?)?;
    let a = resolve_subset(required(&doc.subset_a, "subset_A")?, &space, "subset_A")?;
    let b = resolve_subset(required(&doc.subset_b, "subset_B")?, &space, "subset_B")?;
    let f = resolve_coupling(required(&doc.map_f, "map_F")?)?;
    let phi = resolve_control(required(&doc.phi, "phi")?, "phi")?;
    let geometry = |e: crate::error::Error, key: &str| invalid(key, e);

    let problem: Problem = if kind == "coincidence" {
        if doc.psi.is_some() {
            return Err(DocumentError::KindMismatch { key: "psi".into(), message: "psi is only used by strong_coupled problems".into() });
        }
        check_class(&phi, ControlClass::Phi, "phi")?;
        let t = resolve_self_map(required(&doc.map_t, "map_T")?, doc.map_t_inverse.as_deref())?;
        CoincidenceProblem::new(space, a, b, f, t, phi).map_err(|e| geometry(e, "space"))?.into()
    } else {
        if doc.map_t.is_some() || doc.map_t_inverse.is_some() {
            return Err(DocumentError::KindMismatch { key: "map_T".into(), message: "map_T is only used by coincidence problems".into() });
        }
        let psi = resolve_control(required(&doc.psi, "psi")?, "psi")?;
        check_class(&phi, ControlClass::AlteringDistance, "phi")?;
        check_class(&psi, ControlClass::AlteringDistance, "psi")?;
        StrongCoupledProblem::new(space, a, b, f, phi, psi).map_err(|e| geometry(e, "space"))?.into()
    };

    let c = &doc.check;
    let defaults = SamplePlan::default();
    let check_plan = SamplePlan {
        grid_count: c.grid_count.unwrap_or(defaults.grid_count),
        jitter_count: c.jitter_count.unwrap_or(defaults.jitter_count),
        seed: c.seed.unwrap_or(defaults.seed),
        step: c.step,
    };
    let s = &doc.solve;
    let base = SolveOptions::default();
    let solve_opts = SolveOptions {
        tol: s.tol.unwrap_or(base.tol),
        max_iter: s.max_iter.unwrap_or(base.max_iter),
        preimage_tol: s.preimage_tol.unwrap_or(base.preimage_tol),
        seed: s.seed.unwrap_or(base.seed),
        preimage_plan: check_plan.clone(),
    };
    solve_opts.validate().map_err(|e| invalid("solve", e))?;
    let starts = s
        .starts
        .iter()
        .enumerate()
        .map(|(i, [x, y])| {
            let key = format!("solve.starts[{i}]");
            Ok((resolve_start(x, problem.space(), &key)?, resolve_start(y, problem.space(), &key)?))
        })
        .collect::<Result<Vec<_>, DocumentError>>()?;

    Ok(LoadedProblem {
        name: doc.name.clone().unwrap_or_else(|| "unnamed".into()),
        description: doc.description.clone(),
        problem,
        check_plan,
        check_tol: c.tol.unwrap_or(DEFAULT_CHECK_TOL),
        budget: c.budget.unwrap_or(DEFAULT_QUADRUPLE_BUDGET),
        t_max: c.t_max,
        solve_opts,
        starts,
    })
}

fn check_class(f: &ControlFunction, wanted: ControlClass, key: &str) -> Result<(), DocumentError> {
    match f.class {
        ControlClass::Unclassified => Ok(()),
        c if c == wanted => Ok(()),
        c => Err(DocumentError::KindMismatch {
            key: format!("{key}.class"),
            message: format!("declared {c:?} but this problem kind needs {wanted:?}"),
        }),
    }
}

fn resolve_space(s: &SpaceDoc) -> Result<MetricSpace, DocumentError> {
    match s.carrier.as_str() {
        "real" => {
            if let Some(m) = s.metric.as_deref().filter(|m| *m != "usual") {
                return Err(invalid("space.metric", format!("real carriers use the usual metric, got \"{m}\"")));
            }
            let lo = s.lo.as_ref().map(|v| v.resolve("space.lo")).transpose()?.unwrap_or(f64::NEG_INFINITY);
            let hi = s.hi.as_ref().map(|v| v.resolve("space.hi")).transpose()?.unwrap_or(f64::INFINITY);
            if !(lo < hi) {
                return Err(invalid("space", format!("need lo < hi, got [{lo}, {hi}]")));
            }
            let bounds = Interval {
                lo,
                hi,
                lo_closed: s.lo_closed && lo.is_finite(),
                hi_closed: s.hi_closed && hi.is_finite(),
            };
            Ok(MetricSpace::real_line(bounds))
        }
        "finite" => {
            let labels = required(&s.labels, "space.labels")?.clone();
            match (s.metric.as_deref().unwrap_or("discrete"), &s.distances) {
                ("discrete", None) => MetricSpace::finite(labels).map_err(|e| invalid("space", e)),
                ("table", Some(t)) | ("discrete", Some(t)) => {
                    MetricSpace::finite_with_table(labels, t.clone()).map_err(|e| invalid("space.distances", e))
                }
                ("table", None) => Err(DocumentError::MissingKey("space.distances".into())),
                (m, _) => Err(invalid("space.metric", format!("unknown metric \"{m}\""))),
            }
        }
        other => Err(invalid("space.carrier", format!("expected \"real\" or \"finite\", got \"{other}\""))),
    }
}

fn resolve_subset(s: &SubsetDoc, space: &MetricSpace, key: &str) -> Result<SubsetSpec, DocumentError> {
    let given = [s.points.is_some(), s.intervals.is_some(), s.labels.is_some()].iter().filter(|b| **b).count();
    if given != 1 {
        return Err(invalid(key, "give exactly one of points, intervals or labels"));
    }
    let subset = if let Some(points) = &s.points {
        let pts = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let k = format!("{key}.points[{i}]");
                match (space.carrier(), p) {
                    (Carrier::FiniteSet(_), Num::Text(label)) => Ok(Point::label(label.clone())),
                    (Carrier::FiniteSet(_), _) => Err(DocumentError::KindMismatch { key: k, message: "finite carriers take labels".into() }),
                    (Carrier::RealLine(_), p) => p.resolve(&k).map(Point::Real),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        SubsetSpec::finite(pts).map_err(|e| invalid(key, e))?
    } else if let Some(labels) = &s.labels {
        if space.is_real() {
            return Err(DocumentError::KindMismatch { key: format!("{key}.labels"), message: "real carriers take points or intervals".into() });
        }
        SubsetSpec::finite(labels.iter().map(|l| Point::label(l.clone())).collect()).map_err(|e| invalid(key, e))?
    } else {
        let ivs = s.intervals.as_ref().unwrap();
        if !space.is_real() {
            return Err(DocumentError::KindMismatch { key: format!("{key}.intervals"), message: "finite carriers take labels".into() });
        }
        let ivs = ivs
            .iter()
            .enumerate()
            .map(|(i, iv)| {
                let k = format!("{key}.intervals[{i}]");
                Ok(Interval {
                    lo: iv.lo.resolve(&format!("{k}.lo"))?,
                    hi: iv.hi.resolve(&format!("{k}.hi"))?,
                    lo_closed: iv.lo_closed,
                    hi_closed: iv.hi_closed,
                })
            })
            .collect::<Result<Vec<_>, DocumentError>>()?;
        SubsetSpec::intervals(ivs).map_err(|e| invalid(key, e))?
    };
    subset.validate_in(space).map_err(|e| invalid(key, e))?;
    Ok(subset)
}

fn expr_err(key: &str) -> impl Fn(ExprError) -> DocumentError + '_ {
    move |source| DocumentError::Expr { key: key.to_string(), source }
}

pub const BUILTIN_MAPS: &[&str] = &["min", "max", "midpoint", "first", "second"];

fn resolve_coupling(m: &MapDoc) -> Result<CouplingMap, DocumentError> {
    match m {
        MapDoc::Expr(text) => {
            let e = compile(text, &[Var::X, Var::Y]).map_err(expr_err("map_F"))?;
            CouplingMap::from_expr(e).map_err(|e| invalid("map_F", e))
        }
        MapDoc::Builtin { builtin } => match builtin.as_str() {
            "min" => Ok(CouplingMap::from_real_fn("min(x, y)", f64::min)),
            "max" => Ok(CouplingMap::from_real_fn("max(x, y)", f64::max)),
            "midpoint" => Ok(CouplingMap::from_real_fn("(x + y) / 2", |x, y| (x + y) / 2.0)),
            "first" => Ok(CouplingMap::from_fn("x", |x, _| Ok(x.clone()))),
            "second" => Ok(CouplingMap::from_fn("y", |_, y| Ok(y.clone()))),
            other => Err(invalid("map_F.builtin", format!("unknown builtin \"{other}\"; available: {}", BUILTIN_MAPS.join(", ")))),
        },
        MapDoc::Table { table } => {
            let mut out = HashMap::new();
            for (k, v) in table {
                let (x, y) = k
                    .split_once(',')
                    .ok_or_else(|| invalid(format!("map_F.table.\"{k}\""), "keys are written \"x,y\""))?;
                out.insert((x.trim().to_string(), y.trim().to_string()), v.clone());
            }
            Ok(CouplingMap::from_table(out))
        }
    }
}

fn resolve_self_map(text: &str, inverse: Option<&str>) -> Result<SelfMap, DocumentError> {
    let t = if text.trim() == "identity" {
        SelfMap::identity()
    } else {
        let e = compile(text, &[Var::X]).map_err(expr_err("map_T"))?;
        SelfMap::from_expr(e).map_err(|e| invalid("map_T", e))?
    };
    match inverse {
        None => Ok(t),
        Some(inv) => {
            let e = compile(inv, &[Var::X]).map_err(expr_err("map_T_inverse"))?;
            t.with_inverse_expr(e).map_err(|e| invalid("map_T_inverse", e))
        }
    }
}

fn resolve_control(c: &ControlDoc, key: &str) -> Result<ControlFunction, DocumentError> {
    let num = |v: &Option<Num>, field: &str| -> Result<f64, DocumentError> {
        let k = format!("{key}.{field}");
        v.as_ref().ok_or_else(|| DocumentError::MissingKey(k.clone()))?.resolve(&k)
    };
    let param = |r: Result<ControlFunction, crate::error::ControlError>| r.map_err(|e| invalid(key, e));
    let f = match c.family.as_str() {
        "linear" => param(ControlFunction::linear(num(&c.slope, "slope")?))?,
        "power" => param(ControlFunction::power(num(&c.exponent, "exponent")?))?,
        "capped_linear" => param(ControlFunction::capped_linear(num(&c.slope, "slope")?, num(&c.threshold, "threshold")?))?,
        "identity" => ControlFunction::identity(),
        "expr" => {
            let k = format!("{key}.expr");
            let text = c.expr.as_ref().ok_or_else(|| DocumentError::MissingKey(k.clone()))?;
            let e = compile(text, &[Var::T]).map_err(expr_err(&k))?;
            param(ControlFunction::expr(e))?
        }
        other => return Err(invalid(format!("{key}.family"), format!("unknown family \"{other}\""))),
    };
    match c.class.as_deref() {
        None => Ok(f),
        Some("phi") => Ok(f.with_class(ControlClass::Phi)),
        Some("altering") => Ok(f.with_class(ControlClass::AlteringDistance)),
        Some(other) => Err(invalid(format!("{key}.class"), format!("expected \"phi\" or \"altering\", got \"{other}\""))),
    }
}

fn resolve_start(s: &StartDoc, space: &MetricSpace, key: &str) -> Result<Point, DocumentError> {
    if space.is_real() {
        let n = match s {
            StartDoc::Int(i) => Num::Int(*i),
            StartDoc::Float(f) => Num::Float(*f),
            StartDoc::Text(t) => Num::Text(t.clone()),
        };
        n.resolve(key).map(Point::Real)
    } else {
        match s {
            StartDoc::Text(t) => Ok(Point::label(t.clone())),
            _ => Err(DocumentError::KindMismatch { key: key.into(), message: "finite carriers take labels".into() }),
        }
    }
}

/// Parses a start coordinate given on the command line.
pub fn parse_point(text: &str, space: &MetricSpace) -> Result<Point, DocumentError> {
    let s = match text.parse::<i64>() {
        Ok(i) => StartDoc::Int(i),
        Err(_) => StartDoc::Text(text.to_string()),
    };
    resolve_start(&s, space, "start")
}

const EXAMPLE_219: &str = include_str!("../problems/example-2.1.9.toml");
const EXAMPLE_223: &str = include_str!("../problems/example-2.2.3.toml");
const BANACH_LINEAR: &str = include_str!("../problems/banach-linear.toml");
const NEGATIVE_MIDPOINT: &str = include_str!("../problems/negative-midpoint.toml");

pub const BUILTIN_NAMES: &[&str] = &["example-2.1.9", "example-2.2.3", "banach-linear", "negative-midpoint"];

/// The canonical document for a shipped problem.
pub fn builtin_registry(name: &str) -> Result<ProblemDocument, DocumentError> {
    let text = match name {
        "example-2.1.9" => EXAMPLE_219,
        "example-2.2.3" => EXAMPLE_223,
        "banach-linear" => BANACH_LINEAR,
        "negative-midpoint" => NEGATIVE_MIDPOINT,
        _ => {
            return Err(DocumentError::UnknownBuiltin {
                name: name.to_string(),
                available: BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    parse_document(text)
}

/// The source text of a shipped document.
pub fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "example-2.1.9" => Some(EXAMPLE_219),
        "example-2.2.3" => Some(EXAMPLE_223),
        "banach-linear" => Some(BANACH_LINEAR),
        "negative-midpoint" => Some(NEGATIVE_MIDPOINT),
        _ => None,
    }
}

/// Applies `key = value` parameters to a built-in document. Only
/// `banach-linear` takes one (`k`, the contraction constant in (0, 1)).
pub fn apply_params(name: &str, doc: &mut ProblemDocument, params: &[(String, f64)]) -> Result<(), DocumentError> {
    for (key, value) in params {
        match (name, key.as_str()) {
            ("banach-linear", "k") => {
                let k = *value;
                if !(k > 0.0 && k < 1.0) {
                    return Err(invalid("k", format!("contraction constant must lie in (0, 1), got {k}")));
                }
                doc.map_f = Some(MapDoc::Expr(format!("{k:?} * (x + y) / 2 + {:?} / 2", 1.0 - k)));
                doc.phi = Some(ControlDoc { family: "linear".into(), slope: Some(Num::Float(1.0 - k)), ..ControlDoc::default() });
            }
            _ => return Err(invalid(key.clone(), format!("problem `{name}` has no parameter `{key}`"))),
        }
    }
    Ok(())
}

/// Loads a shipped problem with optional parameters.
pub fn load_builtin(name: &str, params: &[(String, f64)]) -> Result<LoadedProblem, DocumentError> {
    let mut doc = builtin_registry(name)?;
    apply_params(name, &mut doc, params)?;
    load_document(&doc)
}

/// The banach-linear family for contraction constant `k`.
pub fn banach_linear(k: f64) -> Result<LoadedProblem, DocumentError> {
    load_builtin("banach-linear", &[("k".to_string(), k)])
}
