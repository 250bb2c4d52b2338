//! The constructive iterations behind both theorems.
//!
//! Coincidence runs pick `x_{n+1}` and `y_{n+1}` as `T`-preimages of
//! `F(y_n, x_n)` in `A` and `F(x_n, y_n)` in `B`; strong runs apply
//! `x_{n+1} = F(y_n, x_n)`, `y_{n+1} = F(x_n, y_n)` directly. Each completed
//! step produces one [`TraceRow`] carrying the monotone quantities `D_n` and
//! `R_n` from the proofs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::PreimageIndex;
use crate::metric::{sample_intersection, sample_points, Point, SamplePlan, SubsetSpec};
use crate::problem::{CoincidenceProblem, Problem, StrongCoupledProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub preimage_tol: f64,
    pub seed: u64,
    /// Samples scanned by the numeric preimage search.
    pub preimage_plan: SamplePlan,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 10_000, preimage_tol: 1e-9, seed: 0, preimage_plan: SamplePlan::default() }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidOptions(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.preimage_tol > 0.0 && self.preimage_tol.is_finite()) {
            return Err(Error::InvalidOptions(format!("preimage_tol must be positive, got {}", self.preimage_tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidOptions("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub x: Point,
    pub y: Point,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ty: Option<Point>,
    pub d: f64,
    pub r: f64,
    /// `max(D_n, R_n)`, the quantity compared against `tol`.
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn d_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.d).collect()
    }

    pub fn r_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.r).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    EarlyCoincidence,
    MaxIterExceeded,
    PreimageFailure,
    DiagnosticViolation,
}

impl Status {
    pub fn is_success(self) -> bool {
        matches!(self, Status::Converged | Status::EarlyCoincidence)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidate {
    Pair(Point, Point),
    Point(Point),
}

impl Candidate {
    pub fn points(&self) -> (&Point, &Point) {
        match self {
            Candidate::Pair(a, b) => (a, b),
            Candidate::Point(x) => (x, x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureDetail {
    Preimage {
        step: usize,
        /// `"x"` when the preimage was sought in `A`, `"y"` for `B`.
        side: String,
        target: Point,
        nearest_distance: Option<f64>,
    },
    Diagnostic {
        step: usize,
        quantity: String,
        previous: f64,
        current: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: Status,
    pub candidate: Option<Candidate>,
    pub residuals: BTreeMap<String, f64>,
    pub iterations_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<FailureDetail>,
}

fn check_start(a: &SubsetSpec, b: &SubsetSpec, x0: &Point, y0: &Point) -> Result<()> {
    if !a.contains(x0)? {
        return Err(Error::StartOutsideSubset { point: x0.clone(), subset: "A" });
    }
    if !b.contains(y0)? {
        return Err(Error::StartOutsideSubset { point: y0.clone(), subset: "B" });
    }
    Ok(())
}

/// Flags `cur` exceeding a positive predecessor by more than `tol`.
fn increase(prev: Option<&TraceRow>, cur: &TraceRow, tol: f64) -> Option<FailureDetail> {
    let prev = prev?;
    for (q, p, c) in [("D", prev.d, cur.d), ("R", prev.r, cur.r)] {
        if p > tol && c > p + tol {
            return Some(FailureDetail::Diagnostic { step: cur.n, quantity: q.into(), previous: p, current: c });
        }
    }
    None
}

fn coincidence_residuals(p: &CoincidenceProblem, a: &Point, b: &Point) -> Result<BTreeMap<String, f64>> {
    let d = &p.space;
    let (fab, fba) = (p.f.eval(a, b)?, p.f.eval(b, a)?);
    let (ta, tb) = (p.t.eval(a)?, p.t.eval(b)?);
    Ok(BTreeMap::from([
        ("d(F(a,b),T(a))".to_string(), d.distance(&fab, &ta)?),
        ("d(F(b,a),T(b))".to_string(), d.distance(&fba, &tb)?),
        ("d(T(a),T(b))".to_string(), d.distance(&ta, &tb)?),
        ("d(F(a,b),F(b,a))".to_string(), d.distance(&fab, &fba)?),
    ]))
}

fn strong_residuals(p: &StrongCoupledProblem, x: &Point, y: &Point) -> Result<BTreeMap<String, f64>> {
    let d = &p.space;
    Ok(BTreeMap::from([
        ("d(F(x*,x*),x*)".to_string(), d.distance(&p.f.eval(x, x)?, x)?),
        ("d(x*,y*)".to_string(), d.distance(x, y)?),
    ]))
}

/// Coupled coincidence search for `F` and `T`.
///
/// Stops at the first row with `D_n <= tol`. The candidate `(x_n, y_n)` is
/// `Converged` when `R_n <= tol` and all four residuals are within `tol`,
/// and `EarlyCoincidence` otherwise.
pub fn iterate_coincidence(
    problem: &CoincidenceProblem,
    x0: &Point,
    y0: &Point,
    opts: &SolveOptions,
) -> Result<(SolveReport, IterationTrace)> {
    opts.validate()?;
    check_start(&problem.a, &problem.b, x0, y0)?;
    let d = &problem.space;
    let index_a = PreimageIndex::build(&problem.t, &problem.a, &opts.preimage_plan)?;
    let index_b = PreimageIndex::build(&problem.t, &problem.b, &opts.preimage_plan)?;
    let mut trace = IterationTrace::default();
    let (mut x, mut y) = (x0.clone(), y0.clone());
    let (mut tx, mut ty) = (problem.t.eval(&x)?, problem.t.eval(&y)?);

    for n in 0..opts.max_iter {
        let target_x = problem.f.eval(&y, &x)?;
        let target_y = problem.f.eval(&x, &y)?;
        let seek = |index: &PreimageIndex, target: &Point, subset: &SubsetSpec, side: &str| -> Result<std::result::Result<Point, SolveReport>> {
            Ok(index.find(&problem.t, d, target, subset, opts.preimage_tol)?.map_err(|miss| SolveReport {
                status: Status::PreimageFailure,
                candidate: None,
                residuals: BTreeMap::new(),
                iterations_used: n,
                detail: Some(FailureDetail::Preimage {
                    step: n + 1,
                    side: side.into(),
                    target: miss.target,
                    nearest_distance: miss.nearest_distance,
                }),
            }))
        };
        let nx = match seek(&index_a, &target_x, &problem.a, "x")? {
            Ok(p) => p,
            Err(report) => return Ok((report, trace)),
        };
        let ny = match seek(&index_b, &target_y, &problem.b, "y")? {
            Ok(p) => p,
            Err(report) => return Ok((report, trace)),
        };
        let (ntx, nty) = (problem.t.eval(&nx)?, problem.t.eval(&ny)?);
        let dn = d.distance(&tx, &nty)?.max(d.distance(&ty, &ntx)?);
        let rn = d.distance(&tx, &ty)?;
        let row = TraceRow {
            n,
            x: x.clone(),
            y: y.clone(),
            tx: Some(tx.clone()),
            ty: Some(ty.clone()),
            d: dn,
            r: rn,
            residual: dn.max(rn),
        };
        let violation = increase(trace.rows.last(), &row, opts.tol);
        trace.rows.push(row);
        if let Some(detail) = violation {
            let report = SolveReport {
                status: Status::DiagnosticViolation,
                candidate: Some(Candidate::Pair(x, y)),
                residuals: BTreeMap::new(),
                iterations_used: trace.len(),
                detail: Some(detail),
            };
            return Ok((report, trace));
        }
        if dn <= opts.tol {
            let residuals = coincidence_residuals(problem, &x, &y)?;
            let status = if rn <= opts.tol && residuals.values().all(|r| *r <= opts.tol) {
                Status::Converged
            } else {
                Status::EarlyCoincidence
            };
            let report = SolveReport {
                status,
                candidate: Some(Candidate::Pair(x, y)),
                residuals,
                iterations_used: trace.len(),
                detail: None,
            };
            return Ok((report, trace));
        }
        (x, y, tx, ty) = (nx, ny, ntx, nty);
    }
    let residuals = coincidence_residuals(problem, &x, &y)?;
    let report = SolveReport {
        status: Status::MaxIterExceeded,
        candidate: Some(Candidate::Pair(x, y)),
        residuals,
        iterations_used: trace.len(),
        detail: None,
    };
    Ok((report, trace))
}

/// Strong coupled fixed-point iteration for `F`.
///
/// Stops at the first row with `D_n <= tol`. `x* = x_n` is `Converged` when
/// `R_n <= tol` and `d(F(x*,x*), x*) <= tol`; otherwise the pair is reported
/// as `EarlyCoincidence` (a coupled, not strong, fixed point).
pub fn iterate_strong_coupled(
    problem: &StrongCoupledProblem,
    x0: &Point,
    y0: &Point,
    opts: &SolveOptions,
) -> Result<(SolveReport, IterationTrace)> {
    opts.validate()?;
    check_start(&problem.a, &problem.b, x0, y0)?;
    let d = &problem.space;
    let mut trace = IterationTrace::default();
    let (mut x, mut y) = (x0.clone(), y0.clone());

    for n in 0..opts.max_iter {
        let nx = problem.f.eval(&y, &x)?;
        let ny = problem.f.eval(&x, &y)?;
        if !problem.a.contains(&nx)? {
            return Err(Error::OrbitLeftSubset { point: nx, step: n + 1, subset: "A" });
        }
        if !problem.b.contains(&ny)? {
            return Err(Error::OrbitLeftSubset { point: ny, step: n + 1, subset: "B" });
        }
        let dn = d.distance(&nx, &y)?.max(d.distance(&ny, &x)?);
        let rn = d.distance(&x, &y)?;
        let row = TraceRow { n, x: x.clone(), y: y.clone(), tx: None, ty: None, d: dn, r: rn, residual: dn.max(rn) };
        let violation = increase(trace.rows.last(), &row, opts.tol);
        trace.rows.push(row);
        if let Some(detail) = violation {
            let report = SolveReport {
                status: Status::DiagnosticViolation,
                candidate: Some(Candidate::Pair(x, y)),
                residuals: BTreeMap::new(),
                iterations_used: trace.len(),
                detail: Some(detail),
            };
            return Ok((report, trace));
        }
        if dn <= opts.tol {
            let residuals = strong_residuals(problem, &x, &y)?;
            let (status, candidate) = if residuals.values().all(|r| *r <= opts.tol) {
                (Status::Converged, Candidate::Point(x))
            } else {
                (Status::EarlyCoincidence, Candidate::Pair(x, y))
            };
            let report = SolveReport {
                status,
                candidate: Some(candidate),
                residuals,
                iterations_used: trace.len(),
                detail: None,
            };
            return Ok((report, trace));
        }
        (x, y) = (nx, ny);
    }
    let residuals = strong_residuals(problem, &x, &y)?;
    let report = SolveReport {
        status: Status::MaxIterExceeded,
        candidate: Some(Candidate::Pair(x, y)),
        residuals,
        iterations_used: trace.len(),
        detail: None,
    };
    Ok((report, trace))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: (Point, Point),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SolveReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStartReport {
    /// All converged candidates lie pairwise within `10 * tol`. Only
    /// computed for strong problems; coincidence points need not be unique.
    pub consistent: Option<bool>,
    pub outcomes: Vec<StartOutcome>,
    /// Distinct converged points, in start order.
    pub points: Vec<Point>,
}

/// Runs the strong iteration from every start, concurrently; outcomes keep
/// the order of `starts` and one failing start does not stop the others.
pub fn multi_start_unique(
    problem: &StrongCoupledProblem,
    starts: &[(Point, Point)],
    opts: &SolveOptions,
) -> MultiStartReport {
    let outcomes: Vec<StartOutcome> = std::thread::scope(|s| {
        let handles: Vec<_> = starts
            .iter()
            .map(|(x0, y0)| s.spawn(move || iterate_strong_coupled(problem, x0, y0, opts)))
            .collect();
        handles
            .into_iter()
            .zip(starts)
            .map(|(h, start)| {
                let res = h.join().unwrap_or_else(|_| Err(Error::InvalidOptions("solver thread panicked".into())));
                match res {
                    Ok((report, _)) => StartOutcome { start: start.clone(), report: Some(report), error: None },
                    Err(e) => StartOutcome { start: start.clone(), report: None, error: Some(e.to_string()) },
                }
            })
            .collect()
    });
    let converged: Vec<&Point> = outcomes
        .iter()
        .filter_map(|o| o.report.as_ref())
        .filter(|r| r.status == Status::Converged)
        .filter_map(|r| r.candidate.as_ref().map(|c| c.points().0))
        .collect();
    let mut consistent = true;
    for (i, p) in converged.iter().enumerate() {
        for q in &converged[i + 1..] {
            let close = problem.space.distance(p, q).map(|dist| dist <= 10.0 * opts.tol).unwrap_or(false);
            consistent &= close;
        }
    }
    let mut points: Vec<Point> = Vec::new();
    for p in converged {
        if !points.iter().any(|q| problem.space.distance(p, q).map(|dist| dist <= 10.0 * opts.tol).unwrap_or(false)) {
            points.push(p.clone());
        }
    }
    MultiStartReport { consistent: Some(consistent), outcomes, points }
}

/// Runs the coincidence iteration from every start. No consistency verdict
/// is formed; `points` lists the distinct converged pairs' first components.
pub fn multi_start_coincidence(
    problem: &CoincidenceProblem,
    starts: &[(Point, Point)],
    opts: &SolveOptions,
) -> MultiStartReport {
    let outcomes: Vec<StartOutcome> = starts
        .iter()
        .map(|(x0, y0)| match iterate_coincidence(problem, x0, y0, opts) {
            Ok((report, _)) => StartOutcome { start: (x0.clone(), y0.clone()), report: Some(report), error: None },
            Err(e) => StartOutcome { start: (x0.clone(), y0.clone()), report: None, error: Some(e.to_string()) },
        })
        .collect();
    let mut points: Vec<Point> = Vec::new();
    for r in outcomes.iter().filter_map(|o| o.report.as_ref()).filter(|r| r.status == Status::Converged) {
        if let Some(p) = r.candidate.as_ref().map(|c| c.points().0) {
            if !points.iter().any(|q| q.approx_eq(p)) {
                points.push(p.clone());
            }
        }
    }
    MultiStartReport { consistent: None, outcomes, points }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDiagnostics {
    pub d_monotone: bool,
    pub r_monotone: bool,
    pub first_d_violation: Option<usize>,
    pub first_r_violation: Option<usize>,
    /// Last observed values; the proofs force both to zero.
    pub d_limit: Option<f64>,
    pub r_limit: Option<f64>,
}

pub fn trace_diagnostics(trace: &IterationTrace, tol: f64) -> TraceDiagnostics {
    let first = |vals: &[f64]| {
        vals.windows(2)
            .position(|w| w[0] > tol && w[1] > w[0] + tol)
            .map(|i| trace.rows[i + 1].n)
    };
    let (dv, rv) = (trace.d_values(), trace.r_values());
    let (first_d_violation, first_r_violation) = (first(&dv), first(&rv));
    TraceDiagnostics {
        d_monotone: first_d_violation.is_none(),
        r_monotone: first_r_violation.is_none(),
        first_d_violation,
        first_r_violation,
        d_limit: dv.last().copied(),
        r_limit: rv.last().copied(),
    }
}

pub const DEFAULT_SEARCH_CAP: u64 = 1_000_000;

/// Exhaustive oracle over the sampled sets.
///
/// Coincidence problems: every sampled `(a, b)` in `A x B` with
/// `d(F(a,b), T(a)) <= tol` and `d(F(b,a), T(b)) <= tol`. Strong problems:
/// every sampled `x` in `A ∩ B` with `d(F(x,x), x) <= tol`.
pub fn brute_force_search(problem: &Problem, plan: &SamplePlan, tol: f64, cap: u64) -> Result<Vec<Candidate>> {
    match problem {
        Problem::Coincidence(p) => {
            let sa = sample_points(&p.a, plan);
            let sb = sample_points(&p.b, plan);
            let needed = sa.len() as u64 * sb.len() as u64;
            if needed > cap {
                return Err(Error::BudgetExceeded { needed, cap });
            }
            let d = &p.space;
            let tb = sb.iter().map(|b| p.t.eval(b)).collect::<std::result::Result<Vec<_>, _>>()?;
            let mut out = Vec::new();
            for a in &sa {
                let ta = p.t.eval(a)?;
                for (b, tb) in sb.iter().zip(&tb) {
                    if d.distance(&p.f.eval(a, b)?, &ta)? <= tol && d.distance(&p.f.eval(b, a)?, tb)? <= tol {
                        out.push(Candidate::Pair(a.clone(), b.clone()));
                    }
                }
            }
            Ok(out)
        }
        Problem::StrongCoupled(p) => {
            let pts = sample_intersection(&p.a, &p.b, plan)?;
            if pts.len() as u64 > cap {
                return Err(Error::BudgetExceeded { needed: pts.len() as u64, cap });
            }
            let mut out = Vec::new();
            for x in pts {
                if p.space.distance(&p.f.eval(&x, &x)?, &x)? <= tol {
                    out.push(Candidate::Point(x));
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{make_capped_linear, ControlFunction};
    use crate::maps::{CouplingMap, SelfMap};
    use crate::metric::{Interval, MetricSpace};

    fn ex219() -> CoincidenceProblem {
        CoincidenceProblem::new(
            MetricSpace::real_line(Interval::open(-5.0, 5.0)),
            SubsetSpec::interval(0.0, 2.0).unwrap(),
            SubsetSpec::interval(0.0, 4.0).unwrap(),
            CouplingMap::from_real_fn("F", |x, y| {
                if (0.0..=2.0).contains(&x) && (0.0..=2.0).contains(&y) {
                    2.0
                } else {
                    (x + y) / 24.0
                }
            }),
            SelfMap::from_real_fn("T", |x| if x <= 2.0 { 2.0 } else { 4.0 }),
            make_capped_linear(2.0 / 3.0, 47.0 / 24.0).unwrap(),
        )
        .unwrap()
    }

    fn ex223() -> StrongCoupledProblem {
        StrongCoupledProblem::new(
            MetricSpace::real_line(Interval::closed(0.0, 3.0)),
            SubsetSpec::reals(&[1.0]).unwrap(),
            SubsetSpec::reals(&[1.0, 2.0]).unwrap(),
            CouplingMap::from_real_fn("min", f64::min),
            ControlFunction::power(2.0).unwrap(),
            ControlFunction::identity(),
        )
        .unwrap()
    }

    fn quarter_sum() -> StrongCoupledProblem {
        StrongCoupledProblem::new(
            MetricSpace::real_line(Interval::closed(0.0, 1.0)),
            SubsetSpec::interval(0.0, 1.0).unwrap(),
            SubsetSpec::interval(0.0, 1.0).unwrap(),
            CouplingMap::from_real_fn("q", |x, y| (x + y) / 4.0),
            ControlFunction::linear(0.5).unwrap(),
            ControlFunction::identity(),
        )
        .unwrap()
    }

    fn r(v: f64) -> Point {
        Point::Real(v)
    }

    #[test]
    fn example_coincidence_from_one_one() {
        let (rep, trace) = iterate_coincidence(&ex219(), &r(1.0), &r(1.0), &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, Status::Converged);
        assert_eq!(rep.candidate, Some(Candidate::Pair(r(1.0), r(1.0))));
        assert!(rep.residuals.values().all(|v| *v == 0.0));
        assert_eq!(rep.residuals.len(), 4);
        assert_eq!(trace.rows[0].tx, Some(r(2.0)));
    }

    #[test]
    fn example_coincidence_preimage_failure() {
        let (rep, trace) = iterate_coincidence(&ex219(), &r(1.0), &r(3.0), &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, Status::PreimageFailure);
        assert!(trace.is_empty());
        match rep.detail.unwrap() {
            FailureDetail::Preimage { step, side, target, nearest_distance } => {
                assert_eq!(step, 1);
                assert_eq!(side, "x");
                assert!((target.as_real().unwrap() - 1.0 / 6.0).abs() < 1e-15);
                assert!((nearest_distance.unwrap() - 11.0 / 6.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_map_with_identity() {
        let p = CoincidenceProblem::new(
            MetricSpace::real_line(Interval::closed(0.0, 1.0)),
            SubsetSpec::interval(0.0, 1.0).unwrap(),
            SubsetSpec::interval(0.0, 1.0).unwrap(),
            CouplingMap::from_real_fn("c", |_, _| 0.3),
            SelfMap::identity(),
            ControlFunction::linear(0.5).unwrap(),
        )
        .unwrap();
        let (rep, trace) = iterate_coincidence(&p, &r(0.9), &r(0.1), &SolveOptions::default()).unwrap();
        assert!(rep.status.is_success());
        assert!(trace.len() <= 2);
        assert_eq!(rep.candidate, Some(Candidate::Pair(r(0.3), r(0.3))));
        let diag = trace_diagnostics(&trace, 1e-9);
        assert_eq!((diag.d_limit, diag.r_limit), (Some(0.0), Some(0.0)));
    }

    #[test]
    fn start_outside_subset_is_rejected() {
        let err = iterate_coincidence(&ex219(), &r(3.0), &r(1.0), &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::StartOutsideSubset { subset: "A", .. }));
    }

    #[test]
    fn example_strong_runs() {
        let opts = SolveOptions::default();
        let (rep, trace) = iterate_strong_coupled(&ex223(), &r(1.0), &r(2.0), &opts).unwrap();
        assert_eq!(rep.status, Status::Converged);
        assert_eq!(rep.candidate, Some(Candidate::Point(r(1.0))));
        assert_eq!(rep.iterations_used, 2);
        assert_eq!(trace.d_values(), vec![1.0, 0.0]);
        assert_eq!(rep.residuals["d(F(x*,x*),x*)"], 0.0);

        let m = multi_start_unique(&ex223(), &[(r(1.0), r(1.0)), (r(1.0), r(2.0))], &opts);
        assert_eq!(m.consistent, Some(true));
        assert_eq!(m.points, vec![r(1.0)]);
        let diag = trace_diagnostics(&trace, opts.tol);
        assert!(diag.d_monotone && diag.r_monotone);
    }

    #[test]
    fn singleton_converges_in_one_step() {
        let one = SubsetSpec::reals(&[0.5]).unwrap();
        let p = StrongCoupledProblem::new(
            MetricSpace::real_line(Interval::closed(0.0, 1.0)),
            one.clone(),
            one,
            CouplingMap::from_real_fn("c", |_, _| 0.5),
            ControlFunction::linear(0.5).unwrap(),
            ControlFunction::identity(),
        )
        .unwrap();
        let (rep, _) = iterate_strong_coupled(&p, &r(0.5), &r(0.5), &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, Status::Converged);
        assert_eq!(rep.iterations_used, 1);
    }

    #[test]
    fn quarter_sum_converges_to_zero_from_corners() {
        let opts = SolveOptions::default();
        let corners: Vec<(Point, Point)> =
            [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)].iter().map(|(a, b)| (r(*a), r(*b))).collect();
        let m = multi_start_unique(&quarter_sum(), &corners, &opts);
        assert_eq!(m.consistent, Some(true));
        for o in &m.outcomes {
            let rep = o.report.as_ref().unwrap();
            assert_eq!(rep.status, Status::Converged);
            let x = rep.candidate.as_ref().unwrap().points().0.as_real().unwrap();
            assert!(x.abs() <= 10.0 * opts.tol);
        }
    }

    #[test]
    fn expansive_map_trips_diagnostic() {
        let p = StrongCoupledProblem::new(
            MetricSpace::unbounded_real_line(),
            SubsetSpec::intervals(vec![Interval::closed(-1e6, 1e6)]).unwrap(),
            SubsetSpec::intervals(vec![Interval::closed(-1e6, 1e6)]).unwrap(),
            CouplingMap::from_real_fn("2x-y", |x, y| 2.0 * x - y),
            ControlFunction::linear(0.5).unwrap(),
            ControlFunction::identity(),
        )
        .unwrap();
        let (rep, trace) = iterate_strong_coupled(&p, &r(0.0), &r(1.0), &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, Status::DiagnosticViolation);
        assert_eq!(trace.d_values(), vec![1.0, 3.0]);
        assert_eq!(trace_diagnostics(&trace, 1e-9).first_d_violation, Some(1));
    }

    #[test]
    fn orbit_leaving_b_is_an_error() {
        let p = StrongCoupledProblem::new(
            MetricSpace::real_line(Interval::closed(0.0, 3.0)),
            SubsetSpec::reals(&[1.0]).unwrap(),
            SubsetSpec::reals(&[1.0, 2.0]).unwrap(),
            CouplingMap::from_real_fn("max", f64::max),
            ControlFunction::linear(0.5).unwrap(),
            ControlFunction::identity(),
        )
        .unwrap();
        let err = iterate_strong_coupled(&p, &r(1.0), &r(2.0), &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::OrbitLeftSubset { subset: "A", step: 1, .. }));
    }

    #[test]
    fn max_iter_is_reported() {
        let opts = SolveOptions { max_iter: 3, ..SolveOptions::default() };
        let (rep, trace) = iterate_strong_coupled(&quarter_sum(), &r(1.0), &r(1.0), &opts).unwrap();
        assert_eq!(rep.status, Status::MaxIterExceeded);
        assert_eq!(trace.len(), 3);
    }

    #[test]
    fn brute_force_examples() {
        let half = SamplePlan { grid_count: 2, ..SamplePlan::with_step(0.5) };
        let c = brute_force_search(&ex219().into(), &half, 1e-12, DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(c.len(), 5 * 5);
        assert!(c.iter().all(|c| c.points().1.as_real().unwrap() <= 2.0));

        let s = brute_force_search(&ex223().into(), &SamplePlan::default(), 1e-12, DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(s, vec![Candidate::Point(r(1.0))]);

        let mut disjoint = ex223();
        disjoint.a = SubsetSpec::reals(&[0.0]).unwrap();
        let s = brute_force_search(&disjoint.into(), &SamplePlan::default(), 1e-12, DEFAULT_SEARCH_CAP).unwrap();
        assert!(s.is_empty());

        let err = brute_force_search(&ex219().into(), &half, 1e-12, 10).unwrap_err();
        assert_eq!(err, Error::BudgetExceeded { needed: 45, cap: 10 });
    }

    #[test]
    fn options_are_validated() {
        let bad = SolveOptions { tol: 0.0, ..SolveOptions::default() };
        assert!(iterate_strong_coupled(&ex223(), &r(1.0), &r(1.0), &bad).is_err());
    }
}
