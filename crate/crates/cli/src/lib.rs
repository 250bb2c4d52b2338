//! Subcommand implementations for the `coupled` binary.
//!
//! Every command returns a [`Run`]: the JSON [`RunReport`], the human
//! summary for standard output, and the trace of the first solve when one
//! was run. Writing files and choosing the process exit status is left to
//! `main`.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use clap::Args;
use coupled_core::checks::{
    check_control, check_coupling, check_image_intersection, check_phi_psi_contraction_with_budget,
    check_phi_t_contraction_with_budget, check_range_compatibility, check_scc_map, check_subset_intersection,
    default_t_max, format_set,
};
use coupled_core::document::{self, DocumentError, LoadedProblem, BUILTIN_NAMES};
use coupled_core::solver::{multi_start_coincidence, multi_start_unique};
use coupled_core::{
    check_metric_axioms, iterate_coincidence, iterate_strong_coupled, sample_intersection, CheckReport, Error,
    IterationTrace, Point, Problem, RunReport, SolveReport, Status, Verdict,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SOLVE_FAILED: i32 = 2;
pub const EXIT_BAD_INPUT: i32 = 3;
pub const EXIT_PREIMAGE: i32 = 4;

/// Knobs shared by `check`, `solve` and `demo`.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Solver residual tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Grid points per interval when sampling
    #[arg(long)]
    pub samples: Option<usize>,
    /// Maximum grid spacing when sampling
    #[arg(long)]
    pub step: Option<f64>,
    /// Seeded random points added per interval
    #[arg(long)]
    pub jitter: Option<usize>,
    /// Seed for jittered samples
    #[arg(long)]
    pub seed: Option<u64>,
    /// Built-in parameter, e.g. `--param k=0.3`
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

/// Input the command could not work with; always exit 3.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

impl From<DocumentError> for InputError {
    fn from(e: DocumentError) -> Self {
        InputError(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Run {
    pub report: RunReport,
    pub summary: String,
    pub trace: Option<IterationTrace>,
}

fn parse_params(flags: &Flags) -> Result<Vec<(String, f64)>, InputError> {
    flags
        .params
        .iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| InputError(format!("parameter `{p}` is not KEY=VALUE")))?;
            let v: f64 = v.trim().parse().map_err(|_| InputError(format!("parameter `{p}` has a non-numeric value")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// A file path if one exists, a built-in name otherwise.
pub fn load_problem(source: &str, flags: &Flags) -> Result<LoadedProblem, InputError> {
    let params = parse_params(flags)?;
    let mut lp = if Path::new(source).is_file() {
        if !params.is_empty() {
            return Err(InputError("--param only applies to built-in problems".into()));
        }
        let text = std::fs::read_to_string(source).map_err(|e| InputError(format!("{source}: {e}")))?;
        let mut doc = document::parse_document(&text).map_err(|e| InputError(format!("{source}: {e}")))?;
        if doc.name.is_none() {
            doc.name = Path::new(source).file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        document::load_document(&doc).map_err(|e| InputError(format!("{source}: {e}")))?
    } else {
        document::load_builtin(source, &params)?
    };
    apply_flags(&mut lp, flags)?;
    Ok(lp)
}

fn apply_flags(lp: &mut LoadedProblem, flags: &Flags) -> Result<(), InputError> {
    if let Some(tol) = flags.tol {
        lp.solve_opts.tol = tol;
    }
    if let Some(n) = flags.max_iter {
        lp.solve_opts.max_iter = n;
    }
    if let Some(n) = flags.samples {
        lp.check_plan.grid_count = n;
    }
    if let Some(s) = flags.step {
        if !(s > 0.0) {
            return Err(InputError(format!("--step must be positive, got {s}")));
        }
        lp.check_plan.step = Some(s);
    }
    if let Some(n) = flags.jitter {
        lp.check_plan.jitter_count = n;
    }
    if let Some(seed) = flags.seed {
        lp.check_plan.seed = seed;
        lp.solve_opts.seed = seed;
    }
    lp.solve_opts.preimage_plan = lp.check_plan.clone();
    lp.solve_opts.validate().map_err(|e| InputError(e.to_string()))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs every hypothesis check for the problem kind, in the fixed order:
/// metric axioms, control functions, coupling, the kind-specific set
/// conditions, and the contraction inequality.
pub fn run_checks(lp: &LoadedProblem, report: &mut RunReport) -> Result<(), InputError> {
    let plan = &lp.check_plan;
    let tol = lp.check_tol;
    let (a, b) = lp.problem.subsets();
    let space = lp.problem.space();
    let ctx = |what: &str, e: Error| InputError(format!("{what} could not be evaluated: {e}"));
    let mut timed = |name: &str, f: &mut dyn FnMut() -> Result<Vec<CheckReport>, InputError>| -> Result<(), InputError> {
        let start = Instant::now();
        let out = f()?;
        report.timing_ms.insert(format!("check.{name}"), elapsed_ms(start));
        report.checks.extend(out);
        Ok(())
    };

    timed("metric_axioms", &mut || {
        Ok(vec![check_metric_axioms(space, plan, tol).map_err(|e| ctx("metric", e.into()))?])
    })?;
    let t_max = match lp.t_max {
        Some(t) => t,
        None => default_t_max(space, a, b, plan).map_err(|e| ctx("t_max", e))?,
    };
    timed("controls", &mut || {
        let controls = match &lp.problem {
            Problem::Coincidence(p) => vec![("phi", &p.phi)],
            Problem::StrongCoupled(p) => vec![("phi", &p.phi), ("psi", &p.psi)],
        };
        controls
            .into_iter()
            .map(|(name, f)| {
                let mut r = check_control(f, t_max, plan, tol).map_err(|e| ctx(name, e))?;
                if !r.property_name.starts_with(name) {
                    r.property_name = format!("{name}_{}", r.property_name);
                }
                Ok(r)
            })
            .collect()
    })?;
    timed("coupling", &mut || Ok(vec![check_coupling(lp.problem.coupling(), a, b, plan).map_err(|e| ctx("F", e))?]))?;
    match &lp.problem {
        Problem::Coincidence(p) => {
            timed("sets", &mut || {
                Ok(vec![
                    check_scc_map(&p.t, a, b, plan).map_err(|e| ctx("T", e))?,
                    check_image_intersection(&p.t, a, b, plan).map_err(|e| ctx("T", e))?,
                    check_range_compatibility(space, &p.f, &p.t, a, b, plan, lp.solve_opts.preimage_tol)
                        .map_err(|e| ctx("F or T", e))?,
                ])
            })?;
            timed("contraction", &mut || {
                Ok(vec![check_phi_t_contraction_with_budget(p, plan, tol, lp.budget).map_err(|e| ctx("contraction", e))?])
            })?;
        }
        Problem::StrongCoupled(p) => {
            timed("sets", &mut || Ok(vec![check_subset_intersection(a, b, plan).map_err(|e| ctx("A ∩ B", e))?]))?;
            timed("contraction", &mut || {
                Ok(vec![check_phi_psi_contraction_with_budget(p, plan, tol, lp.budget).map_err(|e| ctx("contraction", e))?])
            })?;
        }
    }
    Ok(())
}

fn check_exit_code(checks: &[CheckReport]) -> i32 {
    if checks.iter().any(|c| !c.advisory && c.verdict == Verdict::Fail) {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    }
}

pub fn status_exit_code(status: Status) -> i32 {
    match status {
        Status::Converged | Status::EarlyCoincidence => EXIT_OK,
        Status::MaxIterExceeded | Status::DiagnosticViolation => EXIT_SOLVE_FAILED,
        Status::PreimageFailure => EXIT_PREIMAGE,
    }
}

pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::StartOutsideSubset { .. } | Error::InvalidOptions(_) => EXIT_BAD_INPUT,
        _ => EXIT_SOLVE_FAILED,
    }
}

fn kind_label(p: &Problem) -> &'static str {
    match p {
        Problem::Coincidence(_) => "coupled coincidence",
        Problem::StrongCoupled(_) => "strong coupled fixed point",
    }
}

fn render_checks(out: &mut String, checks: &[CheckReport]) {
    let _ = writeln!(out, "{:<28} {:<13} {:>10} {:>10} {:>14}", "check", "verdict", "samples", "violations", "min margin");
    for c in checks {
        let verdict = if c.advisory { format!("{} (adv.)", c.verdict) } else { c.verdict.to_string() };
        let margin = c.max_margin.map(|m| format!("{m:.6e}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<28} {:<13} {:>10} {:>10} {:>14}",
            c.property_name, verdict, c.samples_tested, c.violation_count, margin
        );
        for n in &c.notes {
            let _ = writeln!(out, "    {n}");
        }
        if let Some(w) = &c.worst {
            let names: Vec<String> = w.witness.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(out, "    worst {}: {} (lhs {} vs rhs {})", w.clause, names.join(" "), w.lhs, w.rhs);
        }
    }
}

fn render_solve(out: &mut String, start: &(Point, Point), res: &Result<SolveReport, String>) {
    let _ = write!(out, "start ({}, {}): ", start.0, start.1);
    match res {
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
        }
        Ok(r) => {
            let cand = match &r.candidate {
                Some(coupled_core::Candidate::Pair(a, b)) => format!(" at ({a}, {b})"),
                Some(coupled_core::Candidate::Point(x)) => format!(" at x* = {x}"),
                None => String::new(),
            };
            let _ = writeln!(out, "{:?}{} after {} iterations", r.status, cand, r.iterations_used);
            for (k, v) in &r.residuals {
                let _ = writeln!(out, "    {k:<20} {v:.3e}");
            }
            if let Some(d) = &r.detail {
                let _ = writeln!(out, "    {}", detail_line(d));
            }
        }
    }
}

fn detail_line(d: &coupled_core::solver::FailureDetail) -> String {
    use coupled_core::solver::FailureDetail;
    match d {
        FailureDetail::Preimage { step, side, target, nearest_distance } => format!(
            "step {step}: no T-preimage of {target} in {} (nearest image at distance {})",
            if side == "x" { "A" } else { "B" },
            nearest_distance.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into())
        ),
        FailureDetail::Diagnostic { step, quantity, previous, current } => {
            format!("step {step}: {quantity}_n rose from {previous} to {current}")
        }
    }
}

fn header(lp: &LoadedProblem) -> String {
    let mut out = format!("problem  {} ({})\n", lp.name, kind_label(&lp.problem));
    if let Some(d) = &lp.description {
        let _ = writeln!(out, "         {d}");
    }
    out
}

pub fn cmd_check(source: &str, flags: &Flags) -> Result<Run, InputError> {
    let lp = load_problem(source, flags)?;
    let mut run = check_loaded(&lp)?;
    run.summary.insert_str(0, &header(&lp));
    Ok(run)
}

fn check_loaded(lp: &LoadedProblem) -> Result<Run, InputError> {
    let mut report = RunReport::new(&lp.name);
    run_checks(lp, &mut report)?;
    report.exit_code = check_exit_code(&report.checks);
    let mut summary = String::new();
    render_checks(&mut summary, &report.checks);
    Ok(Run { report, summary, trace: None })
}

fn parse_starts(lp: &LoadedProblem, starts: &[(String, String)]) -> Result<Vec<(Point, Point)>, InputError> {
    if starts.is_empty() {
        if lp.starts.is_empty() {
            return Err(InputError("no start given and the problem declares none; use --start X0 Y0".into()));
        }
        return Ok(lp.starts.clone());
    }
    let space = lp.problem.space();
    starts
        .iter()
        .map(|(x, y)| Ok((document::parse_point(x, space)?, document::parse_point(y, space)?)))
        .collect()
}

pub fn cmd_solve(source: &str, starts: &[(String, String)], flags: &Flags) -> Result<Run, InputError> {
    let lp = load_problem(source, flags)?;
    let mut run = solve_loaded(&lp, starts)?;
    run.summary.insert_str(0, &header(&lp));
    Ok(run)
}

fn solve_loaded(lp: &LoadedProblem, starts: &[(String, String)]) -> Result<Run, InputError> {
    let starts = parse_starts(lp, starts)?;
    let mut report = RunReport::new(&lp.name);
    let opts = &lp.solve_opts;
    let began = Instant::now();
    let runs: Vec<Result<(SolveReport, IterationTrace), Error>> = starts
        .iter()
        .map(|(x0, y0)| match &lp.problem {
            Problem::Coincidence(p) => iterate_coincidence(p, x0, y0, opts),
            Problem::StrongCoupled(p) => iterate_strong_coupled(p, x0, y0, opts),
        })
        .collect();
    if starts.len() > 1 {
        report.multi_start = Some(match &lp.problem {
            Problem::Coincidence(p) => multi_start_coincidence(p, &starts, opts),
            Problem::StrongCoupled(p) => multi_start_unique(p, &starts, opts),
        });
    }
    report.timing_ms.insert("solve".into(), elapsed_ms(began));

    let mut summary = String::new();
    let mut code = EXIT_OK;
    for (start, run) in starts.iter().zip(&runs) {
        code = code.max(match run {
            Ok((r, _)) => status_exit_code(r.status),
            Err(e) => error_exit_code(e),
        });
        let shown = run.as_ref().map(|(r, _)| r.clone()).map_err(|e| e.to_string());
        render_solve(&mut summary, start, &shown);
    }
    if let Some(m) = &report.multi_start {
        match m.consistent {
            Some(true) => {
                let _ = writeln!(summary, "all converged starts agree on {}", format_set(&m.points));
            }
            Some(false) => {
                let _ = writeln!(summary, "converged starts disagree: {}", format_set(&m.points));
            }
            None => {}
        }
    }
    let (solve, trace) = match runs.into_iter().next() {
        Some(Ok((r, t))) => (Some(r), Some(t)),
        _ => (None, None),
    };
    report.solve = solve;
    report.exit_code = code;
    Ok(Run { report, summary, trace })
}

pub fn cmd_demo(name: &str, flags: &Flags) -> Result<Run, InputError> {
    if !BUILTIN_NAMES.contains(&name) {
        return Err(DocumentError::UnknownBuiltin {
            name: name.to_string(),
            available: BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
        }
        .into());
    }
    let lp = load_problem(name, flags)?;
    let checked = check_loaded(&lp)?;
    let solved = solve_loaded(&lp, &[])?;

    let mut report = checked.report;
    report.solve = solved.report.solve;
    report.multi_start = solved.report.multi_start;
    report.timing_ms.extend(solved.report.timing_ms);
    report.exit_code = report.exit_code.max(solved.report.exit_code);

    let mut summary = header(&lp);
    summary.push_str(&checked.summary);
    summary.push('\n');
    summary.push_str(&solved.summary);
    summary.push_str("\ncorrespondence\n");
    for line in correspondence(&lp, &report) {
        let _ = writeln!(summary, "  {line}");
    }
    Ok(Run { report, summary, trace: solved.trace })
}

/// One line per reproduced identity of the demo problem.
fn correspondence(lp: &LoadedProblem, report: &RunReport) -> Vec<String> {
    let mut lines = Vec::new();
    let verdict = |name: &str| report.check(name).map(|c| c.verdict.to_string()).unwrap_or_else(|| "not run".into());
    lines.push(format!("F(x,y) in B and F(y,x) in A on A x B: {}", verdict("coupling")));
    match &lp.problem {
        Problem::Coincidence(p) => {
            lines.push(format!("T(A) ⊆ A, T(B) ⊆ B, images closed: {}", verdict("scc_map")));
            if let Some(c) = report.check("image_intersection") {
                lines.extend(c.notes.iter().cloned());
            }
            lines.push(format!(
                "d(F(x,y),F(u,v)) <= phi(max{{d(Tx,Tu), d(Ty,Tv)}}): {}",
                verdict("phi_T_contraction")
            ));
            if let Some(SolveReport { status: Status::Converged | Status::EarlyCoincidence, candidate: Some(c), .. }) = &report.solve
            {
                let (a, b) = c.points();
                let fab = p.f.eval(a, b).ok();
                let fba = p.f.eval(b, a).ok();
                let (ta, tb) = (p.t.eval(a).ok(), p.t.eval(b).ok());
                if let (Some(fab), Some(fba), Some(ta), Some(tb)) = (fab, fba, ta, tb) {
                    lines.push(format!("coincidence pair (a,b) = ({a}, {b}): F(a,b) = {fab}, T(a) = {ta}, F(b,a) = {fba}, T(b) = {tb}"));
                    lines.push(format!("symmetric point: F(a,b) = {fab}, F(b,a) = {fba}"));
                }
            }
        }
        Problem::StrongCoupled(p) => {
            if let Ok(common) = sample_intersection(&p.a, &p.b, &lp.check_plan) {
                lines.push(format!("A ∩ B = {}", format_set(&common)));
            }
            lines.push(format!("psi(d(F(x,y),F(u,v))) <= psi(M) - phi(M): {}", verdict("phi_psi_contraction")));
            if let Some(SolveReport { status: Status::Converged, candidate: Some(c), .. }) = &report.solve {
                let x = c.points().0;
                if let Ok(fx) = p.f.eval(x, x) {
                    lines.push(format!("strong coupled fixed point x* = {x}: F(x*,x*) = {fx}"));
                }
            }
            if let Some(m) = &report.multi_start {
                if m.consistent == Some(true) {
                    lines.push(format!("every start reaches {}: evidence of uniqueness", format_set(&m.points)));
                }
            }
            if lp.name == "banach-linear" {
                lines.push("closed-form fixed point of the linear family: 0.5".into());
            }
        }
    }
    lines
}

pub fn cmd_list() -> Run {
    let mut summary = String::new();
    for name in BUILTIN_NAMES {
        let desc = document::builtin_registry(name).ok().and_then(|d| d.description).unwrap_or_default();
        let _ = writeln!(summary, "{name:<20} {desc}");
    }
    Run { report: RunReport::new("list"), summary, trace: None }
}
