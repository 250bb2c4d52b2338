//! Verification and constructive solution of coupled fixed-point problems.
//!
//! Two problem shapes are supported on `A x B` inside a metric space `X`:
//!
//! * [`CoincidenceProblem`]: a coupling `F` with a self map `T` satisfying
//!   `d(F(x,y), F(u,v)) <= phi(max{d(Tx,Tu), d(Ty,Tv)})`. The solver looks
//!   for a coupled coincidence point `F(a,b) = T(a)`, `F(b,a) = T(b)`.
//! * [`StrongCoupledProblem`]: a coupling satisfying
//!   `psi(d(F(x,y), F(u,v))) <= psi(M) - phi(M)` with
//!   `M = max{d(x,u), d(y,v)}`. The solver looks for `x*` in `A ∩ B` with
//!   `F(x*, x*) = x*`.
//!
//! [`checks`] samples the hypotheses, [`solver`] runs the iterations, and
//! [`document`] loads problems from TOML.

pub mod checks;
pub mod control;
pub mod document;
pub mod error;
pub mod expr;
pub mod maps;
pub mod metric;
pub mod output;
pub mod problem;
pub mod report;
pub mod solver;

pub use checks::{
    check_control, check_coupling, check_image_intersection, check_phi_psi_contraction, check_phi_t_contraction, check_range_compatibility,
    check_scc_map, check_subset_intersection, default_t_max, sampled_image,
};
pub use control::{check_altering, check_phi_class, eval_control, make_capped_linear, ControlClass, ControlFunction};
pub use document::{builtin_registry, load_builtin, parse_problem, DocumentError, LoadedProblem, ProblemDocument};
pub use error::{ControlError, Error, MapError, MetricError, Result};
pub use expr::{compile, parse_expression, Bindings, Expr, ExprError, Var};
pub use maps::{CouplingMap, SelfMap};
pub use metric::{
    check_metric_axioms, sample_intersection, sample_points, Interval, MetricSpace, Point, SamplePlan, SubsetSpec,
};
pub use output::{render_trace_csv, RunReport};
pub use problem::{CoincidenceProblem, Problem, StrongCoupledProblem};
pub use report::{CheckReport, Verdict, Violation};
pub use solver::{
    brute_force_search, iterate_coincidence, iterate_strong_coupled, multi_start_coincidence, multi_start_unique, trace_diagnostics,
    Candidate, IterationTrace, SolveOptions, SolveReport, Status,
};
