use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::metric::Point;
use crate::report::CheckReport;
use crate::solver::{IterationTrace, MultiStartReport, SolveReport};

/// The machine-readable result of one CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub problem_name: String,
    pub checks: Vec<CheckReport>,
    pub solve: Option<SolveReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi_start: Option<MultiStartReport>,
    pub timing_ms: BTreeMap<String, f64>,
    pub exit_code: i32,
}

impl RunReport {
    pub fn new(problem_name: impl Into<String>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            problem_name: problem_name.into(),
            checks: Vec::new(),
            solve: None,
            multi_start: None,
            timing_ms: BTreeMap::new(),
            exit_code: 0,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.property_name == name)
    }
}

pub const TRACE_HEADER: &str = "n,x_n,y_n,Tx_n,Ty_n,D_n,R_n,residual";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn point(p: &Point) -> String {
    match p {
        Point::Real(v) => real(*v),
        Point::Label(s) => s.clone(),
    }
}

/// CSV with [`TRACE_HEADER`]; reals carry 17 significant digits and the `T`
/// columns stay empty for strong runs.
pub fn render_trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for row in &trace.rows {
        let opt = |p: &Option<Point>| p.as_ref().map(point).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.n,
            point(&row.x),
            point(&row.y),
            opt(&row.tx),
            opt(&row.ty),
            real(row.d),
            real(row.r),
            real(row.residual)
        );
    }
    out
}
