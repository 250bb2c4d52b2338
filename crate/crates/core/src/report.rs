//! Witness-bearing check reports shared by every sampled verifier.
//!
//! A check compares a left-hand side against a right-hand side at each
//! sample. For a non-strict relation (`lhs <= rhs`) a sample violates when
//! `lhs > rhs + tol`; for a strict relation (`lhs < rhs`) it violates when
//! `rhs - lhs <= tol`. The margin `rhs - lhs` is tracked over all samples.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metric::Point;

/// Number of violations kept verbatim; the total is always counted.
pub const MAX_RECORDED_VIOLATIONS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// No violation found, but part of the property could not be decided
    /// from samples.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs <= rhs`
    AtMost,
    /// `lhs < rhs`
    Below,
}

impl Relation {
    pub fn violated(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::AtMost => lhs > rhs + tol,
            Relation::Below => rhs - lhs <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Which clause of the property failed ("symmetry", "invariance", ...).
    pub clause: String,
    pub witness: Vec<(String, Point)>,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`; positive for every non-strict violation.
    pub residual: f64,
}

impl Violation {
    pub fn witness_value(&self, name: &str) -> Option<&Point> {
        self.witness.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub property_name: String,
    pub samples_tested: u64,
    /// The first violations in sample order, capped at
    /// [`MAX_RECORDED_VIOLATIONS`].
    pub violations: Vec<Violation>,
    pub violation_count: u64,
    /// Largest residual seen; first in sample order on ties.
    pub worst: Option<Violation>,
    /// Smallest `rhs - lhs` over all samples; `None` when nothing was sampled.
    pub max_margin: Option<f64>,
    pub verdict: Verdict,
    /// Advisory checks are reported but do not count as theorem hypotheses.
    #[serde(default)]
    pub advisory: bool,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// Accumulates samples into a [`CheckReport`].
#[derive(Debug)]
pub struct CheckBuilder {
    name: String,
    tol: f64,
    samples: u64,
    violations: Vec<Violation>,
    count: u64,
    worst: Option<Violation>,
    min_margin: Option<f64>,
    inconclusive: bool,
    advisory: bool,
    notes: Vec<String>,
}

impl CheckBuilder {
    pub fn new(name: impl Into<String>, tol: f64) -> Self {
        Self {
            name: name.into(),
            tol,
            samples: 0,
            violations: Vec::new(),
            count: 0,
            worst: None,
            min_margin: None,
            inconclusive: false,
            advisory: false,
            notes: Vec::new(),
        }
    }

    pub fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Records one sample. The witness closure is only called on violation.
    pub fn observe<W>(&mut self, clause: &str, relation: Relation, lhs: f64, rhs: f64, witness: W) -> bool
    where
        W: FnOnce() -> Vec<(String, Point)>,
    {
        self.samples += 1;
        let margin = rhs - lhs;
        self.min_margin = Some(match self.min_margin {
            Some(m) if m <= margin => m,
            _ => margin,
        });
        if !relation.violated(lhs, rhs, self.tol) {
            return false;
        }
        let v = Violation {
            clause: clause.to_string(),
            witness: witness(),
            lhs,
            rhs,
            residual: lhs - rhs,
        };
        self.count += 1;
        if self.worst.as_ref().is_none_or(|w| v.residual > w.residual) {
            self.worst = Some(v.clone());
        }
        if self.violations.len() < MAX_RECORDED_VIOLATIONS {
            self.violations.push(v);
        }
        true
    }

    /// Counts a sample that carries no numeric comparison.
    pub fn count_sample(&mut self) {
        self.samples += 1;
    }

    pub fn mark_inconclusive(&mut self, note: impl Into<String>) {
        self.inconclusive = true;
        self.notes.push(note.into());
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn finish(self) -> CheckReport {
        let verdict = if self.count > 0 {
            Verdict::Fail
        } else if self.inconclusive {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        CheckReport {
            property_name: self.name,
            samples_tested: self.samples,
            violations: self.violations,
            violation_count: self.count,
            worst: self.worst,
            max_margin: self.min_margin,
            verdict,
            advisory: self.advisory,
            notes: self.notes,
        }
    }
}

pub(crate) fn named(pairs: &[(&str, &Point)]) -> Vec<(String, Point)> {
    pairs.iter().map(|(n, p)| (n.to_string(), (*p).clone())).collect()
}
