//! Carrier points, metric spaces, representable subsets and deterministic
//! samplers.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::MetricError;
use crate::report::{named, CheckBuilder, CheckReport, Relation};

/// Tolerance used when two real points are compared for equality.
pub const REAL_EQ_TOL: f64 = 1e-12;

/// Unbounded sides of a real carrier are truncated here when the carrier
/// itself has to be sampled.
pub const CARRIER_SAMPLE_EXTENT: f64 = 10.0;

/// An element of the carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Real(f64),
    Label(String),
}

impl Point {
    pub fn real(v: f64) -> Result<Self, MetricError> {
        if v.is_finite() {
            Ok(Point::Real(v))
        } else {
            Err(MetricError::NonFinite(v))
        }
    }

    pub fn label(s: impl Into<String>) -> Self {
        Point::Label(s.into())
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Point::Real(v) => Some(*v),
            Point::Label(_) => None,
        }
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            Point::Label(s) => Some(s),
            Point::Real(_) => None,
        }
    }

    /// Equality up to [`REAL_EQ_TOL`] for reals, exact for labels.
    pub fn approx_eq(&self, other: &Point) -> bool {
        match (self, other) {
            (Point::Real(a), Point::Real(b)) => (a - b).abs() <= REAL_EQ_TOL,
            (Point::Label(a), Point::Label(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real(v) => write!(f, "{v}"),
            Point::Label(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Point {
    fn from(v: f64) -> Self {
        Point::Real(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_closed { v >= self.lo } else { v > self.lo };
        let below = if self.hi_closed { v <= self.hi } else { v < self.hi };
        above && below
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn is_closed(&self) -> bool {
        self.lo_closed && self.hi_closed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Carrier {
    /// An interval of the real line; either bound may be infinite.
    RealLine(Interval),
    FiniteSet(Vec<String>),
}

#[derive(Clone)]
pub enum Metric {
    /// `|x - y|` on reals.
    Usual,
    /// 0 on the diagonal, 1 elsewhere.
    Discrete,
    /// Symmetric distance table indexed by the carrier's label order.
    Table(Arc<Vec<Vec<f64>>>),
    /// Arbitrary user function; only meaningful for negative controls and
    /// axiom checking.
    Custom(Arc<dyn Fn(&Point, &Point) -> f64 + Send + Sync>),
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Usual => f.write_str("Usual"),
            Metric::Discrete => f.write_str("Discrete"),
            Metric::Table(t) => f.debug_tuple("Table").field(t).finish(),
            Metric::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetricSpace {
    carrier: Carrier,
    metric: Metric,
    index: Arc<HashMap<String, usize>>,
}

impl MetricSpace {
    pub fn real_line(bounds: Interval) -> Self {
        Self::with_metric(Carrier::RealLine(bounds), Metric::Usual).expect("usual metric on reals")
    }

    pub fn unbounded_real_line() -> Self {
        Self::real_line(Interval::open(f64::NEG_INFINITY, f64::INFINITY))
    }

    /// Finite label set with the discrete metric.
    pub fn finite(labels: Vec<String>) -> Result<Self, MetricError> {
        Self::with_metric(Carrier::FiniteSet(labels), Metric::Discrete)
    }

    pub fn finite_with_table(labels: Vec<String>, table: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        if table.len() != labels.len() || table.iter().any(|row| row.len() != labels.len()) {
            return Err(MetricError::InvalidSpace(format!(
                "distance table must be {0}x{0}",
                labels.len()
            )));
        }
        Self::with_metric(Carrier::FiniteSet(labels), Metric::Table(Arc::new(table)))
    }

    pub fn with_metric(carrier: Carrier, metric: Metric) -> Result<Self, MetricError> {
        let mut index = HashMap::new();
        match &carrier {
            Carrier::RealLine(iv) => {
                if iv.lo.is_nan() || iv.hi.is_nan() || iv.is_empty() {
                    return Err(MetricError::InvalidSpace("empty real carrier".into()));
                }
                if matches!(metric, Metric::Table(_)) {
                    return Err(MetricError::InvalidSpace("distance tables need a finite carrier".into()));
                }
            }
            Carrier::FiniteSet(labels) => {
                if labels.is_empty() {
                    return Err(MetricError::InvalidSpace("empty label set".into()));
                }
                for (i, l) in labels.iter().enumerate() {
                    if index.insert(l.clone(), i).is_some() {
                        return Err(MetricError::InvalidSpace(format!("duplicate label {l}")));
                    }
                }
                if matches!(metric, Metric::Usual) {
                    return Err(MetricError::InvalidSpace("the usual metric needs a real carrier".into()));
                }
            }
        }
        Ok(Self { carrier, metric, index: Arc::new(index) })
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn is_real(&self) -> bool {
        matches!(self.carrier, Carrier::RealLine(_))
    }

    pub fn in_carrier(&self, p: &Point) -> Result<bool, MetricError> {
        match (&self.carrier, p) {
            (Carrier::RealLine(iv), Point::Real(v)) => Ok(iv.contains(*v)),
            (Carrier::FiniteSet(_), Point::Label(l)) => Ok(self.index.contains_key(l)),
            (Carrier::RealLine(_), _) => Err(MetricError::KindMismatch { point: p.clone(), expected: "real" }),
            (Carrier::FiniteSet(_), _) => Err(MetricError::KindMismatch { point: p.clone(), expected: "finite" }),
        }
    }

    fn require(&self, p: &Point) -> Result<(), MetricError> {
        if let Point::Real(v) = p {
            if !v.is_finite() {
                return Err(MetricError::NonFinite(*v));
            }
        }
        if self.in_carrier(p)? {
            Ok(())
        } else {
            Err(MetricError::OutsideCarrier(p.clone()))
        }
    }

    /// `d(p, q)` for two carrier points.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64, MetricError> {
        self.require(p)?;
        self.require(q)?;
        Ok(match &self.metric {
            Metric::Usual => match (p, q) {
                (Point::Real(a), Point::Real(b)) => (a - b).abs(),
                _ => unreachable!("kinds checked above"),
            },
            Metric::Discrete => {
                if p.approx_eq(q) {
                    0.0
                } else {
                    1.0
                }
            }
            Metric::Table(t) => {
                let i = self.index[p.as_label().expect("label")];
                let j = self.index[q.as_label().expect("label")];
                t[i][j]
            }
            Metric::Custom(f) => f(p, q),
        })
    }

    /// Points of the carrier per `plan`; unbounded sides are truncated at
    /// [`CARRIER_SAMPLE_EXTENT`].
    pub fn sample_carrier(&self, plan: &SamplePlan) -> Vec<Point> {
        match &self.carrier {
            Carrier::FiniteSet(labels) => labels.iter().cloned().map(Point::Label).collect(),
            Carrier::RealLine(iv) => {
                let mut iv = *iv;
                if iv.lo.is_infinite() {
                    iv.lo = -CARRIER_SAMPLE_EXTENT;
                    iv.lo_closed = true;
                }
                if iv.hi.is_infinite() {
                    iv.hi = CARRIER_SAMPLE_EXTENT;
                    iv.hi_closed = true;
                }
                sample_interval(&iv, plan, 0)
            }
        }
    }
}

/// A representable subset of the carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetSpec {
    Finite(Vec<Point>),
    Intervals(Vec<Interval>),
}

impl SubsetSpec {
    pub fn finite(points: Vec<Point>) -> Result<Self, MetricError> {
        if points.is_empty() {
            return Err(MetricError::InvalidSubset("empty finite set".into()));
        }
        if let Some(Point::Real(v)) = points.iter().find(|p| matches!(p, Point::Real(v) if !v.is_finite())) {
            return Err(MetricError::NonFinite(*v));
        }
        Ok(SubsetSpec::Finite(points))
    }

    pub fn reals(values: &[f64]) -> Result<Self, MetricError> {
        Self::finite(values.iter().map(|&v| Point::Real(v)).collect())
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self, MetricError> {
        Self::intervals(vec![Interval::closed(lo, hi)])
    }

    pub fn intervals(mut intervals: Vec<Interval>) -> Result<Self, MetricError> {
        if intervals.is_empty() {
            return Err(MetricError::InvalidSubset("empty interval union".into()));
        }
        for iv in &intervals {
            if !iv.lo.is_finite() || !iv.hi.is_finite() {
                return Err(MetricError::InvalidSubset("interval bounds must be finite".into()));
            }
            if iv.is_empty() {
                return Err(MetricError::InvalidSubset(format!("empty interval [{}, {}]", iv.lo, iv.hi)));
            }
        }
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in intervals.windows(2) {
            let touching = w[0].hi == w[1].lo && w[0].hi_closed && w[1].lo_closed;
            if w[0].hi > w[1].lo || touching {
                return Err(MetricError::InvalidSubset("intervals overlap".into()));
            }
        }
        Ok(SubsetSpec::Intervals(intervals))
    }

    /// Checks that every member lies in the carrier of `space`.
    pub fn validate_in(&self, space: &MetricSpace) -> Result<(), MetricError> {
        match self {
            SubsetSpec::Finite(points) => {
                for p in points {
                    if !space.in_carrier(p)? {
                        return Err(MetricError::OutsideCarrier(p.clone()));
                    }
                }
                Ok(())
            }
            SubsetSpec::Intervals(ivs) => {
                let Carrier::RealLine(c) = space.carrier() else {
                    return Err(MetricError::InvalidSubset("intervals need a real carrier".into()));
                };
                for iv in ivs {
                    let lo_ok = iv.lo > c.lo || (iv.lo == c.lo && (c.lo_closed || !iv.lo_closed));
                    let hi_ok = iv.hi < c.hi || (iv.hi == c.hi && (c.hi_closed || !iv.hi_closed));
                    if !lo_ok || !hi_ok {
                        return Err(MetricError::InvalidSubset(format!(
                            "interval [{}, {}] is not inside the carrier",
                            iv.lo, iv.hi
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn contains(&self, p: &Point) -> Result<bool, MetricError> {
        match self {
            SubsetSpec::Finite(points) => {
                if let Some(first) = points.first() {
                    if std::mem::discriminant(first) != std::mem::discriminant(p) {
                        return Err(MetricError::KindMismatch {
                            point: p.clone(),
                            expected: if first.as_real().is_some() { "real" } else { "finite" },
                        });
                    }
                }
                Ok(points.iter().any(|q| q.approx_eq(p)))
            }
            SubsetSpec::Intervals(ivs) => match p {
                Point::Real(v) => Ok(ivs.iter().any(|iv| iv.contains(*v))),
                Point::Label(_) => Err(MetricError::KindMismatch { point: p.clone(), expected: "real" }),
            },
        }
    }

    /// True when the subset is closed in the real line (finite sets always are).
    pub fn is_closed(&self) -> bool {
        match self {
            SubsetSpec::Finite(_) => true,
            SubsetSpec::Intervals(ivs) => ivs.iter().all(Interval::is_closed),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, SubsetSpec::Finite(_))
    }
}

/// Deterministic sampling recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplePlan {
    /// Grid points per interval.
    pub grid_count: usize,
    /// Seeded pseudorandom interior points added per interval.
    pub jitter_count: usize,
    pub seed: u64,
    /// When set, intervals get at least enough grid points for this spacing.
    pub step: Option<f64>,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self { grid_count: 21, jitter_count: 0, seed: 0, step: None }
    }
}

impl SamplePlan {
    pub fn grid(grid_count: usize) -> Self {
        Self { grid_count, ..Self::default() }
    }

    pub fn with_step(step: f64) -> Self {
        Self { step: Some(step), ..Self::default() }
    }

    fn count_for(&self, len: f64) -> usize {
        let mut n = self.grid_count.max(2);
        if let Some(step) = self.step.filter(|s| *s > 0.0) {
            let needed = (len / step - 1e-9).ceil().max(1.0) as usize + 1;
            n = n.max(needed);
        }
        n
    }
}

fn sample_interval(iv: &Interval, plan: &SamplePlan, stream: u64) -> Vec<Point> {
    if iv.lo == iv.hi {
        return vec![Point::Real(iv.lo)];
    }
    let n = plan.count_for(iv.hi - iv.lo);
    let width = iv.hi - iv.lo;
    let half_step = width / ((n - 1) as f64) / 2.0;
    let mut out = Vec::with_capacity(n + plan.jitter_count);
    for i in 0..n {
        let v = if i == 0 {
            if iv.lo_closed { iv.lo } else { iv.lo + half_step }
        } else if i == n - 1 {
            if iv.hi_closed { iv.hi } else { iv.hi - half_step }
        } else {
            iv.lo + width * (i as f64) / ((n - 1) as f64)
        };
        out.push(Point::Real(v));
    }
    // two grid points on a doubly open interval both land on the midpoint
    out.dedup();
    if plan.jitter_count > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        for _ in 0..plan.jitter_count {
            let u: f64 = rng.gen_range(0.0..1.0);
            let v = iv.lo + width * u;
            if iv.contains(v) {
                out.push(Point::Real(v));
            } else {
                out.push(Point::Real(iv.lo + width / 2.0));
            }
        }
    }
    out
}

/// Finite sets come back in declared order; intervals as an even grid (open
/// endpoints pulled inward by half a step) followed by seeded jitter.
pub fn sample_points(subset: &SubsetSpec, plan: &SamplePlan) -> Vec<Point> {
    match subset {
        SubsetSpec::Finite(points) => points.clone(),
        SubsetSpec::Intervals(ivs) => ivs
            .iter()
            .enumerate()
            .flat_map(|(k, iv)| sample_interval(iv, plan, k as u64))
            .collect(),
    }
}

/// Samples of `a` that also belong to `b`, followed by samples of `b` that
/// belong to `a` and were not already listed.
pub fn sample_intersection(a: &SubsetSpec, b: &SubsetSpec, plan: &SamplePlan) -> Result<Vec<Point>, MetricError> {
    let mut out: Vec<Point> = Vec::new();
    for p in sample_points(a, plan) {
        if b.contains(&p)? && !out.iter().any(|q| q.approx_eq(&p)) {
            out.push(p);
        }
    }
    for p in sample_points(b, plan) {
        if a.contains(&p)? && !out.iter().any(|q| q.approx_eq(&p)) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Nonnegativity, identity of indiscernibles, symmetry and the triangle
/// inequality over all sampled pairs and triples of the carrier.
pub fn check_metric_axioms(space: &MetricSpace, plan: &SamplePlan, tol: f64) -> Result<CheckReport, MetricError> {
    let pts = space.sample_carrier(plan);
    let n = pts.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = space.distance(&pts[i], &pts[j])?;
        }
    }
    let mut b = CheckBuilder::new("metric_axioms", tol);
    for i in 0..n {
        let p = &pts[i];
        b.observe("identity", Relation::AtMost, d[i * n + i].abs(), 0.0, || named(&[("p", p)]));
        for j in 0..n {
            let q = &pts[j];
            let dpq = d[i * n + j];
            b.observe("nonnegativity", Relation::AtMost, -dpq, 0.0, || named(&[("p", p), ("q", q)]));
            if i < j {
                b.observe("symmetry", Relation::AtMost, (dpq - d[j * n + i]).abs(), 0.0, || {
                    named(&[("p", p), ("q", q)])
                });
                if !p.approx_eq(q) {
                    // distinct points must be at positive distance
                    b.observe("indiscernibles", Relation::Below, 0.0, dpq, || named(&[("p", p), ("q", q)]));
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let dpq = d[i * n + j];
            for k in 0..n {
                let via = d[i * n + k] + d[k * n + j];
                b.observe("triangle", Relation::AtMost, dpq, via, || {
                    named(&[("p", &pts[i]), ("r", &pts[k]), ("q", &pts[j])])
                });
            }
        }
    }
    Ok(b.finish())
}
