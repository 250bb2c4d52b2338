//! Scalar control functions on `[0, inf)`: the comparison class and
//! altering distance functions, with sampled property checkers.
//!
//! The right-limit condition of the comparison class and the continuity of
//! an altering distance function both constrain limits, so they are probed
//! along a fixed ladder of offsets ([`LADDER`]). A pass is evidence, not a
//! proof.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ControlError;
use crate::expr::{Bindings, Expr, Var};
use crate::metric::{sample_points, Point, SamplePlan, SubsetSpec};
use crate::report::{CheckBuilder, CheckReport, Relation};

/// Offsets used to approximate one-sided limits.
pub const LADDER: [f64; 3] = [1e-3, 1e-6, 1e-9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlClass {
    Phi,
    AlteringDistance,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlFamily {
    Linear { slope: f64 },
    Power { exponent: f64 },
    CappedLinear { slope: f64, threshold: f64 },
    Identity,
    Expr(Arc<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlFunction {
    pub family: ControlFamily,
    pub class: ControlClass,
}

impl ControlFunction {
    pub fn linear(slope: f64) -> Result<Self, ControlError> {
        if !(slope.is_finite() && slope >= 0.0) {
            return Err(ControlError::InvalidParameter(format!("linear slope must be >= 0, got {slope}")));
        }
        Ok(Self::unclassified(ControlFamily::Linear { slope }))
    }

    pub fn power(exponent: f64) -> Result<Self, ControlError> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(ControlError::InvalidParameter(format!("power exponent must be > 0, got {exponent}")));
        }
        Ok(Self::unclassified(ControlFamily::Power { exponent }))
    }

    pub fn identity() -> Self {
        Self::unclassified(ControlFamily::Identity)
    }

    /// `slope * t` up to `threshold`, the constant `threshold` beyond it.
    pub fn capped_linear(slope: f64, threshold: f64) -> Result<Self, ControlError> {
        if !(slope > 0.0 && slope < 1.0) {
            return Err(ControlError::InvalidParameter(format!("capped slope must lie in (0, 1), got {slope}")));
        }
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(ControlError::InvalidParameter(format!("cap threshold must be > 0, got {threshold}")));
        }
        Ok(Self { family: ControlFamily::CappedLinear { slope, threshold }, class: ControlClass::Phi })
    }

    pub fn expr(expr: Expr) -> Result<Self, ControlError> {
        expr.require_vars(&[Var::T])
            .map_err(|e| ControlError::InvalidParameter(e.to_string()))?;
        Ok(Self::unclassified(ControlFamily::Expr(Arc::new(expr))))
    }

    fn unclassified(family: ControlFamily) -> Self {
        Self { family, class: ControlClass::Unclassified }
    }

    pub fn with_class(mut self, class: ControlClass) -> Self {
        self.class = class;
        self
    }

    pub fn eval(&self, t: f64) -> Result<f64, ControlError> {
        if t.is_nan() || t < 0.0 {
            return Err(ControlError::NegativeInput(t));
        }
        let v = match &self.family {
            ControlFamily::Linear { slope } => slope * t,
            ControlFamily::Power { exponent } => t.powf(*exponent),
            ControlFamily::CappedLinear { slope, threshold } => {
                if t <= *threshold {
                    slope * t
                } else {
                    *threshold
                }
            }
            ControlFamily::Identity => t,
            ControlFamily::Expr(e) => e.eval(&Bindings::t(t))?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ControlError::NonFinite(t))
        }
    }
}

impl fmt::Display for ControlFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            ControlFamily::Linear { slope } => write!(f, "{slope} * t"),
            ControlFamily::Power { exponent } => write!(f, "t^{exponent}"),
            ControlFamily::CappedLinear { slope, threshold } => write!(f, "capped_linear({slope}, {threshold})"),
            ControlFamily::Identity => f.write_str("t"),
            ControlFamily::Expr(e) => write!(f, "{e}"),
        }
    }
}

pub fn eval_control(f: &ControlFunction, t: f64) -> Result<f64, ControlError> {
    f.eval(t)
}

pub fn make_capped_linear(slope: f64, threshold: f64) -> Result<ControlFunction, ControlError> {
    ControlFunction::capped_linear(slope, threshold)
}

fn grid(t_max: f64, plan: &SamplePlan) -> Result<Vec<f64>, ControlError> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(ControlError::InvalidParameter(format!("t_max must be > 0, got {t_max}")));
    }
    let subset = SubsetSpec::interval(0.0, t_max).expect("valid interval");
    let mut ts: Vec<f64> = sample_points(&subset, plan).iter().filter_map(Point::as_real).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    Ok(ts)
}

fn at(t: f64) -> Vec<(String, Point)> {
    vec![("t".to_string(), Point::Real(t))]
}

fn check_non_decreasing(b: &mut CheckBuilder, ts: &[f64], vals: &[f64]) {
    let mut best: Option<(f64, f64)> = None;
    for (&t, &v) in ts.iter().zip(vals) {
        if let Some((bt, bv)) = best {
            b.observe("non_decreasing", Relation::AtMost, bv, v, || {
                vec![("s".to_string(), Point::Real(bt)), ("t".to_string(), Point::Real(t))]
            });
        }
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((t, v));
        }
    }
}

/// Samples the three defining properties of the comparison class on
/// `[0, t_max]`: non-decreasing, `f(t) < t` for `t > 0`, and right limits
/// below `t`, read off at the finest ladder rung.
pub fn check_phi_class(f: &ControlFunction, t_max: f64, plan: &SamplePlan, tol: f64) -> Result<CheckReport, ControlError> {
    let ts = grid(t_max, plan)?;
    let vals = ts.iter().map(|&t| f.eval(t)).collect::<Result<Vec<_>, _>>()?;
    let mut b = CheckBuilder::new("phi_class", tol);
    check_non_decreasing(&mut b, &ts, &vals);
    for (&t, &v) in ts.iter().zip(&vals) {
        if t <= 0.0 {
            continue;
        }
        b.observe("below_identity", Relation::Below, v, t, || at(t));
        // A non-decreasing f approaches its right limit from above, so the
        // finest rung is the tightest available bound on it.
        let eps = LADDER[LADDER.len() - 1];
        let r = f.eval(t + eps)?;
        b.observe("right_limit", Relation::Below, r, t, || {
            vec![("t".to_string(), Point::Real(t)), ("eps".to_string(), Point::Real(eps))]
        });
    }
    b.note(format!("sampled {} points on [0, {t_max}]; right limits read at t + {:e}", ts.len(), LADDER[LADDER.len() - 1]));
    Ok(b.finish())
}

/// Samples the altering-distance properties on `[0, t_max]`: `f(0) = 0`,
/// `f(t) > 0` for `t > 0`, non-decreasing, and continuity.
///
/// Continuity at `t` is judged on both one-sided differences: the
/// difference at the finest ladder rung must shrink to at most half the
/// difference at the previous rung. Jumps keep a constant difference and
/// fail; locally Lipschitz and power functions with exponent >= 0.1 pass.
pub fn check_altering(f: &ControlFunction, t_max: f64, plan: &SamplePlan, tol: f64) -> Result<CheckReport, ControlError> {
    let ts = grid(t_max, plan)?;
    let vals = ts.iter().map(|&t| f.eval(t)).collect::<Result<Vec<_>, _>>()?;
    let mut b = CheckBuilder::new("altering_distance", tol);
    let f0 = f.eval(0.0)?;
    b.observe("zero_at_zero", Relation::AtMost, f0.abs(), 0.0, || at(0.0));
    check_non_decreasing(&mut b, &ts, &vals);
    let [_, mid, fine] = LADDER;
    for (&t, &v) in ts.iter().zip(&vals) {
        if t > 0.0 {
            b.observe("positive", Relation::Below, 0.0, v, || at(t));
        }
        let right_mid = (f.eval(t + mid)? - v).abs();
        let right_fine = (f.eval(t + fine)? - v).abs();
        b.observe("right_continuity", Relation::AtMost, right_fine, 0.5 * right_mid, || at(t));
        if t >= mid {
            let left_mid = (v - f.eval(t - mid)?).abs();
            let left_fine = (v - f.eval(t - fine)?).abs();
            b.observe("left_continuity", Relation::AtMost, left_fine, 0.5 * left_mid, || at(t));
        }
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::report::Verdict;

    fn capped_phi() -> ControlFunction {
        make_capped_linear(2.0 / 3.0, 47.0 / 24.0).unwrap()
    }

    #[test]
    fn capped_linear_values() {
        let f = capped_phi();
        assert_eq!(f.eval(2.0).unwrap(), 47.0 / 24.0);
        assert_eq!(f.eval(1.0).unwrap(), 2.0 / 3.0);
        assert_eq!(f.eval(3.0).unwrap(), 47.0 / 24.0);
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        let g = make_capped_linear(0.5, 1.0).unwrap();
        assert_eq!(g.eval(1.0).unwrap(), 0.5);
    }

    #[test]
    fn capped_linear_parameter_errors() {
        assert!(make_capped_linear(1.0, 1.0).is_err());
        assert!(make_capped_linear(0.0, 1.0).is_err());
        assert!(make_capped_linear(0.5, 0.0).is_err());
    }

    #[test]
    fn power_and_identity_values() {
        assert_eq!(ControlFunction::power(2.0).unwrap().eval(1.0).unwrap(), 1.0);
        assert_eq!(ControlFunction::identity().eval(1.0).unwrap(), 1.0);
        assert!(ControlFunction::identity().eval(-1.0).is_err());
    }

    #[test]
    fn phi_check_examples() {
        let plan = SamplePlan::with_step(0.1);
        assert_eq!(check_phi_class(&capped_phi(), 8.0, &plan, 1e-12).unwrap().verdict, Verdict::Pass);

        let id = check_phi_class(&ControlFunction::identity(), 8.0, &plan, 1e-12).unwrap();
        assert_eq!(id.verdict, Verdict::Fail);
        assert!(id.violations.iter().any(|v| v.clause == "below_identity"));

        let twice = check_phi_class(&ControlFunction::linear(2.0).unwrap(), 2.0, &SamplePlan::grid(3), 1e-12).unwrap();
        let w = twice.violations.iter().find(|v| v.clause == "below_identity").unwrap();
        assert_eq!(w.witness_value("t").unwrap().as_real(), Some(1.0));
        assert_eq!((w.lhs, w.rhs), (2.0, 1.0));
    }

    // The cap makes the right limit at the threshold equal to the threshold,
    // so a grid point that lands exactly there is flagged.
    #[test]
    fn capped_linear_right_limit_at_threshold_is_flagged() {
        let f = make_capped_linear(0.5, 1.0).unwrap();
        let r = check_phi_class(&f, 2.0, &SamplePlan::grid(3), 1e-12).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.violations.iter().all(|v| v.clause == "right_limit"));
        assert_eq!(r.violations[0].witness_value("t").unwrap().as_real(), Some(1.0));
    }

    #[test]
    fn phi_at_zero_is_zero() {
        for f in [capped_phi(), ControlFunction::linear(0.3).unwrap()] {
            assert_eq!(f.eval(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn altering_examples() {
        let plan = SamplePlan::grid(41);
        assert!(check_altering(&ControlFunction::identity(), 4.0, &plan, 1e-12).unwrap().passed());
        assert!(check_altering(&ControlFunction::power(2.0).unwrap(), 4.0, &plan, 1e-12).unwrap().passed());

        let step = ControlFunction::expr(parse_expression("piecewise { t < 1 => 0; else => 1 }").unwrap()).unwrap();
        let r = check_altering(&step, 2.0, &plan, 1e-12).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let jump = r.violations.iter().find(|v| v.clause.ends_with("continuity")).unwrap();
        assert_eq!(jump.witness_value("t").unwrap().as_real(), Some(1.0));
        assert!(r
            .violations
            .iter()
            .any(|v| v.clause == "positive" && v.witness_value("t").unwrap().as_real() == Some(0.5)));
    }

    #[test]
    fn expr_control_rejects_other_variables() {
        assert!(ControlFunction::expr(parse_expression("x + t").unwrap()).is_err());
    }
}
