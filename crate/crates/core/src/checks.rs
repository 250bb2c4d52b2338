//! Sampling-based verifiers for the structural hypotheses of the two
//! existence theorems.
//!
//! Quadruple checks range over `x, v` in `A` and `y, u` in `B`. When the
//! sampled product exceeds the budget, every axis is thinned to an evenly
//! spaced subsample (end points kept) so the result stays deterministic.

use crate::control::ControlFunction;
use crate::error::Result;
use crate::maps::{CouplingMap, PreimageIndex, SelfMap};
use crate::metric::{sample_intersection, sample_points, MetricSpace, Point, SamplePlan, SubsetSpec, REAL_EQ_TOL};
use crate::problem::{CoincidenceProblem, StrongCoupledProblem};
use crate::report::{named, CheckBuilder, CheckReport, Relation};

pub const DEFAULT_QUADRUPLE_BUDGET: u64 = 1_000_000;

/// `F(x, y)` in `B` and `F(y, x)` in `A` for every sampled `x` in `A`, `y` in `B`.
pub fn check_coupling(f: &CouplingMap, a: &SubsetSpec, b: &SubsetSpec, plan: &SamplePlan) -> Result<CheckReport> {
    let sa = sample_points(a, plan);
    let sb = sample_points(b, plan);
    let mut rep = CheckBuilder::new("coupling", 0.0);
    for x in &sa {
        for y in &sb {
            let fxy = f.eval(x, y)?;
            let in_b = if b.contains(&fxy)? { 0.0 } else { 1.0 };
            rep.observe("image_in_B", Relation::AtMost, in_b, 0.0, || {
                named(&[("x", x), ("y", y), ("F(x,y)", &fxy)])
            });
            let fyx = f.eval(y, x)?;
            let in_a = if a.contains(&fyx)? { 0.0 } else { 1.0 };
            rep.observe("image_in_A", Relation::AtMost, in_a, 0.0, || {
                named(&[("x", x), ("y", y), ("F(y,x)", &fyx)])
            });
        }
    }
    Ok(rep.finish())
}

/// Distinct sampled images `T(p)` for `p` in `subset`; reals come back sorted.
pub fn sampled_image(t: &SelfMap, subset: &SubsetSpec, plan: &SamplePlan) -> Result<Vec<Point>> {
    let mut out: Vec<Point> = Vec::new();
    for p in sample_points(subset, plan) {
        let img = t.eval(&p)?;
        if !out.iter().any(|q| q.approx_eq(&img)) {
            out.push(img);
        }
    }
    if out.iter().all(|p| p.as_real().is_some()) {
        out.sort_by(|a, b| a.as_real().unwrap().total_cmp(&b.as_real().unwrap()));
    }
    Ok(out)
}

/// Is the sampled extremum attained at a sample that is not an inward
/// replacement for an open endpoint?
fn extremes_attained(points: &[Point], images: &[Point], subset: &SubsetSpec) -> bool {
    let SubsetSpec::Intervals(ivs) = subset else { return true };
    let vals: Vec<f64> = match images.iter().map(Point::as_real).collect::<Option<Vec<_>>>() {
        Some(v) => v,
        None => return true,
    };
    // The smallest (largest) sample of an interval with an open lower (upper)
    // end stands in for the missing endpoint.
    let reals: Vec<f64> = points.iter().filter_map(Point::as_real).collect();
    let shifted = |p: &Point| {
        let v = p.as_real().unwrap_or(f64::NAN);
        ivs.iter().filter(|iv| iv.contains(v)).any(|iv| {
            let inside = reals.iter().copied().filter(|w| iv.contains(*w));
            let (min, max) = inside.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), w| (a.min(w), b.max(w)));
            (!iv.lo_closed && v == min) || (!iv.hi_closed && v == max)
        })
    };
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let attained = |target: f64| {
        vals.iter()
            .zip(points)
            .any(|(v, p)| (v - target).abs() <= REAL_EQ_TOL && !shifted(p))
    };
    attained(lo) && attained(hi)
}

/// `T(A) ⊆ A`, `T(B) ⊆ B`, and closedness of both images.
///
/// Closedness is exact for finite subsets. For interval subsets it is
/// inferred from the sampled image attaining its infimum and supremum at a
/// genuine member; otherwise the verdict is inconclusive.
pub fn check_scc_map(t: &SelfMap, a: &SubsetSpec, b: &SubsetSpec, plan: &SamplePlan) -> Result<CheckReport> {
    let mut rep = CheckBuilder::new("scc_map", 0.0);
    for (label, subset) in [("A", a), ("B", b)] {
        let points = sample_points(subset, plan);
        let images = points.iter().map(|p| t.eval(p)).collect::<std::result::Result<Vec<_>, _>>()?;
        for (p, img) in points.iter().zip(&images) {
            let outside = if subset.contains(img)? { 0.0 } else { 1.0 };
            rep.observe(&format!("T({label})_in_{label}"), Relation::AtMost, outside, 0.0, || {
                named(&[("p", p), ("T(p)", img)])
            });
        }
        if subset.is_finite() {
            rep.note(format!("T({label}) is finite, hence closed"));
        } else if extremes_attained(&points, &images, subset) {
            rep.note(format!("T({label}) attains its sampled extrema; treated as closed"));
        } else {
            rep.mark_inconclusive(format!("closedness of T({label}) could not be decided from samples"));
        }
    }
    Ok(rep.finish())
}

/// `{a, b, ...}` for short lists, a count and range otherwise.
pub fn format_set(points: &[Point]) -> String {
    if points.len() <= 12 {
        let items: Vec<String> = points.iter().map(Point::to_string).collect();
        return format!("{{{}}}", items.join(", "));
    }
    let reals: Vec<f64> = points.iter().filter_map(Point::as_real).collect();
    if reals.len() == points.len() {
        let lo = reals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = reals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        format!("{} sampled values in [{lo}, {hi}]", points.len())
    } else {
        format!("{} sampled labels", points.len())
    }
}

fn intersect(a: &[Point], b: &[Point]) -> Vec<Point> {
    a.iter().filter(|p| b.iter().any(|q| q.approx_eq(p))).cloned().collect()
}

/// `T(A) ∩ T(B)` is nonempty on the samples.
pub fn check_image_intersection(t: &SelfMap, a: &SubsetSpec, b: &SubsetSpec, plan: &SamplePlan) -> Result<CheckReport> {
    let ia = sampled_image(t, a, plan)?;
    let ib = sampled_image(t, b, plan)?;
    let common = intersect(&ia, &ib);
    let mut rep = CheckBuilder::new("image_intersection", 0.0);
    let empty = if common.is_empty() { 1.0 } else { 0.0 };
    rep.observe("nonempty", Relation::AtMost, empty, 0.0, Vec::new);
    rep.note(format!("T(A) = {}", format_set(&ia)));
    rep.note(format!("T(B) = {}", format_set(&ib)));
    rep.note(format!("T(A) ∩ T(B) = {}", format_set(&common)));
    Ok(rep.finish())
}

/// `A ∩ B` is nonempty on the samples.
pub fn check_subset_intersection(a: &SubsetSpec, b: &SubsetSpec, plan: &SamplePlan) -> Result<CheckReport> {
    let common = sample_intersection(a, b, plan)?;
    let mut rep = CheckBuilder::new("subset_intersection", 0.0);
    let empty = if common.is_empty() { 1.0 } else { 0.0 };
    rep.observe("nonempty", Relation::AtMost, empty, 0.0, Vec::new);
    rep.note(format!("A ∩ B = {}", format_set(&common)));
    Ok(rep.finish())
}

fn thin(points: Vec<Point>, keep: usize) -> Vec<Point> {
    let n = points.len();
    if keep >= n || n <= 1 {
        return points;
    }
    if keep <= 1 {
        return points.into_iter().take(1).collect();
    }
    (0..keep)
        .map(|i| points[(i * (n - 1) + (keep - 1) / 2) / (keep - 1)].clone())
        .collect()
}

/// Sampled `A` and `B`, thinned so that `|A|^2 |B|^2 <= budget`.
fn quadruple_axes(a: &SubsetSpec, b: &SubsetSpec, plan: &SamplePlan, budget: u64, rep: &mut CheckBuilder) -> (Vec<Point>, Vec<Point>) {
    let sa = sample_points(a, plan);
    let sb = sample_points(b, plan);
    let total = (sa.len() as u64).pow(2) * (sb.len() as u64).pow(2);
    if total <= budget {
        return (sa, sb);
    }
    let scale = (budget as f64 / total as f64).powf(0.25);
    let mut ka = ((sa.len() as f64 * scale).floor() as usize).max(1);
    let mut kb = ((sb.len() as f64 * scale).floor() as usize).max(1);
    while (ka as u64).pow(2) * (kb as u64).pow(2) > budget {
        if ka >= kb && ka > 1 {
            ka -= 1;
        } else if kb > 1 {
            kb -= 1;
        } else {
            break;
        }
    }
    rep.note(format!(
        "{total} quadruples exceed the budget of {budget}; stratified subsample of {ka} x {kb} points"
    ));
    (thin(sa, ka), thin(sb, kb))
}

/// `d(F(x,y), F(u,v)) <= phi(max{d(Tx,Tu), d(Ty,Tv)})`.
pub fn check_phi_t_contraction(problem: &CoincidenceProblem, plan: &SamplePlan, tol: f64) -> Result<CheckReport> {
    check_phi_t_contraction_with_budget(problem, plan, tol, DEFAULT_QUADRUPLE_BUDGET)
}

pub fn check_phi_t_contraction_with_budget(
    problem: &CoincidenceProblem,
    plan: &SamplePlan,
    tol: f64,
    budget: u64,
) -> Result<CheckReport> {
    let d = &problem.space;
    let mut rep = CheckBuilder::new("phi_T_contraction", tol);
    let (sa, sb) = quadruple_axes(&problem.a, &problem.b, plan, budget, &mut rep);
    let ta = sa.iter().map(|p| problem.t.eval(p)).collect::<std::result::Result<Vec<_>, _>>()?;
    let tb = sb.iter().map(|p| problem.t.eval(p)).collect::<std::result::Result<Vec<_>, _>>()?;
    // F(x,y) with x in A, y in B; F(u,v) with u in B, v in A.
    let fab = pair_table(&problem.f, &sa, &sb)?;
    let fba = pair_table(&problem.f, &sb, &sa)?;
    let (na, nb) = (sa.len(), sb.len());
    let mut t_ab = vec![0.0; na * nb];
    let mut t_ba = vec![0.0; nb * na];
    for i in 0..na {
        for k in 0..nb {
            t_ab[i * nb + k] = d.distance(&ta[i], &tb[k])?;
            t_ba[k * na + i] = d.distance(&tb[k], &ta[i])?;
        }
    }
    for i in 0..na {
        for j in 0..nb {
            let fxy = &fab[i * nb + j];
            for k in 0..nb {
                let dxu = t_ab[i * nb + k];
                for l in 0..na {
                    let fuv = &fba[k * na + l];
                    let lhs = d.distance(fxy, fuv)?;
                    let m = dxu.max(t_ba[j * na + l]);
                    let rhs = problem.phi.eval(m)?;
                    rep.observe("contraction", Relation::AtMost, lhs, rhs, || {
                        named(&[("x", &sa[i]), ("y", &sb[j]), ("u", &sb[k]), ("v", &sa[l])])
                    });
                }
            }
        }
    }
    Ok(rep.finish())
}

/// `psi(d(F(x,y), F(u,v))) <= psi(M) - phi(M)` with `M = max{d(x,u), d(y,v)}`.
pub fn check_phi_psi_contraction(problem: &StrongCoupledProblem, plan: &SamplePlan, tol: f64) -> Result<CheckReport> {
    check_phi_psi_contraction_with_budget(problem, plan, tol, DEFAULT_QUADRUPLE_BUDGET)
}

pub fn check_phi_psi_contraction_with_budget(
    problem: &StrongCoupledProblem,
    plan: &SamplePlan,
    tol: f64,
    budget: u64,
) -> Result<CheckReport> {
    let d = &problem.space;
    let mut rep = CheckBuilder::new("phi_psi_contraction", tol);
    let (sa, sb) = quadruple_axes(&problem.a, &problem.b, plan, budget, &mut rep);
    let fab = pair_table(&problem.f, &sa, &sb)?;
    let fba = pair_table(&problem.f, &sb, &sa)?;
    let (na, nb) = (sa.len(), sb.len());
    let mut d_ab = vec![0.0; na * nb];
    let mut d_ba = vec![0.0; nb * na];
    for i in 0..na {
        for k in 0..nb {
            d_ab[i * nb + k] = d.distance(&sa[i], &sb[k])?;
            d_ba[k * na + i] = d.distance(&sb[k], &sa[i])?;
        }
    }
    for i in 0..na {
        for j in 0..nb {
            let fxy = &fab[i * nb + j];
            for k in 0..nb {
                let dxu = d_ab[i * nb + k];
                for l in 0..na {
                    let fuv = &fba[k * na + l];
                    let lhs = problem.psi.eval(d.distance(fxy, fuv)?)?;
                    let m = dxu.max(d_ba[j * na + l]);
                    let rhs = problem.psi.eval(m)? - problem.phi.eval(m)?;
                    rep.observe("contraction", Relation::AtMost, lhs, rhs, || {
                        named(&[("x", &sa[i]), ("y", &sb[j]), ("u", &sb[k]), ("v", &sa[l])])
                    });
                }
            }
        }
    }
    Ok(rep.finish())
}

fn pair_table(f: &CouplingMap, first: &[Point], second: &[Point]) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(first.len() * second.len());
    for p in first {
        for q in second {
            out.push(f.eval(p, q)?);
        }
    }
    Ok(out)
}

/// For sampled `(x, y)` in `A x B`: some sampled `a` in `A` has `T(a)`
/// within `tol` of `F(y, x)`, and some `b` in `B` has `T(b)` within `tol`
/// of `F(x, y)`. Advisory: without it the iteration for the coincidence
/// theorem cannot be constructed from every start.
pub fn check_range_compatibility(
    space: &MetricSpace,
    f: &CouplingMap,
    t: &SelfMap,
    a: &SubsetSpec,
    b: &SubsetSpec,
    plan: &SamplePlan,
    tol: f64,
) -> Result<CheckReport> {
    let sa = sample_points(a, plan);
    let sb = sample_points(b, plan);
    let ia = PreimageIndex::build(t, a, plan)?;
    let ib = PreimageIndex::build(t, b, plan)?;
    // Distance from the target to `T` of the preimage the solver would pick.
    let gap = |index: &PreimageIndex, target: &Point, subset: &SubsetSpec| -> Result<f64> {
        Ok(match index.find(t, space, target, subset, tol)? {
            Ok(p) => space.distance(&t.eval(&p)?, target)?,
            Err(miss) => miss.nearest_distance.unwrap_or(f64::INFINITY),
        })
    };
    let mut rep = CheckBuilder::new("range_compatibility", tol).advisory();
    for x in &sa {
        for y in &sb {
            let fyx = f.eval(y, x)?;
            let ga = gap(&ia, &fyx, a)?;
            rep.observe("F(y,x)_in_T(A)", Relation::AtMost, ga, 0.0, || {
                named(&[("x", x), ("y", y), ("target", &fyx)])
            });
            let fxy = f.eval(x, y)?;
            let gb = gap(&ib, &fxy, b)?;
            rep.observe("F(x,y)_in_T(B)", Relation::AtMost, gb, 0.0, || {
                named(&[("x", x), ("y", y), ("target", &fxy)])
            });
        }
    }
    Ok(rep.finish())
}

/// Twice the sampled diameter of `A ∪ B`, or 1 when that is zero.
pub fn default_t_max(space: &MetricSpace, a: &SubsetSpec, b: &SubsetSpec, plan: &SamplePlan) -> Result<f64> {
    let mut pts = sample_points(a, plan);
    pts.extend(sample_points(b, plan));
    let mut diam: f64 = 0.0;
    for p in &pts {
        for q in &pts {
            diam = diam.max(space.distance(p, q)?);
        }
    }
    Ok(if diam > 0.0 { 2.0 * diam } else { 1.0 })
}

/// Comparison-class or altering-distance check, depending on the declared class.
pub fn check_control(f: &ControlFunction, t_max: f64, plan: &SamplePlan, tol: f64) -> Result<CheckReport> {
    use crate::control::{check_altering, check_phi_class, ControlClass};
    Ok(match f.class {
        ControlClass::Phi => check_phi_class(f, t_max, plan, tol)?,
        ControlClass::AlteringDistance => check_altering(f, t_max, plan, tol)?,
        ControlClass::Unclassified => {
            let mut b = CheckBuilder::new("control_class", tol);
            b.mark_inconclusive("control function carries no declared class");
            b.finish()
        }
    })
}
