use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, MapError};
use crate::expr::{Bindings, Expr, Var};
use crate::metric::{sample_points, MetricSpace, Point, SamplePlan, SubsetSpec};

type Binary = dyn Fn(&Point, &Point) -> Result<Point, MapError> + Send + Sync;
type Unary = dyn Fn(&Point) -> Result<Point, MapError> + Send + Sync;

fn real_arg(p: &Point) -> Result<f64, MapError> {
    p.as_real().ok_or_else(|| MapError::NotReal(p.clone()))
}

/// The two-argument map `F`.
#[derive(Clone)]
pub struct CouplingMap {
    f: Arc<Binary>,
    description: String,
}

impl fmt::Debug for CouplingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CouplingMap({})", self.description)
    }
}

impl CouplingMap {
    pub fn from_fn<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Point, &Point) -> Result<Point, MapError> + Send + Sync + 'static,
    {
        Self { f: Arc::new(f), description: description.into() }
    }

    /// Real-valued closure; convenient for tests and built-in families.
    pub fn from_real_fn<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_fn(description, move |x, y| Ok(Point::Real(f(real_arg(x)?, real_arg(y)?))))
    }

    pub fn from_expr(expr: Expr) -> Result<Self, Error> {
        expr.require_vars(&[Var::X, Var::Y])?;
        let description = expr.to_string();
        let expr = Arc::new(expr);
        Ok(Self::from_fn(description, move |x, y| {
            let (xv, yv) = (real_arg(x)?, real_arg(y)?);
            expr.eval(&Bindings::xy(xv, yv))
                .map(Point::Real)
                .map_err(|source| MapError::Eval { args: format!("({xv}, {yv})"), source })
        }))
    }

    /// Lookup table over label pairs.
    pub fn from_table(table: HashMap<(String, String), String>) -> Self {
        let description = format!("table({} entries)", table.len());
        Self::from_fn(description, move |x, y| {
            let key = (x.to_string(), y.to_string());
            table
                .get(&key)
                .map(|v| Point::Label(v.clone()))
                .ok_or_else(|| MapError::MissingEntry(format!("({x}, {y})")))
        })
    }

    pub fn eval(&self, x: &Point, y: &Point) -> Result<Point, MapError> {
        (self.f)(x, y)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

/// Why no preimage was found.
#[derive(Debug, Clone, PartialEq)]
pub struct PreimageMiss {
    pub target: Point,
    /// Distance from the target to the closest sampled image, when any
    /// image could be compared.
    pub nearest_distance: Option<f64>,
    pub nearest_point: Option<Point>,
}

/// The self map `T`, with an optional closed-form inverse.
#[derive(Clone)]
pub struct SelfMap {
    f: Arc<Unary>,
    inverse: Option<Arc<Unary>>,
    identity: bool,
    description: String,
}

impl fmt::Debug for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SelfMap({})", self.description)
    }
}

impl SelfMap {
    pub fn identity() -> Self {
        Self {
            f: Arc::new(|p| Ok(p.clone())),
            inverse: Some(Arc::new(|p| Ok(p.clone()))),
            identity: true,
            description: "identity".into(),
        }
    }

    pub fn from_fn<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Point) -> Result<Point, MapError> + Send + Sync + 'static,
    {
        Self { f: Arc::new(f), inverse: None, identity: false, description: description.into() }
    }

    pub fn from_real_fn<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_fn(description, move |x| Ok(Point::Real(f(real_arg(x)?))))
    }

    pub fn from_expr(expr: Expr) -> Result<Self, Error> {
        expr.require_vars(&[Var::X])?;
        let description = expr.to_string();
        Ok(Self::from_fn(description, expr_unary(expr)))
    }

    /// Installs an inverse; `x` in the expression is bound to the target.
    pub fn with_inverse_expr(mut self, expr: Expr) -> Result<Self, Error> {
        expr.require_vars(&[Var::X])?;
        self.inverse = Some(Arc::new(expr_unary(expr)));
        Ok(self)
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn eval(&self, p: &Point) -> Result<Point, MapError> {
        (self.f)(p)
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// A point `p` of `subset` with `d(T(p), target) <= tol`.
    ///
    /// The closed-form inverse is tried first; otherwise (or when it misses)
    /// the sampled points of `subset` are scanned and the first one
    /// minimising `d(T(p), target)` wins.
    pub fn preimage(
        &self,
        space: &MetricSpace,
        target: &Point,
        subset: &SubsetSpec,
        plan: &SamplePlan,
        tol: f64,
    ) -> Result<Result<Point, PreimageMiss>, Error> {
        PreimageIndex::build(self, subset, plan)?.find(self, space, target, subset, tol)
    }
}

fn expr_unary(expr: Expr) -> impl Fn(&Point) -> Result<Point, MapError> + Send + Sync + 'static {
    let expr = Arc::new(expr);
    move |x| {
        let xv = real_arg(x)?;
        expr.eval(&Bindings::x(xv))
            .map(Point::Real)
            .map_err(|source| MapError::Eval { args: format!("({xv})"), source })
    }
}

/// Sampled points of a subset with their images under `T`, built once per
/// solve so repeated preimage queries do not re-evaluate `T`.
#[derive(Debug, Clone)]
pub struct PreimageIndex {
    points: Vec<Point>,
    images: Vec<Point>,
}

impl PreimageIndex {
    pub fn build(t: &SelfMap, subset: &SubsetSpec, plan: &SamplePlan) -> Result<Self, Error> {
        let points = sample_points(subset, plan);
        let images = points.iter().map(|p| t.eval(p)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { points, images })
    }

    pub fn images(&self) -> &[Point] {
        &self.images
    }

    pub fn find(
        &self,
        t: &SelfMap,
        space: &MetricSpace,
        target: &Point,
        subset: &SubsetSpec,
        tol: f64,
    ) -> Result<Result<Point, PreimageMiss>, Error> {
        if let Some(inv) = &t.inverse {
            if let Ok(p) = inv(target) {
                if subset.contains(&p)? {
                    let img = t.eval(&p)?;
                    if space.distance(&img, target)? <= tol {
                        return Ok(Ok(p));
                    }
                }
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, img) in self.images.iter().enumerate() {
            let d = space.distance(img, target)?;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, d)) if d <= tol => Ok(Ok(self.points[i].clone())),
            Some((i, d)) => Ok(Err(PreimageMiss {
                target: target.clone(),
                nearest_distance: Some(d),
                nearest_point: Some(self.points[i].clone()),
            })),
            None => Ok(Err(PreimageMiss { target: target.clone(), nearest_distance: None, nearest_point: None })),
        }
    }
}
