use crate::control::{ControlClass, ControlFunction};
use crate::error::Error;
use crate::maps::{CouplingMap, SelfMap};
use crate::metric::{MetricSpace, SubsetSpec};

/// Existence of a coupled coincidence point of `F` and `T` on `A x B`.
#[derive(Debug, Clone)]
pub struct CoincidenceProblem {
    pub space: MetricSpace,
    pub a: SubsetSpec,
    pub b: SubsetSpec,
    pub f: CouplingMap,
    pub t: SelfMap,
    pub phi: ControlFunction,
}

impl CoincidenceProblem {
    pub fn new(
        space: MetricSpace,
        a: SubsetSpec,
        b: SubsetSpec,
        f: CouplingMap,
        t: SelfMap,
        phi: ControlFunction,
    ) -> Result<Self, Error> {
        a.validate_in(&space)?;
        b.validate_in(&space)?;
        Ok(Self { space, a, b, f, t, phi: phi.with_class(ControlClass::Phi) })
    }
}

/// Existence and uniqueness of a strong coupled fixed point of `F` in `A ∩ B`.
#[derive(Debug, Clone)]
pub struct StrongCoupledProblem {
    pub space: MetricSpace,
    pub a: SubsetSpec,
    pub b: SubsetSpec,
    pub f: CouplingMap,
    pub phi: ControlFunction,
    pub psi: ControlFunction,
}

impl StrongCoupledProblem {
    pub fn new(
        space: MetricSpace,
        a: SubsetSpec,
        b: SubsetSpec,
        f: CouplingMap,
        phi: ControlFunction,
        psi: ControlFunction,
    ) -> Result<Self, Error> {
        a.validate_in(&space)?;
        b.validate_in(&space)?;
        Ok(Self {
            space,
            a,
            b,
            f,
            phi: phi.with_class(ControlClass::AlteringDistance),
            psi: psi.with_class(ControlClass::AlteringDistance),
        })
    }

    /// The same data viewed as a coincidence problem with `T = identity`,
    /// using `phi` as the comparison function.
    pub fn as_identity_coincidence(&self, phi: ControlFunction) -> Result<CoincidenceProblem, Error> {
        CoincidenceProblem::new(
            self.space.clone(),
            self.a.clone(),
            self.b.clone(),
            self.f.clone(),
            SelfMap::identity(),
            phi,
        )
    }
}

#[derive(Debug, Clone)]
pub enum Problem {
    Coincidence(CoincidenceProblem),
    StrongCoupled(StrongCoupledProblem),
}

impl Problem {
    pub fn space(&self) -> &MetricSpace {
        match self {
            Problem::Coincidence(p) => &p.space,
            Problem::StrongCoupled(p) => &p.space,
        }
    }

    pub fn subsets(&self) -> (&SubsetSpec, &SubsetSpec) {
        match self {
            Problem::Coincidence(p) => (&p.a, &p.b),
            Problem::StrongCoupled(p) => (&p.a, &p.b),
        }
    }

    pub fn coupling(&self) -> &CouplingMap {
        match self {
            Problem::Coincidence(p) => &p.f,
            Problem::StrongCoupled(p) => &p.f,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Coincidence(_) => "coincidence",
            Problem::StrongCoupled(_) => "strong_coupled",
        }
    }
}

impl From<CoincidenceProblem> for Problem {
    fn from(p: CoincidenceProblem) -> Self {
        Problem::Coincidence(p)
    }
}

impl From<StrongCoupledProblem> for Problem {
    fn from(p: StrongCoupledProblem) -> Self {
        Problem::StrongCoupled(p)
    }
}
