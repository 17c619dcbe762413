//! Measure pairs on u-curves, their one-step decompositions and the iterated
//! pushforward of a fully crossing pair.

mod curve;
mod cuts;
mod integrals;
mod iterate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::{
    f_gamma, f_gamma_derivatives, inversion_tolerance, invert_f_gamma, CurveEvaluator, CurvePoint, RootDensity,
    UCurve,
};
pub use cuts::{
    cut, cut_full, cut_standard, cut_substandard, transport_density, CutConfig, DecompositionStep, FullCrossingRun,
    Piece,
};
pub use integrals::{
    integrate_observable, pair_pushforward_integral, verify_pair, PairReport, PushforwardIntegral,
    PushforwardOptions,
};
pub use iterate::{iterate_decomposition, DecompositionLedger, DecompositionMode, InventoryRecord, StepMasses};

use crate::geometry::GeometryError;
use crate::numerics::quadrature::QuadratureError;

/// `C_0 = 8 pi^2`, the distortion constant.
pub const C0: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Default length threshold separating standard from substandard pairs.
pub const A0_DEFAULT: f64 = 1.0 / 16.0;

/// Curve-count cap for exhaustive decompositions.
pub const DEFAULT_CURVE_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairError {
    #[error("x = {x} lies outside the curve domain [{}, {}]", domain.0, domain.1)]
    DomainError { x: f64, domain: (f64, f64) },
    #[error("target {target} is not enclosed by f_gamma(bracket) = [{}, {}]", range.0, range.1)]
    BracketError { target: f64, range: (f64, f64) },
    #[error("preimage of [{}, {}] meets the critical strip S_{eta}", interval.0, interval.1)]
    StripOverlap { interval: (f64, f64), eta: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("exhaustive decomposition needs {count} curves at step {step}, above the cap of {cap}")]
    BudgetExceeded { step: usize, count: u64, cap: u64 },
    #[error("quadrature failed: {0}")]
    QuadratureFailure(QuadratureError),
    #[error("resolving the integrand needs more than {cap} quadrature nodes")]
    ResolutionExceeded { cap: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regularity {
    FullCrossing,
    Standard,
    Substandard,
}

/// The four classes of the decomposition of a pushforward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MassClass {
    /// Fully crossing standard pairs.
    L,
    /// Standard pairs.
    I,
    /// Substandard pairs.
    J,
    /// Uncontrolled remainder.
    E,
}

/// Density of a pair, evaluated through the curve's ancestry.
#[derive(Clone, Debug)]
pub struct PairDensity {
    curve: UCurve,
    pub log_derivative_bound: f64,
}

impl PairDensity {
    pub fn new(curve: UCurve, log_derivative_bound: f64) -> Self {
        PairDensity {
            curve,
            log_derivative_bound,
        }
    }

    pub fn curve(&self) -> &UCurve {
        &self.curve
    }

    pub fn log_density(&self, x: f64) -> Result<f64, PairError> {
        Ok(self.curve.eval(x)?.log_rho)
    }

    pub fn log_derivative(&self, x: f64) -> Result<f64, PairError> {
        Ok(self.curve.eval(x)?.dlog_rho)
    }

    /// `int_I rho dx`, which should be one.
    pub fn normalization(&self) -> Result<f64, PairError> {
        let (a, b) = self.curve.domain();
        self.curve.evaluator().mass(a, b)
    }
}

/// A u-curve with a probability density and a weight.
#[derive(Clone, Debug)]
pub struct MeasurePair {
    pub curve: UCurve,
    pub density: PairDensity,
    pub mass: f64,
    pub regularity: Regularity,
}

impl MeasurePair {
    pub fn new(curve: UCurve, log_derivative_bound: f64, mass: f64, regularity: Regularity) -> Self {
        MeasurePair {
            density: PairDensity::new(curve.clone(), log_derivative_bound),
            curve,
            mass,
            regularity,
        }
    }

    /// The fully crossing horizontal pair `(gamma^y, 1)` of unit mass.
    pub fn horizontal(l: f64, y0: f64) -> Self {
        Self::new(UCurve::horizontal(l, y0), 0.0, 1.0, Regularity::FullCrossing)
    }

    /// A fully crossing horizontal pair with an arbitrary root density.
    pub fn horizontal_with(l: f64, y0: f64, density: RootDensity) -> Result<Self, PairError> {
        let curve = UCurve::root(l, y0, (0.0, 1.0), density)?;
        Ok(Self::new(curve, density.log_derivative_bound(), 1.0, Regularity::FullCrossing))
    }

    pub fn l(&self) -> f64 {
        self.curve.l()
    }

    pub fn log_derivative_bound(&self) -> f64 {
        self.density.log_derivative_bound
    }
}

impl Serialize for MeasurePair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("MeasurePair", 6)?;
        st.serialize_field("domain", &self.curve.domain())?;
        st.serialize_field("depth", &self.curve.depth())?;
        st.serialize_field("shift", &self.curve.shift())?;
        st.serialize_field("mass", &self.mass)?;
        st.serialize_field("regularity", &self.regularity)?;
        st.serialize_field("log_derivative_bound", &self.log_derivative_bound())?;
        st.end()
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    /// A pair of the given depth reached by following mass-proportional
    /// children of the horizontal pair at height `y0`.
    pub fn descend(l: f64, y0: f64, depth: usize, seed: u64) -> MeasurePair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = MeasurePair::horizontal(l, y0);
        for _ in 0..depth {
            let step = cut(&p, &CutConfig::default()).unwrap();
            p = step.sample_child(&mut rng).unwrap().unwrap().1;
        }
        p
    }
}
