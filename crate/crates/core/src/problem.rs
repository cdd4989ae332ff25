//! Problem definition: objective oracle, constraint oracles, domain, and the
//! scalar constants the convergence theory consumes.
//!
//! The constraint side is a finite family `g_1, …, g_m` aggregated through
//! the pointwise maximum `g(x) = max_i g_i(x)`; the solver only ever sees the
//! aggregate value and a subgradient of one active component.

use std::sync::Arc;

use ndarray::Array1;
use rand::Rng;

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::oracle::{Oracle, SharedOracle};

/// Scalar constants attached to a problem.
///
/// `rho` is a weak-convexity modulus valid for the objective and every
/// constraint component (`h + (rho/2)‖·‖²` is convex); `m_bound` bounds every
/// subgradient norm either function can return on the domain; `f_lb` and
/// `g_lb` are lower bounds on the objective and the aggregate constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConstants {
    pub rho: f64,
    pub m_bound: f64,
    pub f_lb: f64,
    pub g_lb: f64,
}

/// Result of evaluating the max-aggregated constraint at a point.
#[derive(Debug, Clone)]
pub struct ConstraintEval {
    /// `max_i g_i(x)`.
    pub value: f64,
    /// Subgradient of the active component.
    pub subgradient: Array1<f64>,
    /// Index of the active component; ties break to the lowest index.
    pub active_index: usize,
}

/// A constrained minimization problem: `min f(x)` subject to
/// `max_i g_i(x) ≤ 0` and `x` in a box domain.
///
/// Immutable after construction; oracle evaluation is pure, so one problem
/// can serve many worker threads simultaneously.
pub struct ConstrainedProblem {
    objective: SharedOracle,
    constraints: Vec<SharedOracle>,
    domain: BoxDomain,
    constants: ProblemConstants,
}

impl ConstrainedProblem {
    pub fn new(
        objective: SharedOracle,
        constraints: Vec<SharedOracle>,
        domain: BoxDomain,
        constants: ProblemConstants,
    ) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::InvalidParameter(
                "a problem needs at least one constraint component".into(),
            ));
        }
        if !(constants.rho >= 0.0) || !constants.rho.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weak-convexity modulus rho must be finite and >= 0, got {:e}",
                constants.rho
            )));
        }
        if !(constants.m_bound > 0.0) || !constants.m_bound.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "subgradient bound M must be finite and > 0, got {:e}",
                constants.m_bound
            )));
        }
        if constants.f_lb.is_nan() || constants.g_lb.is_nan() {
            return Err(Error::InvalidParameter(
                "lower bounds f_lb and g_lb must not be NaN".into(),
            ));
        }
        Ok(Self {
            objective,
            constraints,
            domain,
            constants,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn constants(&self) -> ProblemConstants {
        self.constants
    }

    pub fn rho(&self) -> f64 {
        self.constants.rho
    }

    pub fn m_bound(&self) -> f64 {
        self.constants.m_bound
    }

    pub fn f_lb(&self) -> f64 {
        self.constants.f_lb
    }

    pub fn g_lb(&self) -> f64 {
        self.constants.g_lb
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    /// Objective value and subgradient at `x`.
    pub fn objective_eval(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        self.objective.eval(x)
    }

    /// Max-aggregated constraint at `x`: value, subgradient of the active
    /// component, and the active index (lowest index on ties).
    pub fn constraint_eval(&self, x: &Array1<f64>) -> ConstraintEval {
        max_constraint_eval(&self.constraints, x)
    }

    /// A shareable handle to the objective oracle.
    pub fn objective_oracle(&self) -> SharedOracle {
        Arc::clone(&self.objective)
    }

    /// The max-aggregated constraint as a standalone oracle.
    pub fn constraint_oracle(&self) -> MaxOracle {
        MaxOracle {
            components: self.constraints.clone(),
        }
    }
}

/// Evaluates `max_i g_i(x)` over a component family, returning the active
/// component's subgradient; ties break to the lowest index (strict `>`
/// replacement), keeping runs deterministic.
pub fn max_constraint_eval(components: &[SharedOracle], x: &Array1<f64>) -> ConstraintEval {
    assert!(!components.is_empty(), "empty constraint family");
    let (mut value, mut subgradient) = components[0].eval(x);
    let mut active_index = 0;
    for (i, g) in components.iter().enumerate().skip(1) {
        let (v, s) = g.eval(x);
        if v > value {
            value = v;
            subgradient = s;
            active_index = i;
        }
    }
    ConstraintEval {
        value,
        subgradient,
        active_index,
    }
}

/// Pointwise maximum of a family of oracles, itself an [`Oracle`].
pub struct MaxOracle {
    components: Vec<SharedOracle>,
}

impl Oracle for MaxOracle {
    fn eval(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        let e = max_constraint_eval(&self.components, x);
        (e.value, e.subgradient)
    }
}

/// Largest subgradient norm observed over uniform samples from the box.
pub fn max_subgradient_norm<R: Rng + ?Sized>(
    oracle: &dyn Oracle,
    domain: &BoxDomain,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = domain.sample_uniform(rng);
        let (_, sub) = oracle.eval(&x);
        worst = worst.max(sub.dot(&sub).sqrt());
    }
    worst
}

/// Smallest function value observed over uniform samples from the box.
pub fn min_sampled_value<R: Rng + ?Sized>(
    oracle: &dyn Oracle,
    domain: &BoxDomain,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let x = domain.sample_uniform(rng);
        best = best.min(oracle.eval(&x).0);
    }
    best
}

/// Largest violation of midpoint convexity of `h + (rho/2)‖·‖²` over random
/// segments with endpoints sampled uniformly from the box.
///
/// For each sampled pair `(a, b)` the violation is
/// `φ((a+b)/2) − (φ(a) + φ(b))/2` with `φ = h + (rho/2)‖·‖²`; a weakly
/// convex `h` with modulus `rho` keeps every violation `≤ 0` up to rounding.
pub fn midpoint_convexity_violation<R: Rng + ?Sized>(
    oracle: &dyn Oracle,
    domain: &BoxDomain,
    rho: f64,
    pairs: usize,
    rng: &mut R,
) -> f64 {
    let phi = |x: &Array1<f64>| oracle.eval(x).0 + 0.5 * rho * x.dot(x);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let a = domain.sample_uniform(rng);
        let b = domain.sample_uniform(rng);
        let mid = (&a + &b) * 0.5;
        let violation = phi(&mid) - 0.5 * (phi(&a) + phi(&b));
        worst = worst.max(violation);
    }
    worst
}
