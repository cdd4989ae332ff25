//! Closed-form verification instances for the inner solver.
//!
//! Each entry pairs a strongly convex objective `F` with a strongly convex
//! constraint `G` whose constrained minimizer is known in closed form,
//! together with certified constants for the iteration-count guarantee: the
//! strong-convexity modulus `μ`, growth constants `(L0², L1)` with
//! `‖ζ‖² ≤ L0² + L1·(value − optimal value)` on the relevant branch, and an
//! upper bound `dist0` on the distance from the published start to the
//! minimizer. Tests can therefore run the solver with exactly the certified
//! budget and assert the guaranteed accuracy with no slack.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::{array, Array1};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::oracle::{QuadraticOracle, SharedOracle};
use crate::problem::{ConstrainedProblem, ProblemConstants};

/// Identifier of a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CatalogId {
    /// One-dimensional quadratic pair on a box.
    Quad1d,
    /// Two-dimensional quadratic with the constraint active at the optimum.
    Quad2d,
    /// The one-dimensional pair on all of ℝ, exercising the growth-bound
    /// branch (`L1 > 0`) that unbounded domains force.
    Unbounded,
}

impl CatalogId {
    /// Every entry, in a fixed order.
    pub fn all() -> [CatalogId; 3] {
        [CatalogId::Quad1d, CatalogId::Quad2d, CatalogId::Unbounded]
    }
}

impl FromStr for CatalogId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quad1d" => Ok(CatalogId::Quad1d),
            "quad2d" => Ok(CatalogId::Quad2d),
            "unbounded" => Ok(CatalogId::Unbounded),
            other => Err(Error::UnknownInstanceId(other.to_string())),
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CatalogId::Quad1d => "quad1d",
            CatalogId::Quad2d => "quad2d",
            CatalogId::Unbounded => "unbounded",
        })
    }
}

/// A catalog entry: the problem data plus everything the guarantees need.
pub struct CatalogInstance {
    pub id: CatalogId,
    pub objective: SharedOracle,
    pub constraint: SharedOracle,
    pub domain: BoxDomain,
    /// Published start; satisfies `G(z0) ≤ 0`.
    pub z0: Array1<f64>,
    /// Closed-form constrained minimizer of `F` over `{G ≤ 0} ∩ domain`.
    pub z_star: Array1<f64>,
    /// `F(z_star)`.
    pub f_star: f64,
    /// Strong-convexity modulus shared by `F` and `G`.
    pub mu: f64,
    /// Growth constants: on the objective branch
    /// `‖ζ_F‖² ≤ L0² + L1·(F(z) − F(z*))`, and analogously on the
    /// constraint branch relative to `G(z*)`.
    pub l0sq: f64,
    pub l1: f64,
    /// `‖z0 − z_star‖`.
    pub dist0: f64,
}

/// Builds the catalog entry for `id`.
pub fn instance(id: CatalogId) -> CatalogInstance {
    match id {
        // F(z) = z², G(z) = (z−1)² − 1 on [−3, 3]. The feasible set is
        // [0, 2], so z* = 0 with F(z*) = 0. Both functions are 2-strongly
        // convex. Subgradients over the box top out at |G'(−3)| = 8, so
        // L0² = 64 suffices with no growth term. Start z0 = 2 (G(2) = 0).
        CatalogId::Quad1d => CatalogInstance {
            id,
            objective: Arc::new(QuadraticOracle {
                center: array![0.0],
                scale: 1.0,
                offset: 0.0,
            }),
            constraint: Arc::new(QuadraticOracle {
                center: array![1.0],
                scale: 1.0,
                offset: -1.0,
            }),
            domain: BoxDomain::symmetric(1, 3.0),
            z0: array![2.0],
            z_star: array![0.0],
            f_star: 0.0,
            mu: 2.0,
            l0sq: 64.0,
            l1: 0.0,
            dist0: 2.0,
        },
        // F(z) = ‖z − (2,1)‖², G(z) = ‖z‖² − 1 on [−3, 3]². The center
        // (2,1) lies outside the unit disk, so the constraint is active:
        // ∇F + λ∇G = 0 gives z = (2,1)/(1+λ), and ‖z‖ = 1 fixes
        // λ = √5 − 1 > 0, hence z* = (2,1)/√5 and
        // F(z*) = (√5 − 1)² = 6 − 2√5. Gradients over the box top out at
        // ‖∇F(−3,−3)‖² = 4·(25 + 16) = 164 ≥ ‖∇G‖², so L0² = 164.
        // Start at the disk center (G(0) = −1), one unit from z*.
        CatalogId::Quad2d => {
            let sqrt5 = 5f64.sqrt();
            CatalogInstance {
                id,
                objective: Arc::new(QuadraticOracle {
                    center: array![2.0, 1.0],
                    scale: 1.0,
                    offset: 0.0,
                }),
                constraint: Arc::new(QuadraticOracle {
                    center: array![0.0, 0.0],
                    scale: 1.0,
                    offset: -1.0,
                }),
                domain: BoxDomain::symmetric(2, 3.0),
                z0: array![0.0, 0.0],
                z_star: array![2.0 / sqrt5, 1.0 / sqrt5],
                f_star: 6.0 - 2.0 * sqrt5,
                mu: 2.0,
                l0sq: 164.0,
                l1: 0.0,
                dist0: 1.0,
            }
        }
        // The quad1d pair on all of ℝ. Strong convexity rules out any
        // constant subgradient bound on an unbounded domain, but the growth
        // bound holds with L0² = 4, L1 = 4 — tightly on the constraint
        // branch: |G'(z)|² = 4(z−1)² equals L0² + L1·(G(z) − G(z*))
        // identically, since G(z*) = G(0) = 0.
        CatalogId::Unbounded => CatalogInstance {
            id,
            objective: Arc::new(QuadraticOracle {
                center: array![0.0],
                scale: 1.0,
                offset: 0.0,
            }),
            constraint: Arc::new(QuadraticOracle {
                center: array![1.0],
                scale: 1.0,
                offset: -1.0,
            }),
            domain: BoxDomain::free(1),
            z0: array![2.0],
            z_star: array![0.0],
            f_star: 0.0,
            mu: 2.0,
            l0sq: 4.0,
            l1: 4.0,
            dist0: 2.0,
        },
    }
}

/// The quad2d data packaged as a full outer-loop problem, plus its feasible
/// start: `min ‖x − (2,1)‖²` subject to `‖x‖² − 1 ≤ 0` on `[−3, 3]²`.
///
/// Both functions are convex (ρ = 0); subgradient norms stay below
/// `2√41 < 13` on the box; the objective is nonnegative and the constraint
/// is at least −1. The optimum is the catalog's `z* = (2,1)/√5` with an
/// active constraint and multiplier `√5 − 1`, so the outer loop must drive
/// both stationarity residuals toward zero there.
pub fn convex_test_problem() -> (ConstrainedProblem, Array1<f64>) {
    let entry = instance(CatalogId::Quad2d);
    let problem = ConstrainedProblem::new(
        entry.objective,
        vec![entry.constraint],
        entry.domain,
        ProblemConstants {
            rho: 0.0,
            m_bound: 13.0,
            f_lb: 0.0,
            g_lb: -1.0,
        },
    )
    .expect("hardcoded constants validate");
    (problem, entry.z0)
}
