//! Double-loop first-order solver for nonsmooth, weakly convex minimization
//! under a nonsmooth, weakly convex inequality constraint over a box:
//!
//! ```text
//! min f(x)   subject to   g(x) ≤ 0,   x ∈ X = [lower, upper]
//! ```
//!
//! Both `f` and `g` are accessed purely through value-plus-subgradient
//! oracles ([`oracle`]); `g` may aggregate several components through their
//! pointwise max ([`problem`]). Weak convexity means `f + (ρ/2)‖·‖²` is
//! convex for some modulus ρ — the class covering compositions of smooth
//! maps with absolute values, penalties like SCAD, and similar piecewise
//! structure.
//!
//! The method ([`prox`]) takes repeated inexact proximal steps: each outer
//! iteration anchors quadratic terms of weight ρ̂ > ρ at the current
//! iterate, making both subproblem sides strongly convex, and solves the
//! pair with the switching subgradient method ([`ssm`]) — a projected
//! subgradient loop that steps on the constraint whenever its value exceeds
//! a threshold τ and on the objective otherwise. Feasibility is preserved
//! up to τ along the whole outer sequence, the objective strictly decreases
//! until the iterates stall, and the number of outer steps before reaching
//! an ε-stationary point is bounded.
//!
//! Near-stationarity is measured, not assumed ([`stationarity`]): at any
//! point the crate reports the balanced (Fritz-John) residual — the
//! distance of the best convex combination of the two subgradients to the
//! negative normal cone of the box — and the multiplier (KKT) residual,
//! which forces unit weight on the objective and estimates the constraint
//! multiplier λ̂. The balanced form stays meaningful where no finite
//! multiplier exists; comparing the two diagnoses exactly that degeneracy.
//!
//! Benchmark data lives in [`instances`]: a generated sparse phase
//! retrieval family (absolute-value measurement fit under a SCAD sparsity
//! budget) and a small catalog of closed-form strongly convex pairs used to
//! verify the inner solver's guarantees exactly.
//!
//! A complete run on the bundled convex test problem:
//!
//! ```
//! use switchprox::instances::convex_test_problem;
//! use switchprox::prox::{run, Mode, ProxConfig};
//!
//! let (problem, x0) = convex_test_problem();
//! let config = ProxConfig {
//!     rho_hat: 2.0,
//!     epsilon: 0.25,
//!     mode: Mode::FritzJohn,
//!     sigma: None,
//!     max_outer: 30,
//!     inner_override: Some(300),
//!     tau_override: Some(1e-3),
//! };
//! let trajectory = run(&problem, &config, &x0).unwrap();
//!
//! // The iterates stay feasible and the final balanced residual is small.
//! assert!(trajectory.records.iter().all(|r| r.g_value <= 0.0));
//! assert!(trajectory.final_record().fj.residual < 0.5);
//! ```

// Validation deliberately writes `!(x > 0.0)` instead of `x <= 0.0`: the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod instances;
pub mod numfmt;
pub mod oracle;
pub mod problem;
pub mod prox;
pub mod ssm;
pub mod stationarity;

pub use error::{Error, Result};
