//! The switching subgradient method for strongly convex, functionally
//! constrained subproblems.
//!
//! Given oracles for a strongly convex objective `F` and constraint `G` over
//! a box `Z`, the method runs `T` projected subgradient steps. At step `t` it
//! checks the switching threshold: when `G(z_t) ≤ τ` it steps along a
//! subgradient of `F` (an *objective step*, index set `I`), otherwise along a
//! subgradient of `G` (a *constraint step*, index set `J`). The output is the
//! weighted average of the objective-step iterates with weights `t + 1`,
//! which is a `(τ, τ)`-optimal solution — within `τ` of the constrained
//! optimal value and violating `G ≤ 0` by at most `τ` — once `T` reaches
//! [`min_iterations`].
//!
//! The step schedule handles objectives whose subgradients are unbounded but
//! satisfy the quadratic growth bound `‖ζ‖² ≤ L0² + L1·(value − optimum)`;
//! plain `L0`-Lipschitz problems are the `L1 = 0` special case.

use ndarray::Array1;

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::oracle::Oracle;

/// Inner-solver configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsmConfig {
    /// Switching threshold `τ > 0`: steps follow the objective while
    /// `G(z_t) ≤ τ`.
    pub tau: f64,
    /// Iteration budget `T ≥ 1`.
    pub max_iters: usize,
    /// Strong-convexity modulus `μ > 0` shared by `F` and `G`.
    pub mu: f64,
    /// Growth constant `L1 ≥ 0` in the step schedule; `0` for Lipschitz
    /// problems.
    pub l1: f64,
    /// Record the per-step trajectory (`z_t`, values, branch) in the result.
    pub record_trajectory: bool,
}

impl SsmConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "switching threshold tau must be finite and > 0, got {:e}",
                self.tau
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "iteration budget must be at least 1".into(),
            ));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "strong convexity mu must be finite and > 0, got {:e}",
                self.mu
            )));
        }
        if !(self.l1 >= 0.0) || !self.l1.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "growth constant L1 must be finite and >= 0, got {:e}",
                self.l1
            )));
        }
        Ok(())
    }
}

/// Which function supplied the step direction at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `G(z_t) ≤ τ`: step on the objective (`t ∈ I`).
    Objective,
    /// `G(z_t) > τ`: step on the constraint (`t ∈ J`).
    Constraint,
}

/// One recorded inner iteration (pre-step state).
#[derive(Debug, Clone)]
pub struct SsmStep {
    pub t: usize,
    pub z: Array1<f64>,
    pub f_value: f64,
    pub g_value: f64,
    pub branch: Branch,
}

/// Output of one inner solve.
#[derive(Debug, Clone)]
pub struct SsmResult {
    /// Weighted average of the objective-step iterates, weights `t + 1`; the
    /// point the guarantees speak about. Equals `z0` when `degenerate`.
    pub z_bar: Array1<f64>,
    /// The iterate after the final step (diagnostic only).
    pub final_iterate: Array1<f64>,
    /// `|I|`: steps taken on the objective.
    pub objective_steps: usize,
    /// `|J|`: steps taken on the constraint.
    pub constraint_steps: usize,
    /// True when no objective step was ever taken, so no average exists and
    /// `z_bar` falls back to `z0`. Cannot happen once the budget reaches
    /// [`min_iterations`].
    pub degenerate: bool,
    /// Oracle invocations made by the loop: exactly two per iteration — the
    /// branch test on `G` and the step evaluation on `F`.
    pub oracle_calls: u64,
    /// Per-step records when requested in the config.
    pub trajectory: Option<Vec<SsmStep>>,
}

/// Step size `α_t = 2 / (μ(t+2) + L1²/(μ(t+1)))`.
///
/// Satisfies `L1·α_t ≤ 1` for every `t ≥ 0`, which the convergence argument
/// needs to absorb the growth term.
pub fn step_size(t: usize, mu: f64, l1: f64) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "strong convexity mu must be finite and > 0, got {mu:e}"
        )));
    }
    if !(l1 >= 0.0) || !l1.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "growth constant L1 must be finite and >= 0, got {l1:e}"
        )));
    }
    Ok(step_size_unchecked(t, mu, l1))
}

#[inline]
fn step_size_unchecked(t: usize, mu: f64, l1: f64) -> f64 {
    let t = t as f64;
    2.0 / (mu * (t + 2.0) + l1 * l1 / (mu * (t + 1.0)))
}

/// Smallest iteration budget certifying that the averaged output is a
/// `(τ, τ)`-optimal solution:
/// `ceil(max{ 8·L0²/(μτ), sqrt(2·L1²·dist0²/(μτ)) })`,
/// where `dist0` upper-bounds the distance from `z0` to the subproblem
/// optimum.
pub fn min_iterations(l0sq: f64, l1: f64, mu: f64, tau: f64, dist0: f64) -> Result<usize> {
    if !(mu > 0.0) || !(tau > 0.0) || !mu.is_finite() || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "mu and tau must be finite and > 0, got mu = {mu:e}, tau = {tau:e}"
        )));
    }
    if !(l0sq >= 0.0) || !(l1 >= 0.0) || !(dist0 >= 0.0) {
        return Err(Error::InvalidParameter(
            "L0², L1, and dist0 must be >= 0".into(),
        ));
    }
    let lipschitz_term = 8.0 * l0sq / (mu * tau);
    let growth_term = (2.0 * l1 * l1 * dist0 * dist0 / (mu * tau)).sqrt();
    let bound = lipschitz_term.max(growth_term);
    if !bound.is_finite() || bound > 1e15 {
        return Err(Error::InvalidParameter(format!(
            "iteration bound {bound:e} is not representable; loosen tau or the constants"
        )));
    }
    Ok(bound.ceil() as usize)
}

/// Runs the switching subgradient method from `z0`, which must lie in the
/// domain and satisfy `G(z0) ≤ τ`.
pub fn solve(
    f: &dyn Oracle,
    g: &dyn Oracle,
    domain: &BoxDomain,
    z0: &Array1<f64>,
    config: &SsmConfig,
) -> Result<SsmResult> {
    let (g0, _) = g.eval(z0);
    if g0 > config.tau {
        return Err(Error::InfeasibleInnerStart {
            g0,
            tau: config.tau,
        });
    }
    solve_relaxed(f, g, domain, z0, config)
}

/// As [`solve`] but without the `G(z0) ≤ τ` precondition: the loop runs
/// regardless and simply begins with constraint steps. Used for polishing
/// passes where the start may sit slightly outside the threshold.
pub(crate) fn solve_relaxed(
    f: &dyn Oracle,
    g: &dyn Oracle,
    domain: &BoxDomain,
    z0: &Array1<f64>,
    config: &SsmConfig,
) -> Result<SsmResult> {
    config.validate()?;
    domain.check_membership(z0, crate::domain::MEMBERSHIP_TOL)?;

    let n = z0.len();
    let mut z = z0.clone();
    let mut weighted_sum = Array1::<f64>::zeros(n);
    let mut weight_total = 0.0f64;
    let mut objective_steps = 0usize;
    let mut constraint_steps = 0usize;
    let mut oracle_calls = 0u64;
    let mut trajectory = config.record_trajectory.then(Vec::new);

    for t in 0..config.max_iters {
        let (g_value, g_sub) = g.eval(&z);
        let (f_value, f_sub) = f.eval(&z);
        oracle_calls += 2;

        let branch = if g_value <= config.tau {
            Branch::Objective
        } else {
            Branch::Constraint
        };
        if branch == Branch::Objective {
            let w = (t + 1) as f64;
            weighted_sum.scaled_add(w, &z);
            weight_total += w;
            objective_steps += 1;
        } else {
            constraint_steps += 1;
        }
        if let Some(steps) = trajectory.as_mut() {
            steps.push(SsmStep {
                t,
                z: z.clone(),
                f_value,
                g_value,
                branch,
            });
        }

        let alpha = step_size_unchecked(t, config.mu, config.l1);
        let direction = match branch {
            Branch::Objective => &f_sub,
            Branch::Constraint => &g_sub,
        };
        z.scaled_add(-alpha, direction);
        domain.project_mut(&mut z);
    }

    let degenerate = weight_total == 0.0;
    let z_bar = if degenerate {
        z0.clone()
    } else {
        let mut avg = weighted_sum / weight_total;
        // The average of in-box iterates is in the box up to rounding; snap
        // it back so downstream geometry can rely on exact membership.
        domain.project_mut(&mut avg);
        avg
    };

    Ok(SsmResult {
        z_bar,
        final_iterate: z,
        objective_steps,
        constraint_steps,
        degenerate,
        oracle_calls,
        trajectory,
    })
}
