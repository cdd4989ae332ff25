//! The outer proximal loop: repeated inexact proximal steps on a weakly
//! convex constrained problem.
//!
//! Each outer iteration anchors quadratic proximal terms at the current
//! iterate x_k, producing the strongly convex subproblem pair
//!
//! ```text
//! F_k(z) = f(z) + (ρ̂/2)‖z − x_k‖²,   G_k(z) = g(z) + (ρ̂/2)‖z − x_k‖²,
//! ```
//!
//! hands them to the switching subgradient solver, and takes its averaged
//! output as x_{k+1}. With ρ̂ above the weak-convexity modulus ρ, both
//! subproblems are (ρ̂ − ρ)-strongly convex, every iterate stays feasible up
//! to the switching threshold, and the objective strictly decreases until
//! the iterates land on a near-stationary point. The loop stops at the
//! first sign of stalling — an infeasible iterate or a non-decreasing
//! objective value — or at the outer budget.
//!
//! The switching threshold τ and the inner budget T are derived from the
//! target accuracy ε by [`fj_parameters`] (balanced stationarity) or
//! [`kkt_parameters`] (multiplier stationarity, which needs the constraint
//! qualification modulus σ). Those certified budgets are astronomically
//! large at practical ε, so the config accepts overrides for both, matching
//! how experiments actually run.

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;

use crate::domain::MEMBERSHIP_TOL;
use crate::error::{Error, Result};
use crate::numfmt::float17;
use crate::oracle::{Oracle, SharedOracle};
use crate::problem::ConstrainedProblem;
use crate::ssm::{self, SsmConfig};
use crate::stationarity::{
    fj_residual_at, kkt_residual_at, StationarityCertificate, DEFAULT_LAMBDA_CAP,
};

/// Which stationarity notion drives the (τ, T) schedule and which
/// certificate's complementary slackness the trajectory CSV reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    FritzJohn,
    Kkt,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fj" => Ok(Mode::FritzJohn),
            "kkt" => Ok(Mode::Kkt),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode {other:?}; expected \"fj\" or \"kkt\""
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::FritzJohn => "fj",
            Mode::Kkt => "kkt",
        })
    }
}

/// Outer-loop configuration. Derived quantities (τ, T, multiplier cap) are
/// resolved against the problem's constants when a run starts; see
/// [`ResolvedParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProxConfig {
    /// Proximal weight ρ̂; must exceed max{ρ, 1}.
    pub rho_hat: f64,
    /// Target stationarity accuracy ε > 0.
    pub epsilon: f64,
    /// Stationarity notion for the schedule and reporting.
    pub mode: Mode,
    /// Constraint-qualification modulus σ > 0; required in `Kkt` mode,
    /// optional otherwise (it tightens the multiplier search cap).
    pub sigma: Option<f64>,
    /// Outer iteration budget K ≥ 1.
    pub max_outer: usize,
    /// Override for the inner budget T; without it the certified minimum
    /// for the resolved τ is used (which may be impractically large).
    pub inner_override: Option<usize>,
    /// Override for the switching threshold τ.
    pub tau_override: Option<f64>,
}

impl ProxConfig {
    fn validate(&self, rho: f64) -> Result<()> {
        if !(self.rho_hat > rho.max(1.0)) || !self.rho_hat.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "proximal weight rho_hat must be finite and exceed max(rho, 1) = {:e}, got {:e}",
                rho.max(1.0),
                self.rho_hat
            )));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be finite and > 0, got {:e}",
                self.epsilon
            )));
        }
        match self.sigma {
            None if self.mode == Mode::Kkt => {
                return Err(Error::InvalidParameter(
                    "kkt mode requires the constraint-qualification modulus sigma".into(),
                ));
            }
            Some(s) if !(s > 0.0) || !s.is_finite() => {
                return Err(Error::InvalidParameter(format!(
                    "sigma must be finite and > 0, got {s:e}"
                )));
            }
            _ => {}
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter(
                "outer budget must be at least 1".into(),
            ));
        }
        if let Some(t) = self.tau_override {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "tau override must be finite and > 0, got {t:e}"
                )));
            }
        }
        if self.inner_override == Some(0) {
            return Err(Error::InvalidParameter(
                "inner budget override must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Growth constants for the proximal subproblems: with subgradients of f
/// and g bounded by M on the domain and g bounded below by g_lb, every
/// subgradient ζ of F_k or G_k obeys
/// `‖ζ‖² ≤ L0² + L1·(value − optimal value)` with
/// `L0² = 9M² − 6ρ̂·g_lb` and `L1 = 6ρ̂`.
pub fn growth_constants(m_bound: f64, g_lb: f64, rho_hat: f64) -> (f64, f64) {
    (
        9.0 * m_bound * m_bound - 6.0 * rho_hat * g_lb,
        6.0 * rho_hat,
    )
}

/// Upper bound `D = sqrt(−8·g_lb/(ρ̂−ρ))` on the distance between the
/// anchor and the subproblem optimum, valid whenever the anchor is
/// feasible.
pub fn feasible_diameter(g_lb: f64, rho: f64, rho_hat: f64) -> Result<f64> {
    if !(rho_hat > rho) {
        return Err(Error::InvalidParameter(format!(
            "rho_hat ({rho_hat:e}) must exceed rho ({rho:e})"
        )));
    }
    if !(g_lb <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "constraint lower bound must be <= 0, got {g_lb:e}"
        )));
    }
    Ok((-8.0 * g_lb / (rho_hat - rho)).sqrt())
}

/// Uniform multiplier bound `B = (M + ρ̂·D)/σ` under the σ-strong
/// constraint qualification.
pub fn multiplier_bound(m_bound: f64, rho_hat: f64, diameter: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be finite and > 0, got {sigma:e}"
        )));
    }
    Ok((m_bound + rho_hat * diameter) / sigma)
}

/// A derived inner-solver schedule: switching threshold and certified
/// minimum iteration count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSchedule {
    pub tau: f64,
    pub inner_iters: usize,
}

/// Schedule targeting an ε-accurate balanced (Fritz-John) point:
/// `τ = (ρ̂−ρ)ε²/(4ρ̂(2ρ̂−ρ))` with the matching certified inner budget.
pub fn fj_parameters(
    rho: f64,
    rho_hat: f64,
    m_bound: f64,
    g_lb: f64,
    epsilon: f64,
) -> Result<SolverSchedule> {
    let tau = balanced_tau(rho, rho_hat, epsilon)?;
    certified_schedule(rho, rho_hat, m_bound, g_lb, tau)
}

/// Schedule targeting an ε-accurate multiplier (KKT) point: the balanced
/// threshold shrinks by `(1+B)²` with B the multiplier bound from σ.
pub fn kkt_parameters(
    rho: f64,
    rho_hat: f64,
    m_bound: f64,
    g_lb: f64,
    sigma: f64,
    epsilon: f64,
) -> Result<SolverSchedule> {
    let tau = balanced_tau(rho, rho_hat, epsilon)?;
    let d = feasible_diameter(g_lb, rho, rho_hat)?;
    let b = multiplier_bound(m_bound, rho_hat, d, sigma)?;
    certified_schedule(rho, rho_hat, m_bound, g_lb, tau / ((1.0 + b) * (1.0 + b)))
}

fn balanced_tau(rho: f64, rho_hat: f64, epsilon: f64) -> Result<f64> {
    if !(rho_hat > rho.max(1.0)) {
        return Err(Error::InvalidParameter(format!(
            "rho_hat ({rho_hat:e}) must exceed max(rho, 1) ({:e})",
            rho.max(1.0)
        )));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and > 0, got {epsilon:e}"
        )));
    }
    Ok((rho_hat - rho) * epsilon * epsilon / (4.0 * rho_hat * (2.0 * rho_hat - rho)))
}

fn certified_schedule(
    rho: f64,
    rho_hat: f64,
    m_bound: f64,
    g_lb: f64,
    tau: f64,
) -> Result<SolverSchedule> {
    let (l0sq, l1) = growth_constants(m_bound, g_lb, rho_hat);
    let d = feasible_diameter(g_lb, rho, rho_hat)?;
    let inner_iters = ssm::min_iterations(l0sq, l1, rho_hat - rho, tau, d)?;
    Ok(SolverSchedule { tau, inner_iters })
}

/// An oracle plus an anchored quadratic: value `h(x) + (w/2)‖x − c‖²`,
/// subgradient `ζ_h + w·(x − c)`.
pub struct ProxTerm {
    inner: SharedOracle,
    center: Array1<f64>,
    weight: f64,
}

impl Oracle for ProxTerm {
    fn eval(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        let (value, mut sub) = self.inner.eval(x);
        let mut dist_sq = 0.0;
        for i in 0..x.len() {
            let d = x[i] - self.center[i];
            dist_sq += d * d;
            sub[i] += self.weight * d;
        }
        (value + 0.5 * self.weight * dist_sq, sub)
    }
}

/// Builds the subproblem pair (F_k, G_k) anchored at `center` with weight
/// ρ̂; the constraint side aggregates the problem's components through
/// their max.
pub fn build_subproblem(
    problem: &ConstrainedProblem,
    center: &Array1<f64>,
    rho_hat: f64,
) -> (ProxTerm, ProxTerm) {
    let f_k = ProxTerm {
        inner: problem.objective_oracle(),
        center: center.clone(),
        weight: rho_hat,
    };
    let g_k = ProxTerm {
        inner: std::sync::Arc::new(problem.constraint_oracle()),
        center: center.clone(),
        weight: rho_hat,
    };
    (f_k, g_k)
}

/// Why the outer loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The outer budget was exhausted with the iterate still improving.
    Budget,
    /// The latest iterate violated `g ≤ 0` — the feasibility safety margin
    /// collapsed, which happens once steps become tiny.
    Infeasible,
    /// The objective stopped strictly decreasing.
    NonDecrease,
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::Budget => "budget",
            StopReason::Infeasible => "infeasible",
            StopReason::NonDecrease => "non_decrease",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Diagnostics of the inner solve launched from an iterate.
#[derive(Debug, Clone, Copy)]
pub struct InnerSummary {
    pub objective_steps: usize,
    pub constraint_steps: usize,
    pub degenerate: bool,
}

/// One outer iterate with everything measured at it.
#[derive(Debug, Clone)]
pub struct OuterRecord {
    pub k: usize,
    pub x: Array1<f64>,
    pub f_value: f64,
    pub g_value: f64,
    /// Distance to the next iterate; absent on the final record.
    pub step_norm: Option<f64>,
    pub fj: StationarityCertificate,
    pub kkt: StationarityCertificate,
    /// Diagnostics of the inner solve launched from this iterate; absent on
    /// the final record.
    pub inner: Option<InnerSummary>,
}

/// Parameters as actually used by a run, after resolving the config
/// against the problem constants and applying overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedParams {
    pub mode: Mode,
    pub rho: f64,
    pub rho_hat: f64,
    /// Strong convexity of the subproblems: ρ̂ − ρ.
    pub mu: f64,
    pub l0sq: f64,
    pub l1: f64,
    pub diameter: f64,
    /// Present when σ was supplied.
    pub multiplier_bound: Option<f64>,
    pub tau: f64,
    pub inner_iters: usize,
    /// Search cap for the multiplier certificate.
    pub lambda_cap: f64,
}

/// A finished run: the per-iterate records, why it stopped, and the
/// evaluation accounting.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<OuterRecord>,
    pub stop_reason: StopReason,
    pub params: ResolvedParams,
    /// One per inner step: the stepping subgradient evaluations,
    /// `completed inner solves × T`.
    pub subgradient_evals: u64,
    /// Two per inner step: the branch test plus the stepping evaluation.
    pub oracle_calls: u64,
}

impl Trajectory {
    pub fn final_record(&self) -> &OuterRecord {
        self.records.last().expect("a run records at least x0")
    }

    pub fn x_final(&self) -> &Array1<f64> {
        &self.final_record().x
    }

    /// Number of completed inner solves (= recorded iterates − 1).
    pub fn completed_outer_iters(&self) -> usize {
        self.records.len() - 1
    }

    /// Renders the run as CSV: one row per outer iterate, floats with 17
    /// significant digits, `stop_reason` filled only on the final row and
    /// `step_norm` empty there.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "k,f,g,step_norm,fj_residual,kkt_residual,lambda_hat,gamma0_hat,comp_slack,inner_T,stop_reason\n",
        );
        let last = self.records.len() - 1;
        for (i, rec) in self.records.iter().enumerate() {
            let step = rec.step_norm.map(float17).unwrap_or_default();
            let comp_slack = match self.params.mode {
                Mode::FritzJohn => rec.fj.comp_slack,
                Mode::Kkt => rec.kkt.comp_slack,
            };
            let stop = if i == last { self.stop_reason.label() } else { "" };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                rec.k,
                float17(rec.f_value),
                float17(rec.g_value),
                step,
                float17(rec.fj.residual),
                float17(rec.kkt.residual),
                float17(rec.kkt.lambda),
                float17(rec.fj.gamma0),
                float17(comp_slack),
                self.params.inner_iters,
                stop,
            ));
        }
        out
    }
}

fn resolve_params(problem: &ConstrainedProblem, config: &ProxConfig) -> Result<ResolvedParams> {
    let rho = problem.rho();
    config.validate(rho)?;
    let rho_hat = config.rho_hat;
    let m_bound = problem.m_bound();
    let g_lb = problem.g_lb();
    let (l0sq, l1) = growth_constants(m_bound, g_lb, rho_hat);
    let diameter = feasible_diameter(g_lb, rho, rho_hat)?;
    let bound = config
        .sigma
        .map(|sigma| multiplier_bound(m_bound, rho_hat, diameter, sigma))
        .transpose()?;

    let tau = match config.tau_override {
        Some(t) => t,
        None => {
            let base = balanced_tau(rho, rho_hat, config.epsilon)?;
            match config.mode {
                Mode::FritzJohn => base,
                Mode::Kkt => {
                    let b = bound.expect("validate() requires sigma in kkt mode");
                    base / ((1.0 + b) * (1.0 + b))
                }
            }
        }
    };
    let inner_iters = match config.inner_override {
        Some(t) => t,
        None => ssm::min_iterations(l0sq, l1, rho_hat - rho, tau, diameter)?,
    };

    Ok(ResolvedParams {
        mode: config.mode,
        rho,
        rho_hat,
        mu: rho_hat - rho,
        l0sq,
        l1,
        diameter,
        multiplier_bound: bound,
        tau,
        inner_iters,
        lambda_cap: bound.map_or(DEFAULT_LAMBDA_CAP, |b| b.max(DEFAULT_LAMBDA_CAP)),
    })
}

/// Runs the outer loop from the feasible start `x0`.
///
/// Every iterate is recorded with both stationarity certificates before the
/// stop test, so the trajectory always ends with the row that triggered the
/// stop (or the budget row).
pub fn run(
    problem: &ConstrainedProblem,
    config: &ProxConfig,
    x0: &Array1<f64>,
) -> Result<Trajectory> {
    let params = resolve_params(problem, config)?;
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: x0.len(),
        });
    }
    problem.domain().check_membership(x0, MEMBERSHIP_TOL)?;
    let g0 = problem.constraint_eval(x0).value;
    if g0 > 0.0 {
        return Err(Error::InfeasibleStart(g0));
    }

    let ssm_config = SsmConfig {
        tau: params.tau,
        max_iters: params.inner_iters,
        mu: params.mu,
        l1: params.l1,
        record_trajectory: false,
    };

    let mut records: Vec<OuterRecord> = Vec::with_capacity(config.max_outer + 1);
    let mut x = x0.clone();
    let mut f_prev = f64::INFINITY;
    let mut subgradient_evals = 0u64;
    let mut oracle_calls = 0u64;
    let stop_reason;

    loop {
        let k = records.len();
        let (f_value, zeta_f) = problem.objective_eval(&x);
        let g = problem.constraint_eval(&x);
        let fj = fj_residual_at(problem.domain(), &x, &zeta_f, &g.subgradient, g.value)?;
        let kkt = kkt_residual_at(
            problem.domain(),
            &x,
            &zeta_f,
            &g.subgradient,
            g.value,
            params.lambda_cap,
        )?;
        records.push(OuterRecord {
            k,
            x: x.clone(),
            f_value,
            g_value: g.value,
            step_norm: None,
            fj,
            kkt,
            inner: None,
        });

        // Stop tests, in order: infeasible iterate, stalled objective,
        // exhausted budget. x0 is exempt from the first two (it has no
        // predecessor and its feasibility was checked up front).
        if k > 0 && g.value > 0.0 {
            stop_reason = StopReason::Infeasible;
            break;
        }
        if k > 0 && f_value >= f_prev {
            stop_reason = StopReason::NonDecrease;
            break;
        }
        if k == config.max_outer {
            stop_reason = StopReason::Budget;
            break;
        }

        let (f_k, g_k) = build_subproblem(problem, &x, params.rho_hat);
        let inner = ssm::solve(&f_k, &g_k, problem.domain(), &x, &ssm_config)?;
        subgradient_evals += params.inner_iters as u64;
        oracle_calls += inner.oracle_calls;

        let step_norm = (&inner.z_bar - &x).mapv(|d| d * d).sum().sqrt();
        let rec = records.last_mut().expect("pushed above");
        rec.step_norm = Some(step_norm);
        rec.inner = Some(InnerSummary {
            objective_steps: inner.objective_steps,
            constraint_steps: inner.constraint_steps,
            degenerate: inner.degenerate,
        });

        f_prev = f_value;
        x = inner.z_bar;
    }

    Ok(Trajectory {
        records,
        stop_reason,
        params,
        subgradient_evals,
        oracle_calls,
    })
}

/// Polishes a final iterate into the nearby stationary point: one extra
/// inner solve anchored at `x_final` with ten times the configured inner
/// budget. The start is not required to sit below the switching threshold
/// (the solve begins with constraint steps if it does not).
pub fn refine_stationary(
    problem: &ConstrainedProblem,
    config: &ProxConfig,
    x_final: &Array1<f64>,
) -> Result<Array1<f64>> {
    let params = resolve_params(problem, config)?;
    if x_final.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: x_final.len(),
        });
    }
    let ssm_config = SsmConfig {
        tau: params.tau,
        max_iters: params.inner_iters.saturating_mul(10),
        mu: params.mu,
        l1: params.l1,
        record_trajectory: false,
    };
    let (f_k, g_k) = build_subproblem(problem, x_final, params.rho_hat);
    let result = ssm::solve_relaxed(&f_k, &g_k, problem.domain(), x_final, &ssm_config)?;
    Ok(result.z_bar)
}
