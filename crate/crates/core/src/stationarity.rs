//! Stationarity certificates at a point of a constrained problem.
//!
//! A point `x` of `min f(x) s.t. g(x) ≤ 0, x ∈ X` is measured in two ways,
//! both built from the distance of a combined subgradient to the negative
//! normal cone `−N_X(x)`:
//!
//! * **Balanced form** ([`fj_residual`]): minimize
//!   `dist(γ0·ζ_f + (1−γ0)·ζ_g, −N_X(x))` over the mixing weight
//!   `γ0 ∈ [0, 1]`. The weights may put everything on the constraint, so
//!   this residual can vanish even where no finite multiplier exists.
//! * **Multiplier form** ([`kkt_residual`]): minimize
//!   `dist(ζ_f + λ·ζ_g, −N_X(x))` over `λ ∈ [0, λ_cap]`, forcing unit
//!   weight on the objective. A minimizer stuck at the cap is flagged as
//!   multiplier divergence.
//!
//! Either certificate also reports the complementary-slackness value
//! (`|(1−γ0)·g(x)|` resp. `|λ·g(x)|`); a point passes the ε-test
//! ([`check_eps_point`]) when it is feasible, the residual is at most ε,
//! and the slack is at most ε².
//!
//! Both one-dimensional objectives are convex piecewise quadratics of the
//! scalar parameter (the squared cone distance is continuously
//! differentiable), so the weight search uses golden-section plus a local
//! quadratic polish, and the multiplier search bisects on the derivative
//! sign.

use ndarray::Array1;

use crate::domain::{BoxDomain, NegativeNormalCone, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::problem::ConstrainedProblem;

/// Upper end of the multiplier search interval when no tighter bound is
/// supplied. A minimizer at the cap is reported as divergence rather than a
/// finite multiplier estimate.
pub const DEFAULT_LAMBDA_CAP: f64 = 1e6;

/// Which stationarity form a certificate measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// Balanced weights `(γ0, 1−γ0)` over objective and constraint.
    FritzJohn,
    /// Unit objective weight with a multiplier `λ` on the constraint.
    Kkt,
}

/// The result of one stationarity measurement at a point.
#[derive(Debug, Clone, Copy)]
pub struct StationarityCertificate {
    pub kind: CertificateKind,
    /// Minimized distance of the combined subgradient to `−N_X(x)`.
    pub residual: f64,
    /// Objective weight. For the balanced form this is the minimizer
    /// `γ0 ∈ [0, 1]`; for the multiplier form it is the implied
    /// normalization `1/(1+λ)`.
    pub gamma0: f64,
    /// Constraint multiplier. For the multiplier form this is the minimizer
    /// `λ`; for the balanced form it is the implied ratio `(1−γ0)/γ0`
    /// (infinite when `γ0 = 0`).
    pub lambda: f64,
    /// `|constraint weight · g(x)|`: `|(1−γ0)·g(x)|` resp. `|λ·g(x)|`.
    pub comp_slack: f64,
    /// Whether `g(x) ≤ 0` at the measured point.
    pub feasible: bool,
    /// True when the multiplier search ended pinned at its cap, i.e. the
    /// distance was still decreasing in `λ` at the end of the interval.
    pub lambda_at_cap: bool,
}

/// True when the certificate passes the ε-test: feasible (`g_value ≤ 0`),
/// residual at most `ε`, complementary slackness at most `ε²`.
pub fn check_eps_point(cert: &StationarityCertificate, g_value: f64, epsilon: f64) -> bool {
    g_value <= 0.0 && cert.residual <= epsilon && cert.comp_slack <= epsilon * epsilon
}

/// Balanced-form residual at `x`, with `ζ_f`, `ζ_g` taken from the
/// problem's oracles (`ζ_g` from the active component of the constraint
/// max).
pub fn fj_residual(
    problem: &ConstrainedProblem,
    x: &Array1<f64>,
) -> Result<StationarityCertificate> {
    let (_, zeta_f) = problem.objective_eval(x);
    let g = problem.constraint_eval(x);
    fj_residual_at(problem.domain(), x, &zeta_f, &g.subgradient, g.value)
}

/// Balanced-form residual from explicit subgradients: minimizes
/// `dist(γ0·ζ_f + (1−γ0)·ζ_g, −N_X(x))` over `γ0 ∈ [0, 1]` to absolute
/// accuracy 1e−10.
pub fn fj_residual_at(
    domain: &BoxDomain,
    x: &Array1<f64>,
    zeta_f: &Array1<f64>,
    zeta_g: &Array1<f64>,
    g_value: f64,
) -> Result<StationarityCertificate> {
    check_dims(domain, x, zeta_f, zeta_g)?;
    let cone = domain.negative_normal_cone(x)?;

    let dist_sq = |gamma0: f64| {
        let mut total = 0.0;
        for (i, kind) in cone.kinds().iter().enumerate() {
            let v = gamma0 * zeta_f[i] + (1.0 - gamma0) * zeta_g[i];
            let r = kind.residual(v);
            total += r * r;
        }
        total
    };

    let (gamma0, best) = minimize_on_unit_interval(&dist_sq);
    let constraint_weight = 1.0 - gamma0;
    Ok(StationarityCertificate {
        kind: CertificateKind::FritzJohn,
        residual: best.sqrt(),
        gamma0,
        lambda: if gamma0 > 0.0 {
            constraint_weight / gamma0
        } else {
            f64::INFINITY
        },
        comp_slack: (constraint_weight * g_value).abs(),
        feasible: g_value <= 0.0,
        lambda_at_cap: false,
    })
}

/// Multiplier-form residual at `x` with the default search cap; subgradients
/// from the problem's oracles.
pub fn kkt_residual(
    problem: &ConstrainedProblem,
    x: &Array1<f64>,
) -> Result<StationarityCertificate> {
    let (_, zeta_f) = problem.objective_eval(x);
    let g = problem.constraint_eval(x);
    kkt_residual_at(
        problem.domain(),
        x,
        &zeta_f,
        &g.subgradient,
        g.value,
        DEFAULT_LAMBDA_CAP,
    )
}

/// Multiplier-form residual from explicit subgradients: minimizes
/// `dist(ζ_f + λ·ζ_g, −N_X(x))` over `λ ∈ [0, cap]` by bisection on the
/// derivative of the squared distance, checking the `λ = 0` boundary and
/// flagging a minimizer pinned at the cap.
pub fn kkt_residual_at(
    domain: &BoxDomain,
    x: &Array1<f64>,
    zeta_f: &Array1<f64>,
    zeta_g: &Array1<f64>,
    g_value: f64,
    cap: f64,
) -> Result<StationarityCertificate> {
    check_dims(domain, x, zeta_f, zeta_g)?;
    if !(cap > 0.0) || !cap.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "multiplier search cap must be finite and > 0, got {cap:e}"
        )));
    }
    let cone = domain.negative_normal_cone(x)?;

    let dist_sq = |lambda: f64| {
        let mut total = 0.0;
        for (i, kind) in cone.kinds().iter().enumerate() {
            let r = kind.residual(zeta_f[i] + lambda * zeta_g[i]);
            total += r * r;
        }
        total
    };
    // d/dλ of dist_sq: 2·⟨residual vector, ζ_g⟩ — continuous because the
    // squared distance to a convex set is continuously differentiable.
    let slope = |lambda: f64| {
        let mut total = 0.0;
        for (i, kind) in cone.kinds().iter().enumerate() {
            total += kind.residual(zeta_f[i] + lambda * zeta_g[i]) * zeta_g[i];
        }
        2.0 * total
    };

    let mut lambda_at_cap = false;
    let lambda = if slope(0.0) >= 0.0 {
        // Convexity: nondecreasing at the left end means λ = 0 is optimal.
        0.0
    } else if slope(cap) <= 0.0 {
        lambda_at_cap = true;
        cap
    } else {
        let (mut lo, mut hi) = (0.0f64, cap);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi.max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    };

    Ok(StationarityCertificate {
        kind: CertificateKind::Kkt,
        residual: dist_sq(lambda).sqrt(),
        gamma0: 1.0 / (1.0 + lambda),
        lambda,
        comp_slack: (lambda * g_value).abs(),
        feasible: g_value <= 0.0,
        lambda_at_cap,
    })
}

fn check_dims(
    domain: &BoxDomain,
    x: &Array1<f64>,
    zeta_f: &Array1<f64>,
    zeta_g: &Array1<f64>,
) -> Result<()> {
    for v in [x, zeta_f, zeta_g] {
        if v.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: v.len(),
            });
        }
    }
    domain.check_membership(x, MEMBERSHIP_TOL)
}

/// Minimizes a convex function on `[0, 1]`: golden-section search, then a
/// three-point quadratic polish around the incumbent, then a final sweep of
/// the candidates `{0, 1, golden-section point, polished point}` in that
/// order keeping the first strict minimum — so exact ties resolve to the
/// endpoints, letting degenerate cases report weight exactly 0 or 1.
fn minimize_on_unit_interval(phi: &dyn Fn(f64) -> f64) -> (f64, f64) {
    const INV_GOLDEN: f64 = 0.618_033_988_749_894_9; // (√5 − 1)/2

    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    for _ in 0..64 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_GOLDEN * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_GOLDEN * (b - a);
            fd = phi(d);
        }
    }
    let golden = 0.5 * (a + b);

    // Quadratic polish: fit a parabola through a stencil around the golden
    // point and jump to its vertex. The stencil width must stay well above
    // the bracket width so the fitted differences carry signal.
    let h = 1e-6;
    let center = golden.clamp(h, 1.0 - h);
    let (f_minus, f_mid, f_plus) = (phi(center - h), phi(center), phi(center + h));
    let curvature = f_plus - 2.0 * f_mid + f_minus;
    let polished = if curvature > 0.0 {
        (center - h * (f_plus - f_minus) / (2.0 * curvature)).clamp(0.0, 1.0)
    } else {
        golden
    };

    let mut best_arg = 0.0;
    let mut best_val = phi(0.0);
    for cand in [1.0, golden, polished] {
        let v = phi(cand);
        if v < best_val {
            best_val = v;
            best_arg = cand;
        }
    }
    (best_arg, best_val)
}

/// Exposed for the certificate property suite: distance of `v` to the
/// negative normal cone classified at `x`.
pub fn cone_distance(cone: &NegativeNormalCone, v: &Array1<f64>) -> f64 {
    cone.distance(v)
}
