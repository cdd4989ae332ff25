//! The SCAD sparsity penalty and the budget constraint built from it.
//!
//! The scalar penalty grows linearly near zero, bends over quadratically,
//! and saturates at 3:
//!
//! ```text
//! s(u) = 2|u|             |u| ≤ 1
//!        −u² + 4|u| − 1   1 < |u| ≤ 2
//!        3                |u| > 2
//! ```
//!
//! It is even, continuously differentiable away from 0, and exactly
//! 2-weakly convex (the middle piece's −u² is the worst curvature), so
//! `s(u) + u²` is convex. Summed over coordinates against a budget `p`, it
//! yields the sparsity constraint `g(x) = Σ s(x_i) − p ≤ 0`, which caps the
//! number of entries of magnitude above 2 at ⌊p/3⌋.

use ndarray::Array1;

use crate::oracle::Oracle;

/// Scalar SCAD penalty value.
pub fn scad(u: f64) -> f64 {
    let a = u.abs();
    if a <= 1.0 {
        2.0 * a
    } else if a <= 2.0 {
        -a * a + 4.0 * a - 1.0
    } else {
        3.0
    }
}

/// A gradient selection for the scalar penalty: the derivative where it
/// exists, and 0 at the kink `u = 0` (a valid choice from the interval
/// [−2, 2] there).
pub fn scad_gradient(u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let a = u.abs();
    let slope = if a <= 1.0 {
        2.0
    } else if a <= 2.0 {
        -2.0 * a + 4.0
    } else {
        0.0
    };
    slope * u.signum()
}

/// The budget constraint `g(x) = Σ_i s(x_i) − p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScadConstraint {
    /// The sparsity budget `p`.
    pub budget: f64,
}

impl Oracle for ScadConstraint {
    fn eval(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        let value = x.iter().map(|&u| scad(u)).sum::<f64>() - self.budget;
        let subgradient = x.mapv(scad_gradient);
        (value, subgradient)
    }
}
