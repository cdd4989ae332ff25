//! First-order oracles.
//!
//! Every function the solver touches — objective, constraints, proximal
//! subproblems — is accessed the same way: hand the oracle a point, get back
//! the value and one subgradient. Nothing else about the function is ever
//! inspected, so the solver works uniformly for smooth and nonsmooth inputs.

use std::sync::Arc;

use ndarray::Array1;

/// A function presented through value-plus-subgradient evaluations.
///
/// `eval` returns `(h(x), ζ)` with `ζ` one Clarke subgradient of `h` at `x`.
/// At kinks the oracle must make a deterministic selection: evaluating twice
/// at the same point returns bitwise-identical results. Oracles are shared
/// across worker threads, hence the `Send + Sync` bounds.
pub trait Oracle: Send + Sync {
    /// Value and one subgradient at `x`.
    fn eval(&self, x: &Array1<f64>) -> (f64, Array1<f64>);
}

/// Shared, dynamically typed oracle handle.
pub type SharedOracle = Arc<dyn Oracle>;

impl Oracle for Arc<dyn Oracle> {
    fn eval(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        (**self).eval(x)
    }
}

/// Wraps a closure as an [`Oracle`]; convenient for tests and one-off
/// problems.
pub struct FnOracle<F>(pub F);

impl<F> Oracle for FnOracle<F>
where
    F: Fn(&Array1<f64>) -> (f64, Array1<f64>) + Send + Sync,
{
    fn eval(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        (self.0)(x)
    }
}

/// Affine function `coeffs·x + offset` with constant gradient `coeffs`.
pub struct LinearOracle {
    pub coeffs: Array1<f64>,
    pub offset: f64,
}

impl Oracle for LinearOracle {
    fn eval(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        (self.coeffs.dot(x) + self.offset, self.coeffs.clone())
    }
}

/// Scaled squared distance `scale·‖x − center‖² + offset`.
///
/// `2·scale`-strongly convex for `scale > 0`; gradient `2·scale·(x − center)`.
pub struct QuadraticOracle {
    pub center: Array1<f64>,
    pub scale: f64,
    pub offset: f64,
}

impl Oracle for QuadraticOracle {
    fn eval(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        let diff = x - &self.center;
        let value = self.scale * diff.dot(&diff) + self.offset;
        (value, diff * (2.0 * self.scale))
    }
}

/// Constant function with zero gradient; models constraints that never bind.
pub struct ConstantOracle {
    pub value: f64,
    pub dim: usize,
}

impl Oracle for ConstantOracle {
    fn eval(&self, _x: &Array1<f64>) -> (f64, Array1<f64>) {
        (self.value, Array1::zeros(self.dim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn quadratic_oracle_value_and_gradient() {
        let q = QuadraticOracle {
            center: array![1.0, -1.0],
            scale: 0.5,
            offset: 2.0,
        };
        let (v, g) = q.eval(&array![3.0, 0.0]);
        // 0.5·(4 + 1) + 2 = 4.5; gradient = (x − c) = (2, 1).
        assert_eq!(v, 4.5);
        assert_eq!(g, array![2.0, 1.0]);
    }

    #[test]
    fn linear_oracle_constant_gradient() {
        let l = LinearOracle {
            coeffs: array![1.0, -2.0],
            offset: 0.5,
        };
        let (v, g) = l.eval(&array![2.0, 1.0]);
        assert_eq!(v, 0.5);
        assert_eq!(g, array![1.0, -2.0]);
    }

    #[test]
    fn fn_oracle_delegates() {
        let o = FnOracle(|x: &Array1<f64>| (x[0] * x[0], array![2.0 * x[0]]));
        let (v, g) = o.eval(&array![3.0]);
        assert_eq!(v, 9.0);
        assert_eq!(g, array![6.0]);
    }
}
