//! Box domains and their geometry.
//!
//! The solver restricts its feasible domain to axis-aligned boxes (with the
//! free space `ℝⁿ` as the all-infinite box). Everything the algorithms need
//! from the domain is closed form here: Euclidean projection is a
//! coordinatewise clamp, and the distance from a vector to the negative
//! normal cone `−N_X(x)` decomposes coordinatewise by the sign structure of
//! the active bounds.

use ndarray::Array1;
use rand::Rng;

use crate::error::{Error, Result};

/// Absolute tolerance for classifying a coordinate as sitting on a bound
/// when forming normal cones.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Absolute tolerance for domain membership checks; projected iterates can
/// drift this far outside the box through floating-point rounding.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Axis-aligned box `{ x : lower ≤ x ≤ upper }` with `±∞` bounds allowed per
/// coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Array1<f64>,
    upper: Array1<f64>,
}

/// Position of a coordinate relative to its bounds, which determines that
/// coordinate's slice of the normal cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordKind {
    /// Strictly between both bounds: the normal cone slice is `{0}`.
    Interior,
    /// On the lower bound only: `−N` is the half-line `[0, ∞)`.
    AtLower,
    /// On the upper bound only: `−N` is the half-line `(−∞, 0]`.
    AtUpper,
    /// On both bounds (degenerate interval): `−N` is the whole line.
    Pinned,
}

impl CoordKind {
    /// Residual of `v` after projecting onto this coordinate's slice of
    /// `−N_X(x)`; zero exactly when `v` already lies in the slice.
    pub fn residual(self, v: f64) -> f64 {
        match self {
            CoordKind::Interior => v,
            CoordKind::AtUpper => v.max(0.0),
            CoordKind::AtLower => v.min(0.0),
            CoordKind::Pinned => 0.0,
        }
    }
}

/// The negative normal cone `−N_X(x)` of a box at a fixed point, classified
/// once so that many vectors can be measured against it cheaply.
#[derive(Debug, Clone)]
pub struct NegativeNormalCone {
    kinds: Vec<CoordKind>,
}

impl NegativeNormalCone {
    /// Per-coordinate classification of the base point.
    pub fn kinds(&self) -> &[CoordKind] {
        &self.kinds
    }

    /// Squared Euclidean distance from `v` to the cone.
    pub fn distance_sq(&self, v: &Array1<f64>) -> f64 {
        self.kinds
            .iter()
            .zip(v.iter())
            .map(|(kind, &vi)| {
                let r = kind.residual(vi);
                r * r
            })
            .sum()
    }

    /// Euclidean distance from `v` to the cone.
    pub fn distance(&self, v: &Array1<f64>) -> f64 {
        self.distance_sq(v).sqrt()
    }
}

impl BoxDomain {
    /// Builds a box from bound vectors with `lower ≤ upper` coordinatewise;
    /// `±∞` entries are allowed.
    pub fn new(lower: Array1<f64>, upper: Array1<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (i, (&lo, &hi)) in lower.iter().zip(upper.iter()).enumerate() {
            if !(lo <= hi) {
                return Err(Error::InvalidParameter(format!(
                    "box bounds out of order at coordinate {i}: lower {lo:e} > upper {hi:e}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The whole of `ℝⁿ` as the all-infinite box.
    pub fn free(n: usize) -> Self {
        Self {
            lower: Array1::from_elem(n, f64::NEG_INFINITY),
            upper: Array1::from_elem(n, f64::INFINITY),
        }
    }

    /// The symmetric box `[−half_width, half_width]ⁿ`.
    pub fn symmetric(n: usize, half_width: f64) -> Self {
        assert!(
            half_width > 0.0 && half_width.is_finite(),
            "half_width must be positive and finite"
        );
        Self {
            lower: Array1::from_elem(n, -half_width),
            upper: Array1::from_elem(n, half_width),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &Array1<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &Array1<f64> {
        &self.upper
    }

    /// True when every bound is infinite (the free domain).
    pub fn is_free(&self) -> bool {
        self.lower.iter().all(|lo| lo.is_infinite()) && self.upper.iter().all(|hi| hi.is_infinite())
    }

    fn check_dim(&self, x: &Array1<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Euclidean projection onto the box: coordinatewise clamp. Idempotent
    /// and nonexpansive.
    pub fn project(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        self.check_dim(x)?;
        let mut out = x.clone();
        self.project_mut(&mut out);
        Ok(out)
    }

    /// In-place projection; the allocation-free form used by inner loops.
    /// The dimension of `x` must already match.
    pub fn project_mut(&self, x: &mut Array1<f64>) {
        debug_assert_eq!(x.len(), self.dim());
        for ((xi, &lo), &hi) in x.iter_mut().zip(self.lower.iter()).zip(self.upper.iter()) {
            *xi = xi.clamp(lo, hi);
        }
    }

    /// True when `x` lies within `tol` of the box coordinatewise.
    pub fn contains(&self, x: &Array1<f64>, tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter())
                .zip(self.upper.iter())
                .all(|((&xi, &lo), &hi)| xi >= lo - tol && xi <= hi + tol)
    }

    /// Checks membership within `tol` and reports the first violating
    /// coordinate on failure.
    pub fn check_membership(&self, x: &Array1<f64>, tol: f64) -> Result<()> {
        self.check_dim(x)?;
        for (i, ((&xi, &lo), &hi)) in x
            .iter()
            .zip(self.lower.iter())
            .zip(self.upper.iter())
            .enumerate()
        {
            if !(xi >= lo - tol && xi <= hi + tol) {
                return Err(Error::OutsideDomain {
                    index: i,
                    value: xi,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(())
    }

    /// Classifies the negative normal cone `−N_X(x)` at `x`, which must lie
    /// in the box within [`MEMBERSHIP_TOL`]. Coordinates within
    /// [`BOUNDARY_TOL`] of a bound count as active.
    pub fn negative_normal_cone(&self, x: &Array1<f64>) -> Result<NegativeNormalCone> {
        self.check_membership(x, MEMBERSHIP_TOL)?;
        let kinds = x
            .iter()
            .zip(self.lower.iter())
            .zip(self.upper.iter())
            .map(|((&xi, &lo), &hi)| {
                let at_lower = lo.is_finite() && (xi - lo).abs() <= BOUNDARY_TOL;
                let at_upper = hi.is_finite() && (xi - hi).abs() <= BOUNDARY_TOL;
                match (at_lower, at_upper) {
                    (true, true) => CoordKind::Pinned,
                    (true, false) => CoordKind::AtLower,
                    (false, true) => CoordKind::AtUpper,
                    (false, false) => CoordKind::Interior,
                }
            })
            .collect();
        Ok(NegativeNormalCone { kinds })
    }

    /// Euclidean distance from `v` to `−N_X(x)`.
    ///
    /// Coordinatewise: an interior coordinate contributes `v_i²`, a
    /// coordinate on its upper bound contributes `max(v_i, 0)²`, one on its
    /// lower bound contributes `min(v_i, 0)²`; the result is the square root
    /// of the sum. Zero exactly when `−v` is a valid normal direction at `x`.
    pub fn dist_neg_normal_cone(&self, x: &Array1<f64>, v: &Array1<f64>) -> Result<f64> {
        self.check_dim(v)?;
        Ok(self.negative_normal_cone(x)?.distance(v))
    }

    /// Uniform sample from the box; requires finite bounds.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Array1<f64> {
        Array1::from_iter(self.lower.iter().zip(self.upper.iter()).map(|(&lo, &hi)| {
            assert!(
                lo.is_finite() && hi.is_finite(),
                "uniform sampling requires finite bounds"
            );
            lo + (hi - lo) * rng.random::<f64>()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn project_fixes_interior_points() {
        let b = BoxDomain::symmetric(2, 10.0);
        assert_eq!(b.project(&array![3.0, -4.0]).unwrap(), array![3.0, -4.0]);
    }

    #[test]
    fn project_clamps_coordinatewise() {
        let b = BoxDomain::symmetric(2, 10.0);
        assert_eq!(b.project(&array![12.0, -15.0]).unwrap(), array![10.0, -10.0]);
    }

    #[test]
    fn project_is_identity_on_free_domain() {
        let b = BoxDomain::free(3);
        assert_eq!(
            b.project(&array![7.0, 7.0, 7.0]).unwrap(),
            array![7.0, 7.0, 7.0]
        );
    }

    #[test]
    fn project_rejects_dimension_mismatch() {
        let b = BoxDomain::symmetric(2, 1.0);
        assert!(matches!(
            b.project(&array![0.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn dist_is_norm_at_interior_points() {
        let b = BoxDomain::symmetric(2, 10.0);
        let d = b
            .dist_neg_normal_cone(&array![0.0, 0.0], &array![3.0, 4.0])
            .unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn dist_vanishes_for_inward_vector_at_upper_bound() {
        let b = BoxDomain::symmetric(1, 10.0);
        let d = b
            .dist_neg_normal_cone(&array![10.0], &array![-2.0])
            .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn dist_keeps_outward_component_at_upper_bound() {
        let b = BoxDomain::symmetric(1, 10.0);
        let d = b.dist_neg_normal_cone(&array![10.0], &array![2.0]).unwrap();
        assert_eq!(d, 2.0);
    }

    #[test]
    fn dist_rejects_points_outside_the_box() {
        let b = BoxDomain::symmetric(1, 10.0);
        let err = b.dist_neg_normal_cone(&array![10.5], &array![1.0]);
        assert!(matches!(err, Err(Error::OutsideDomain { index: 0, .. })));
    }

    #[test]
    fn pinned_coordinates_absorb_everything() {
        // Degenerate box [2,2]: the normal cone at 2 is the whole line.
        let b = BoxDomain::new(array![2.0], array![2.0]).unwrap();
        let d = b
            .dist_neg_normal_cone(&array![2.0], &array![-7.0])
            .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn new_rejects_crossed_bounds() {
        assert!(BoxDomain::new(array![1.0], array![0.0]).is_err());
    }
}
