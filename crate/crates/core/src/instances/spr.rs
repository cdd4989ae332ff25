//! Sparse phase retrieval: recover a planted sparse signal from noisy
//! magnitude-squared linear measurements, with sparsity enforced through
//! the SCAD budget constraint.
//!
//! The data model: a Gaussian sensing matrix `A` (rows `a_i`), a planted
//! signal `x*` with a fixed number of nonzeros of magnitude in [5, 10], and
//! measurements `b_i² = (a_iᵀx*)² + η_i` with standard normal noise (kept
//! as generated even when a noisy value goes negative — only `b²` is ever
//! consumed). The problem solved is
//!
//! ```text
//! min (1/m) Σ_i |(a_iᵀx)² − b_i²|   s.t.   Σ_j s(x_j) ≤ p,   x ∈ [−10,10]ⁿ
//! ```
//!
//! Everything about an instance is a deterministic function of its seed;
//! the draw order (A row-major, then support positions, then signal values,
//! then noise, then the bound-estimation samples) is part of the format and
//! must not change, and none of it depends on the budget `p`, so sweeps
//! over `p` can hold the instance fixed per seed.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::numfmt::float17;
use crate::oracle::Oracle;
use crate::problem::{ConstrainedProblem, ProblemConstants};

use super::derive_seed;
use super::scad::{scad, ScadConstraint};

/// Attempts at drawing a feasible start before giving up.
const X0_ATTEMPTS: usize = 100;
/// Samples used to estimate the subgradient-norm bound.
const BOUND_SAMPLES: usize = 10_000;
/// Safety factor applied to the sampled maximum.
const BOUND_INFLATION: f64 = 1.2;
/// Stream index (relative to the instance seed) for drawing starts.
const X0_STREAM: u64 = 1;

/// The measurement-fit objective `(1/m) Σ |(a_iᵀx)² − b_i²|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SprObjective {
    /// Sensing matrix, one measurement vector per row.
    pub a: Array2<f64>,
    /// Squared (noisy) measurement magnitudes.
    pub b_sq: Array1<f64>,
}

impl Oracle for SprObjective {
    /// Value as defined above; subgradient `(1/m) Σ s_i·2(a_iᵀx)·a_i` with
    /// `s_i = sign((a_iᵀx)² − b_i²)` and sign(0) taken as 0.
    fn eval(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        let m = self.a.nrows() as f64;
        let mut value = 0.0;
        let mut sub = Array1::<f64>::zeros(x.len());
        for (i, row) in self.a.rows().into_iter().enumerate() {
            let t = row.dot(x);
            let r = t * t - self.b_sq[i];
            value += r.abs();
            let s = if r > 0.0 {
                1.0
            } else if r < 0.0 {
                -1.0
            } else {
                0.0
            };
            if s != 0.0 {
                sub.scaled_add(s * 2.0 * t / m, &row);
            }
        }
        (value / m, sub)
    }
}

/// One generated problem instance, fully determined by
/// `(n, m, nnz, p, seed)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SprInstance {
    pub n: usize,
    pub m: usize,
    /// SCAD budget `p`; not involved in any random draw.
    pub p: f64,
    pub seed: u64,
    /// Weak-convexity modulus recorded for the solver.
    pub rho: f64,
    /// Default proximal weight recorded for the solver.
    pub rho_hat: f64,
    /// Inflated sampled bound on subgradient norms over the box, for both
    /// the objective and the constraint.
    pub m_estimate: f64,
    /// Sensing matrix (m × n).
    pub a: Array2<f64>,
    /// Noisy squared measurements; the noise is recoverable as
    /// `b_sq − (A·x_star)²`.
    pub b_sq: Array1<f64>,
    /// Planted signal.
    pub x_star: Array1<f64>,
}

impl SprInstance {
    /// Generates an instance: Gaussian `A`, `nnz` planted entries of
    /// magnitude uniform in [5, 10] with random signs at positions chosen
    /// by a partial shuffle, standard normal measurement noise, and the
    /// sampled subgradient bound.
    pub fn generate(n: usize, m: usize, nnz: usize, p: f64, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "instance dimensions must be positive, got n = {n}, m = {m}"
            )));
        }
        if nnz > n {
            return Err(Error::InvalidParameter(format!(
                "nonzero count {nnz} exceeds dimension {n}"
            )));
        }
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "budget p must be finite and >= 0, got {p:e}"
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut a = Array2::<f64>::zeros((m, n));
        for i in 0..m {
            for j in 0..n {
                a[[i, j]] = rng.sample(StandardNormal);
            }
        }

        // Support positions: the first nnz entries of a partial
        // Fisher-Yates shuffle of 0..n.
        let mut perm: Vec<usize> = (0..n).collect();
        for i in 0..nnz {
            let j = rng.random_range(i..n);
            perm.swap(i, j);
        }

        let mut x_star = Array1::<f64>::zeros(n);
        for &idx in &perm[..nnz] {
            let magnitude = 5.0 + 5.0 * rng.random::<f64>();
            let negative: bool = rng.random();
            x_star[idx] = if negative { -magnitude } else { magnitude };
        }

        let mut b_sq = Array1::<f64>::zeros(m);
        for i in 0..m {
            let t = a.row(i).dot(&x_star);
            let eta: f64 = rng.sample(StandardNormal);
            b_sq[i] = t * t + eta;
        }

        // Subgradient-norm bound: the sampled maximum over the box, across
        // both oracles, inflated for safety. The constraint subgradient
        // does not depend on p, so neither does the estimate.
        let objective = SprObjective {
            a: a.clone(),
            b_sq: b_sq.clone(),
        };
        let constraint = ScadConstraint { budget: 0.0 };
        let domain = BoxDomain::symmetric(n, 10.0);
        let mut worst = 0.0f64;
        for _ in 0..BOUND_SAMPLES {
            let x = domain.sample_uniform(&mut rng);
            let (_, zf) = objective.eval(&x);
            let (_, zg) = constraint.eval(&x);
            worst = worst
                .max(zf.dot(&zf).sqrt())
                .max(zg.dot(&zg).sqrt());
        }

        Ok(SprInstance {
            n,
            m,
            p,
            seed,
            rho: 3.0,
            rho_hat: 6.0,
            m_estimate: BOUND_INFLATION * worst,
            a,
            b_sq,
            x_star,
        })
    }

    /// The box `[−10, 10]ⁿ` the experiments run over.
    pub fn domain(&self) -> BoxDomain {
        BoxDomain::symmetric(self.n, 10.0)
    }

    /// The objective oracle over this instance's data.
    pub fn objective(&self) -> SprObjective {
        SprObjective {
            a: self.a.clone(),
            b_sq: self.b_sq.clone(),
        }
    }

    /// The budget constraint oracle.
    pub fn constraint(&self) -> ScadConstraint {
        ScadConstraint { budget: self.p }
    }

    /// Assembles the solver-facing problem: the objective is nonnegative
    /// (f_lb = 0) and the penalty sum is nonnegative, so g ≥ −p exactly
    /// (g_lb = −p).
    pub fn problem(&self) -> Result<ConstrainedProblem> {
        ConstrainedProblem::new(
            std::sync::Arc::new(self.objective()),
            vec![std::sync::Arc::new(self.constraint())],
            self.domain(),
            ProblemConstants {
                rho: self.rho,
                m_bound: self.m_estimate,
                f_lb: 0.0,
                g_lb: -self.p,
            },
        )
    }

    /// Draws a feasible start: entries i.i.d. normal with standard
    /// deviation 0.1, resampled until the budget constraint holds, up to
    /// [`X0_ATTEMPTS`] times.
    pub fn sample_x0<R: Rng>(&self, rng: &mut R) -> Result<Array1<f64>> {
        for _ in 0..X0_ATTEMPTS {
            let x0 = Array1::from_shape_fn(self.n, |_| {
                0.1 * rng.sample::<f64, _>(StandardNormal)
            });
            let penalty: f64 = x0.iter().map(|&u| scad(u)).sum();
            if penalty - self.p <= 0.0 {
                return Ok(x0);
            }
        }
        Err(Error::NoFeasibleStart {
            attempts: X0_ATTEMPTS,
        })
    }

    /// As [`sample_x0`](Self::sample_x0) with this instance's dedicated
    /// start stream, so independent callers agree on the default start.
    pub fn default_x0(&self) -> Result<Array1<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, X0_STREAM));
        self.sample_x0(&mut rng)
    }

    /// Serializes the instance as a single JSON document with all floats at
    /// 17 significant digits, so equal instances produce equal bytes.
    pub fn to_json(&self) -> String {
        let join = |values: &mut dyn Iterator<Item = f64>| {
            values.map(float17).collect::<Vec<_>>().join(",")
        };
        let a_flat = join(&mut self.a.iter().copied());
        let b_sq = join(&mut self.b_sq.iter().copied());
        let x_star = join(&mut self.x_star.iter().copied());
        format!(
            concat!(
                "{{\n",
                "  \"n\": {},\n",
                "  \"m\": {},\n",
                "  \"p\": {},\n",
                "  \"seed\": {},\n",
                "  \"rho\": {},\n",
                "  \"rho_hat\": {},\n",
                "  \"M_estimate\": {},\n",
                "  \"A\": [{}],\n",
                "  \"b_sq\": [{}],\n",
                "  \"x_star\": [{}]\n",
                "}}\n"
            ),
            self.n,
            self.m,
            float17(self.p),
            self.seed,
            float17(self.rho),
            float17(self.rho_hat),
            float17(self.m_estimate),
            a_flat,
            b_sq,
            x_star,
        )
    }

    /// Parses an instance from the JSON document format of
    /// [`to_json`](Self::to_json) (`A` row-major).
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            n: usize,
            m: usize,
            p: f64,
            seed: u64,
            rho: f64,
            rho_hat: f64,
            #[serde(rename = "M_estimate")]
            m_estimate: f64,
            #[serde(rename = "A")]
            a: Vec<f64>,
            b_sq: Vec<f64>,
            x_star: Vec<f64>,
        }

        let repr: Repr =
            serde_json::from_str(text).map_err(|e| Error::MalformedInstance(e.to_string()))?;
        if repr.a.len() != repr.n * repr.m {
            return Err(Error::MalformedInstance(format!(
                "matrix has {} entries, expected m·n = {}",
                repr.a.len(),
                repr.n * repr.m
            )));
        }
        if repr.b_sq.len() != repr.m {
            return Err(Error::MalformedInstance(format!(
                "b_sq has {} entries, expected m = {}",
                repr.b_sq.len(),
                repr.m
            )));
        }
        if repr.x_star.len() != repr.n {
            return Err(Error::MalformedInstance(format!(
                "x_star has {} entries, expected n = {}",
                repr.x_star.len(),
                repr.n
            )));
        }
        let a = Array2::from_shape_vec((repr.m, repr.n), repr.a)
            .map_err(|e| Error::MalformedInstance(e.to_string()))?;
        Ok(SprInstance {
            n: repr.n,
            m: repr.m,
            p: repr.p,
            seed: repr.seed,
            rho: repr.rho,
            rho_hat: repr.rho_hat,
            m_estimate: repr.m_estimate,
            a,
            b_sq: Array1::from_vec(repr.b_sq),
            x_star: Array1::from_vec(repr.x_star),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn one_dimensional_hand_check() {
        // a = (1), b² = 4, x = 1: residual 1 − 4 = −3, so value 3 and
        // subgradient −1·2·1·1 = −2.
        let f = SprObjective {
            a: array![[1.0]],
            b_sq: array![4.0],
        };
        let (value, sub) = f.eval(&array![1.0]);
        assert_eq!(value, 3.0);
        assert_eq!(sub, array![-2.0]);
    }

    #[test]
    fn exact_measurements_vanish_at_the_planted_signal() {
        let inst = SprInstance::generate(12, 9, 3, 9.0, 7).unwrap();
        // Replace the noisy measurements with exact ones.
        let mut b_sq = Array1::zeros(inst.m);
        for i in 0..inst.m {
            let t = inst.a.row(i).dot(&inst.x_star);
            b_sq[i] = t * t;
        }
        let f = SprObjective {
            a: inst.a.clone(),
            b_sq,
        };
        let (value, sub) = f.eval(&inst.x_star);
        assert_eq!(value, 0.0);
        // Every sign is 0 at an exact fit, so the selection is the zero
        // vector.
        assert!(sub.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn zero_residual_coordinate_uses_sign_zero() {
        // x = 2, b² = 4: residual exactly 0 → no contribution.
        let f = SprObjective {
            a: array![[1.0], [2.0]],
            b_sq: array![4.0, 1.0],
        };
        let (value, sub) = f.eval(&array![2.0]);
        // Second term: (2·2)² − 1 = 15, sign +, sub = 2·4·2/2 = 8.
        assert_eq!(value, 7.5);
        assert_eq!(sub, array![8.0]);
    }

    #[test]
    fn subgradient_matches_finite_differences_at_smooth_points() {
        use rand::SeedableRng;
        let inst = SprInstance::generate(6, 8, 2, 6.0, 11).unwrap();
        let f = inst.objective();
        let domain = inst.domain();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let h = 1e-6;
        let mut accepted = 0;
        while accepted < 100 {
            let x = domain.sample_uniform(&mut rng);
            // Keep only points safely away from the absolute-value kinks.
            let near_kink = (0..inst.m).any(|i| {
                let t = f.a.row(i).dot(&x);
                (t * t - f.b_sq[i]).abs() < 1e-2
            });
            if near_kink {
                continue;
            }
            accepted += 1;
            let (_, sub) = f.eval(&x);
            for j in 0..inst.n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (f.eval(&xp).0 - f.eval(&xm).0) / (2.0 * h);
                let scale = sub[j].abs().max(1.0);
                assert!(
                    (fd - sub[j]).abs() <= 1e-4 * scale,
                    "coordinate {j}: fd {fd} vs {}",
                    sub[j]
                );
            }
        }
    }

    #[test]
    fn generation_is_deterministic_and_p_independent() {
        let a = SprInstance::generate(10, 8, 3, 9.0, 42).unwrap();
        let b = SprInstance::generate(10, 8, 3, 9.0, 42).unwrap();
        assert_eq!(a, b);

        // Different budget, same randomness: only p differs.
        let c = SprInstance::generate(10, 8, 3, 21.0, 42).unwrap();
        assert_eq!(a.a, c.a);
        assert_eq!(a.b_sq, c.b_sq);
        assert_eq!(a.x_star, c.x_star);
        assert_eq!(a.m_estimate, c.m_estimate);
        assert_eq!(c.p, 21.0);

        let d = SprInstance::generate(10, 8, 3, 9.0, 43).unwrap();
        assert_ne!(a.a, d.a);
    }

    #[test]
    fn planted_signal_shape() {
        let inst = SprInstance::generate(30, 30, 8, 24.0, 5).unwrap();
        let nonzeros: Vec<f64> = inst
            .x_star
            .iter()
            .copied()
            .filter(|&v| v != 0.0)
            .collect();
        assert_eq!(nonzeros.len(), 8);
        for v in nonzeros {
            assert!((5.0..=10.0).contains(&v.abs()), "magnitude {v}");
        }
        // The noise recovered from the measurements is standard normal
        // scale: comfortably bounded for m = 30 draws.
        for i in 0..inst.m {
            let t = inst.a.row(i).dot(&inst.x_star);
            let eta = inst.b_sq[i] - t * t;
            assert!(eta.abs() < 8.0, "noise {eta}");
        }
        assert!(inst.m_estimate > 0.0);
    }

    #[test]
    fn generation_rejects_bad_shapes() {
        assert!(SprInstance::generate(0, 5, 0, 1.0, 1).is_err());
        assert!(SprInstance::generate(5, 0, 0, 1.0, 1).is_err());
        assert!(SprInstance::generate(5, 5, 6, 1.0, 1).is_err());
        assert!(SprInstance::generate(5, 5, 2, -1.0, 1).is_err());
    }

    #[test]
    fn start_sampling_is_feasible_and_deterministic() {
        use rand::SeedableRng;
        let inst = SprInstance::generate(30, 30, 8, 24.0, 5).unwrap();
        let x0 = inst.default_x0().unwrap();
        let again = inst.default_x0().unwrap();
        assert_eq!(x0, again);
        let (g0, _) = inst.constraint().eval(&x0);
        assert!(g0 <= 0.0, "g(x0) = {g0}");
        // Entries are small draws (std 0.1).
        assert!(x0.iter().all(|&v| v.abs() < 1.0));

        // A vanishing budget makes every draw infeasible.
        let tight = SprInstance::generate(30, 30, 8, 1e-4, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            tight.sample_x0(&mut rng),
            Err(Error::NoFeasibleStart { attempts: 100 })
        ));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let inst = SprInstance::generate(7, 5, 2, 6.0, 123).unwrap();
        let text = inst.to_json();
        assert_eq!(text, inst.to_json());
        let back = SprInstance::from_json(&text).unwrap();
        assert_eq!(inst, back);

        assert!(SprInstance::from_json("{").is_err());
        // Length mismatch in the matrix is caught.
        let broken = text.replace("\"m\": 5", "\"m\": 4");
        assert!(matches!(
            SprInstance::from_json(&broken),
            Err(Error::MalformedInstance(_))
        ));
    }
}
