//! Problem instances: the generated sparse-phase-retrieval family, its SCAD
//! budget constraint, and the closed-form verification catalog.

pub mod catalog;
pub mod scad;
pub mod spr;

pub use catalog::{convex_test_problem, instance, CatalogId, CatalogInstance};
pub use scad::{scad, scad_gradient, ScadConstraint};
pub use spr::{SprInstance, SprObjective};

/// The SplitMix64 mixing function: one additive step of the golden-ratio
/// increment followed by the standard two-round finalizer. Bijective on
/// `u64` and statistically well mixed, which makes it a cheap way to spread
/// structured seed inputs (small integers, near-collisions) across the full
/// state space.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and a stream index,
/// so one user-facing seed can feed several uncorrelated generators (the
/// instance itself, its start point, replicate workers) without manual seed
/// bookkeeping. Both inputs pass through [`splitmix64`], so consecutive
/// bases or streams land far apart.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base.wrapping_add(splitmix64(stream)))
}
