//! Text formatting for floating-point values in machine-readable output.
//!
//! Every float written to CSV or JSON reports goes through [`float17`]:
//! scientific notation with 17 significant digits, enough to round-trip any
//! `f64` exactly, so repeated runs diff byte-for-byte.

/// Formats `x` in scientific notation with 17 significant digits
/// (1 leading + 16 fractional).
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}
