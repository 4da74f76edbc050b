//! Round-trip-safe number formatting for CSV output.

/// Formats `x` in scientific notation with 17 significant digits, enough to
/// recover the exact `f64` on parsing.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}
