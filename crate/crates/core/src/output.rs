//! Shared formatting for CSV and report output.

/// Round-trippable scientific notation with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}
