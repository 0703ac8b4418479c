/// Formats with 17 significant digits, enough to round-trip any f64.
pub(crate) fn g17(x: f64) -> String {
    format!("{:.16e}", x)
}
