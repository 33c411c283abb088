//! Fixed numeric formatting for CSV and text outputs.

/// 12 significant digits, lowercase scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

#[cfg(test)]
mod tests {
    #[test]
    fn twelve_digits() {
        assert_eq!(super::sci(1.5), "1.50000000000e0");
        assert_eq!(super::sci(-2.0e-7), "-2.00000000000e-7");
    }
}
