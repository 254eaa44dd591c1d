//! Byte-stable float formatting shared by every text output.

/// Formats `x` with 17 significant digits in scientific notation.
///
/// Seventeen digits round-trip every finite `f64`. Non-finite values print as
/// `inf`, `-inf` or `nan`.
pub fn f17(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{:.16e}", x)
    }
}

/// Parses what [`f17`] prints.
pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        t => t.parse().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for &x in &[
            0.0,
            1.5,
            -2.25e-300,
            std::f64::consts::PI,
            1e300,
            f64::MIN_POSITIVE,
        ] {
            assert_eq!(parse_f64(&f17(x)).unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(f17(f64::INFINITY), "inf");
        assert!(parse_f64(&f17(f64::NAN)).unwrap().is_nan());
    }
}
