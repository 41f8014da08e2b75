//! Number formatting shared by every text output.

/// Formats with 17 significant digits, enough for a lossless `f64` round trip.
pub fn f64_17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1.618_033_988_749_895, 0.0, 1e300] {
            let s = f64_17(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }
}
