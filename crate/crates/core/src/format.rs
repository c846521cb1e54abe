/// Shortest decimal representation of `x` rounded to 12 significant digits.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    // avoid printing "-0"
    if rounded == 0.0 {
        return "0".to_string();
    }
    let mag = rounded.abs();
    if !(1e-6..1e15).contains(&mag) {
        // plain Display would spell out every zero
        return format!("{rounded:e}");
    }
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(sig12(0.9), "0.9");
        assert_eq!(sig12(0.1234567890123456), "0.123456789012");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(170.0), "170");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(2.773339119921e-33), "2.77333911992e-33");
        assert_eq!(sig12(-4.0e20), "-4e20");
    }
}
