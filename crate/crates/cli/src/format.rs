/// Six significant digits, switching to exponent form outside
/// `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        return format!("{x:.5e}");
    }
    let rounded = format!("{:.*}", (5 - exp) as usize, x);
    // Rounding can carry into a new leading digit, e.g. 9.999996 -> 10.00000.
    let digits = rounded.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if digits > 6 {
        return if exp < 5 { format!("{:.*}", (4 - exp) as usize, x) } else { format!("{x:.5e}") };
    }
    rounded
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.98831234), "0.988312");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(123.4567891), "123.457");
        assert_eq!(sig6(0.0012345678), "0.00123457");
        assert_eq!(sig6(1.215e-9), "1.21500e-9");
        assert_eq!(sig6(-0.5), "-0.500000");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(9.9999996), "10.0000");
        assert_eq!(sig6(2.5e7), "2.50000e7");
    }
}
