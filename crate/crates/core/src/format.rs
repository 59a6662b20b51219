//! Text rendering of probabilities for command output.

/// Twelve significant digits, trailing zeros trimmed; `-inf` for log zero.
pub fn prob(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x < 0.0 { "-inf".into() } else { "inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{:.11e}", x);
        let (mant, e) = s.split_once('e').unwrap();
        return format!("{}e{}", trim(mant), e);
    }
    let decimals = (11 - exp).max(0) as usize;
    trim(&format!("{:.*}", decimals, x)).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::prob;

    #[test]
    fn renders() {
        assert_eq!(prob(0.2025), "0.2025");
        assert_eq!(prob(1.0), "1");
        assert_eq!(prob(0.0), "0");
        assert_eq!(prob(f64::NEG_INFINITY), "-inf");
        assert_eq!(prob(0.1 + 0.2), "0.3");
        assert_eq!(
            prob(2f64.sqrt() / (2f64.sqrt() + 3f64.sqrt())),
            "0.449489742783"
        );
        assert_eq!(prob(1.5e-7), "1.5e-7");
        assert_eq!(prob(-1.6094379124341003), "-1.60943791243");
    }
}
