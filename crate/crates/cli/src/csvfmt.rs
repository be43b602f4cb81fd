//! Pinned CSV number formatting: fixed 6 significant digits, "." decimal
//! separator, no locale dependence. Byte-exact reruns require this to never
//! change.

/// Render `x` with exactly six significant digits. Magnitudes between 1e-4
/// and 1e15 print in plain decimal; everything else keeps scientific
/// notation.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".to_string() } else { "-inf".to_string() };
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp_str) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp_str.parse().expect("exponent");
    if !(-4..=14).contains(&exp) {
        return sci;
    }
    let sign = if mantissa.starts_with('-') { "-" } else { "" };
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 6);
    let body = if exp >= 5 {
        let zeros = "0".repeat((exp - 5) as usize);
        format!("{digits}{zeros}")
    } else if exp >= 0 {
        let split = (exp + 1) as usize;
        format!("{}.{}", &digits[..split], &digits[split..])
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("0.{zeros}{digits}")
    };
    format!("{sign}{body}")
}

/// Format an optional value, leaving errors' numeric fields empty.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g6).unwrap_or_default()
}
