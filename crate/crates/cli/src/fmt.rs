//! 17-significant-digit float rendering for CSV and report output.
//!
//! Positional notation for moderate magnitudes, scientific beyond, trailing
//! zeros trimmed; saturated values print as the literal `inf`.

pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("numeric exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 17);

    let body = if (-4..17).contains(&exp) {
        let point = exp + 1; // digits before the decimal point
        let mut s = String::new();
        if point <= 0 {
            s.push_str("0.");
            for _ in 0..-point {
                s.push('0');
            }
            s.push_str(&digits);
        } else {
            let p = point as usize;
            s.push_str(&digits[..p]);
            s.push('.');
            s.push_str(&digits[p..]);
        }
        trim_zeros(&s)
    } else {
        let trimmed = trim_zeros(&format!("{}.{}", &digits[..1], &digits[1..]));
        format!("{trimmed}e{exp}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').unwrap_or(s).to_string()
}
