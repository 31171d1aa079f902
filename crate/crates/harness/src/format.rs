//! Human-readable numbers.

pub const DEFAULT_DIGITS: usize = 12;

/// `x` rounded to `digits` significant digits, without trailing zeros.
/// Plain notation for magnitudes in `[1e-5, 1e15)`, scientific otherwise.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    // round first so the exponent accounts for carries like 9.99… → 10
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let rounded: f64 = sci.parse().expect("formatted float parses");
        trim(format!("{:.*}", decimals, rounded))
    } else {
        format!("{}e{}", trim(mantissa.to_string()), exp)
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn sig_list(xs: &[f64], digits: usize) -> String {
    xs.iter().map(|x| sig(*x, digits)).collect::<Vec<_>>().join(", ")
}

/// Parses `"2.25,1"` or `"2, -3"` into numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>().map_err(|_| format!("not a number: {part:?}"))
        })
        .collect()
}
