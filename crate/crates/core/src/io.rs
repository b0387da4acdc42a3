//! Plain-text output helpers shared by the CSV emitters.

use std::fmt::Write as _;

/// Formats a float with 12 significant digits.
///
/// Values with magnitude in `[1e-4, 1e12)` print in positional notation,
/// everything else in scientific notation. Non-finite values print as
/// `NaN`, `inf` or `-inf`.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs();
    if (1e-4..1e12).contains(&mag) {
        let exp = mag.log10().floor() as i32;
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding may carry into a new leading digit, e.g. 9.99..→10.0..
        let digits = s.chars().filter(|c| c.is_ascii_digit()).count();
        let leading_zeros = s
            .trim_start_matches('-')
            .chars()
            .take_while(|c| *c == '0' || *c == '.')
            .filter(|c| *c == '0')
            .count();
        if digits - leading_zeros > 12 && decimals > 0 {
            let d = decimals - 1;
            return format!("{x:.d$}");
        }
        s
    } else {
        format!("{x:.11e}")
    }
}

/// Writes a CSV table with `#`-prefixed comment lines, a header row and rows
/// of floats.
pub fn csv_table(comments: &[String], header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "{}", header.join(","));
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| fmt_sig(*v)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}
