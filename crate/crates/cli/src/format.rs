/// Six significant digits; scientific notation below 1e-4.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if x.abs() < 1e-4 {
        format!("{x:.5e}")
    } else {
        format!("{x:.*}", (5 - mag).max(0) as usize)
    }
}

pub fn fmt_ci(lower: f64, upper: f64) -> String {
    format!("[{lower:.4}, {upper:.4}]")
}
