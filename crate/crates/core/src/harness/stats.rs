//! Binomial confidence intervals.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `errors` successes out of `total` trials.
pub fn wilson_interval(errors: u64, total: u64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if errors == total {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Half-width of the Wilson interval.
pub fn ci95_half_width(errors: u64, total: u64) -> f64 {
    let (lo, hi) = wilson_interval(errors, total);
    (hi - lo) / 2.0
}

/// `a ≤ b` up to the overlap of their 95% intervals.
pub fn le_within_bands(a: (u64, u64), b: (u64, u64)) -> bool {
    let (a_lo, _) = wilson_interval(a.0, a.1);
    let (_, b_hi) = wilson_interval(b.0, b.1);
    a_lo <= b_hi
}
