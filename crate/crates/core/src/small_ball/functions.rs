use crate::error::{Error, Result};

/// Below this the closed form of `F` loses digits to cancellation.
const SERIES_CUTOFF: f64 = 1e-2;

/// `F(x) = ln(1 + 2x) / 2 - x / (1 + 2x)`, for `x >= 0` without validation.
pub fn big_f(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        // sum_{n >= 2} (-1)^n 2^{n-1} (n - 1) / n x^n
        let mut term = 2.0 * x * x; // 2^{n-1} x^n at n = 2
        let mut sum = 0.0;
        for n in 2..24 {
            let nf = n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * term * (nf - 1.0) / nf;
            term *= 2.0 * x;
        }
        sum
    } else {
        0.5 * (2.0 * x).ln_1p() - x / (1.0 + 2.0 * x)
    }
}

/// `F1(x) = x / (1 + 2x)`.
pub fn big_f1(x: f64) -> f64 {
    if x.is_infinite() {
        0.5
    } else {
        x / (1.0 + 2.0 * x)
    }
}

/// `(F(x), F1(x))` for `x >= 0`.
pub fn f_pair(x: f64) -> Result<(f64, f64)> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("F is defined for x >= 0, got {x}")));
    }
    Ok((big_f(x), big_f1(x)))
}
