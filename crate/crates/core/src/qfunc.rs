//! Gaussian tail probability in linear and logarithmic form.

use std::f64::consts::{LN_2, PI, SQRT_2};

/// `Q(x) = P(Z > x)` for a standard normal `Z`.
pub fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Above this point `ln Q` comes from the continued fraction instead of `erfc`.
const CF_SWITCH: f64 = 20.0;

/// Natural log of `Q(x)`, finite for every finite `x`.
pub fn ln_q(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < -CF_SWITCH {
        return (-q(-x)).ln_1p();
    }
    if x <= CF_SWITCH {
        return q(x).ln();
    }
    // Q(x) = pdf(x) / (x + 1/(x + 2/(x + 3/(x + ...)))), evaluated backwards
    let mut tail = x;
    for k in (1..=60).rev() {
        tail = x + k as f64 / tail;
    }
    -0.5 * x * x - 0.5 * (2.0 * PI).ln() - tail.ln()
}

/// Base-10 log of `Q(x)`.
pub fn log10_q(x: f64) -> f64 {
    ln_q(x) / std::f64::consts::LN_10
}

/// `ln(e^a + e^b)` without overflow.
pub fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1/2)`; handy for callers working in the log domain.
pub const LN_HALF: f64 = -LN_2;
