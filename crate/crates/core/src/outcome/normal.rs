//! Standard normal helpers used by the Thurston model.
//!
//! The inverse Mills ratio `V(z) = pdf(z) / cdf(z)` and its derivative
//! `W(z) = V(z) (z + V(z))` lose all precision through the naive ratio once
//! `cdf(z)` underflows, so for `z < -5` both are evaluated from the
//! continued fraction of the Mills ratio.

use std::f64::consts::{PI, SQRT_2};

use libm::erfc;

const CF_SWITCH: f64 = -5.0;
const CF_TERMS: u32 = 48;

/// Standard normal density.
pub fn pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Tail `1/(x + 2/(x + 3/(x + ...)))` of the Mills-ratio continued fraction,
/// which equals `V(-x) - x`. Valid for `x >= 5` with `CF_TERMS` terms.
fn mills_tail(x: f64) -> f64 {
    let mut t = 0.0;
    for k in (2..=CF_TERMS).rev() {
        t = f64::from(k) / (x + t);
    }
    1.0 / (x + t)
}

/// `ln cdf(z)`, finite for all finite `z`.
pub fn log_cdf(z: f64) -> f64 {
    if z < CF_SWITCH {
        -0.5 * z * z - 0.5 * (2.0 * PI).ln() - inverse_mills(z).ln()
    } else {
        cdf(z).ln()
    }
}

/// `V(z) = pdf(z) / cdf(z)`.
pub fn inverse_mills(z: f64) -> f64 {
    if z < CF_SWITCH {
        -z + mills_tail(-z)
    } else {
        pdf(z) / cdf(z)
    }
}

/// `W(z) = -V'(z) = V(z) (z + V(z))`.
pub fn inverse_mills_slope(z: f64) -> f64 {
    if z < CF_SWITCH {
        let tail = mills_tail(-z);
        (-z + tail) * tail
    } else {
        let v = pdf(z) / cdf(z);
        v * (z + v)
    }
}
