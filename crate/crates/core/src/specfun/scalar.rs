//! Univariate log-gamma and polygamma functions.
//!
//! Everything here uses the same recipe: shift the argument upward with the
//! functional recurrence until it clears [`ASYMPTOTIC_FLOOR`], then evaluate
//! the Stirling / Bernoulli asymptotic series. With ten Bernoulli terms the
//! truncation error at the floor is below 1e-19, so the result is limited by
//! floating-point rounding in the recurrence sums.
//!
//! Non-positive arguments return NaN; domain checks with proper errors live
//! in the multivariate wrappers.

/// Bernoulli numbers B_2, B_4, ..., B_20.
pub(crate) const BERNOULLI_2N: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Arguments at or above this value go straight to the asymptotic series.
pub const ASYMPTOTIC_FLOOR: f64 = 10.0;

pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Number of unit steps needed to lift `z` to the asymptotic floor.
fn shift_count(z: f64) -> usize {
    if z >= ASYMPTOTIC_FLOOR {
        0
    } else {
        (ASYMPTOTIC_FLOOR - z).ceil() as usize
    }
}

/// Bernoulli tail of the Stirling series, Σ B_2n / (2n(2n-1) w^(2n-1)).
fn stirling_tail(w: f64) -> f64 {
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut series = 0.0;
    for (n, b) in BERNOULLI_2N.iter().enumerate() {
        let two_n = 2.0 * (n as f64 + 1.0);
        series += b / (two_n * (two_n - 1.0)) * pow;
        pow *= inv2;
    }
    series
}

/// Stirling series for log Γ(w), valid for large `w`.
fn ln_gamma_asymptotic(w: f64) -> f64 {
    (w - 0.5) * w.ln() - w + HALF_LN_2PI + stirling_tail(w)
}

fn digamma_asymptotic(w: f64) -> f64 {
    let inv2 = 1.0 / (w * w);
    let mut pow = inv2;
    let mut series = 0.0;
    for (n, b) in BERNOULLI_2N.iter().enumerate() {
        let two_n = 2.0 * (n as f64 + 1.0);
        series += b / two_n * pow;
        pow *= inv2;
    }
    w.ln() - 0.5 / w - series
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Asymptotic series of ψ^(m)(w) for m ≥ 1.
fn polygamma_asymptotic(m: u32, w: f64) -> f64 {
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let inv = 1.0 / w;
    let mut total = factorial(m - 1) * inv.powi(m as i32) + 0.5 * factorial(m) * inv.powi(m as i32 + 1);
    // ratio = (2k+m-1)! / (2k)!
    for (idx, b) in BERNOULLI_2N.iter().enumerate() {
        let k = idx as u32 + 1;
        let ratio: f64 = (2 * k + 1..=2 * k + m - 1).fold(1.0, |acc, j| acc * j as f64);
        total += b * ratio * inv.powi((2 * k + m) as i32);
    }
    sign * total
}

/// Natural logarithm of Γ(z) for z > 0.
pub fn ln_gamma(z: f64) -> f64 {
    if !(z > 0.0) {
        return f64::NAN;
    }
    let n = shift_count(z);
    if n == 0 {
        return ln_gamma_asymptotic(z);
    }
    let mut prod = 1.0;
    for j in 0..n {
        prod *= z + j as f64;
    }
    ln_gamma_asymptotic(z + n as f64) - prod.ln()
}

/// Digamma ψ(z) = d/dz log Γ(z) for z > 0.
pub fn digamma(z: f64) -> f64 {
    if !(z > 0.0) {
        return f64::NAN;
    }
    let n = shift_count(z);
    let mut shift = 0.0;
    for j in 0..n {
        shift += 1.0 / (z + j as f64);
    }
    digamma_asymptotic(z + n as f64) - shift
}

/// Polygamma ψ^(m)(z) for z > 0; order 0 is the digamma function.
pub fn polygamma(m: u32, z: f64) -> f64 {
    if m == 0 {
        return digamma(z);
    }
    if !(z > 0.0) {
        return f64::NAN;
    }
    let n = shift_count(z);
    let mut shift = 0.0;
    for j in 0..n {
        shift += (z + j as f64).powi(-(m as i32 + 1));
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    polygamma_asymptotic(m, z + n as f64) - sign * factorial(m) * shift
}

/// Trigamma ψ^(1)(z).
pub fn trigamma(z: f64) -> f64 {
    polygamma(1, z)
}

/// log Γ(x + h) − log Γ(x) without cancellation between two large values.
///
/// Requires x > 0 and x + h > 0.
pub fn ln_gamma_diff(x: f64, h: f64) -> f64 {
    let y = x + h;
    if !(x > 0.0) || !(y > 0.0) {
        return f64::NAN;
    }
    if h == 0.0 {
        return 0.0;
    }
    let n = shift_count(x.min(y));
    let mut shift = 0.0;
    for j in 0..n {
        shift += (h / (x + j as f64)).ln_1p();
    }
    let u = x + n as f64;
    let v = u + h;
    // (v-1/2)ln v - v - (u-1/2)ln u + u, regrouped around ln(1 + h/u).
    let lead = (u - 0.5) * (h / u).ln_1p() + h * v.ln() - h;
    lead + (stirling_tail(v) - stirling_tail(u)) - shift
}

/// ψ(x + h) − ψ(x) without cancellation. Requires x > 0 and x + h > 0.
pub fn digamma_diff(x: f64, h: f64) -> f64 {
    let y = x + h;
    if !(x > 0.0) || !(y > 0.0) {
        return f64::NAN;
    }
    if h == 0.0 {
        return 0.0;
    }
    let n = shift_count(x.min(y));
    let mut shift = 0.0;
    for j in 0..n {
        let xj = x + j as f64;
        shift += h / (xj * (xj + h));
    }
    let u = x + n as f64;
    let v = u + h;
    let mut series = 0.0;
    let (iu2, iv2) = (1.0 / (u * u), 1.0 / (v * v));
    let (mut pu, mut pv) = (iu2, iv2);
    for (k, b) in BERNOULLI_2N.iter().enumerate() {
        let two_n = 2.0 * (k as f64 + 1.0);
        series += b / two_n * (pv - pu);
        pu *= iu2;
        pv *= iv2;
    }
    // ln(v/u) - (1/(2v) - 1/(2u)) - series
    (h / u).ln_1p() + 0.5 * h / (u * v) - series + shift
}

/// ln π, used by the multivariate gamma constant.
pub(crate) const LN_PI: f64 = 1.144_729_885_849_400_2;
