//! Two-sided bounds on log Γ and ψ from truncated Bernoulli series.
//!
//! For real w > 0 the remainder after N terms of either series has the sign
//! of the first omitted term and is smaller in magnitude, so partial sums
//! with N and N + 1 terms enclose the true value. Small arguments are first
//! lifted to [`BRACKET_FLOOR`] with the exact recurrence; below that the
//! series in the first few terms does not tighten as N grows.

use serde::{Deserialize, Serialize};

use super::scalar::{BERNOULLI_2N, HALF_LN_2PI};
use crate::error::{Error, Result};

/// Largest supported `terms` argument (one Bernoulli number is held back for
/// the N + 1 partial sum).
pub const MAX_BRACKET_TERMS: usize = BERNOULLI_2N.len() - 1;

const BRACKET_FLOOR: f64 = 4.0;

/// Closed interval [lower, upper].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// True when `other` lies inside `self`.
    pub fn encloses(&self, other: &Bracket) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

fn check(z: f64, terms: usize) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("bracket argument must be positive, got {z}")));
    }
    if terms == 0 || terms > MAX_BRACKET_TERMS {
        return Err(Error::domain(format!("terms must be in 1..={MAX_BRACKET_TERMS}, got {terms}")));
    }
    Ok(())
}

fn lift(z: f64) -> (f64, usize) {
    if z >= BRACKET_FLOOR {
        (z, 0)
    } else {
        let n = (BRACKET_FLOOR - z).ceil() as usize;
        (z + n as f64, n)
    }
}

/// Round-off allowance: a few ulps of every magnitude that entered the sum.
fn pad(scale: f64) -> f64 {
    8.0 * f64::EPSILON * scale
}

fn enclose(a: f64, b: f64, scale: f64) -> Bracket {
    let p = pad(scale);
    Bracket { lower: a.min(b) - p, upper: a.max(b) + p }
}

/// Bracket of log Γ(z) from partial sums with `terms` and `terms + 1` terms.
pub fn log_gamma_bracket(z: f64, terms: usize) -> Result<Bracket> {
    check(z, terms)?;
    let (w, n) = lift(z);
    let shift: f64 = (0..n).map(|j| (z + j as f64).ln()).sum();
    let head = (w - 0.5) * w.ln() - w + HALF_LN_2PI;
    let inv2 = 1.0 / (w * w);
    let mut pow = 1.0 / w;
    let mut sums = [0.0; 2];
    let mut acc = 0.0;
    for (idx, b) in BERNOULLI_2N.iter().take(terms + 1).enumerate() {
        let two_n = 2.0 * (idx as f64 + 1.0);
        acc += b / (two_n * (two_n - 1.0)) * pow;
        pow *= inv2;
        if idx + 1 == terms {
            sums[0] = acc;
        }
    }
    sums[1] = acc;
    let scale = head.abs() + w.ln().abs() * w + shift.abs() + 1.0;
    Ok(enclose(head + sums[0] - shift, head + sums[1] - shift, scale))
}

/// Bracket of ψ(z) from partial sums with `terms` and `terms + 1` terms.
pub fn digamma_bracket(z: f64, terms: usize) -> Result<Bracket> {
    check(z, terms)?;
    let (w, n) = lift(z);
    let shift: f64 = (0..n).map(|j| 1.0 / (z + j as f64)).sum();
    let head = w.ln() - 0.5 / w;
    let inv2 = 1.0 / (w * w);
    let mut pow = inv2;
    let mut sums = [0.0; 2];
    let mut acc = 0.0;
    for (idx, b) in BERNOULLI_2N.iter().take(terms + 1).enumerate() {
        let two_n = 2.0 * (idx as f64 + 1.0);
        acc += b / two_n * pow;
        pow *= inv2;
        if idx + 1 == terms {
            sums[0] = acc;
        }
    }
    sums[1] = acc;
    let scale = w.ln().abs() + shift.abs() + 1.0;
    Ok(enclose(head - sums[0] - shift, head - sums[1] - shift, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{digamma, ln_gamma};

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn log_gamma_examples() {
        let b = log_gamma_bracket(2.0, 1).unwrap();
        assert!(b.contains(0.0) && b.width() < 1e-3);
        assert!(log_gamma_bracket(1.0, 2).unwrap().contains(0.0));
        let b = log_gamma_bracket(10.0, 3).unwrap();
        assert!(b.contains(362880f64.ln()));
    }

    #[test]
    fn digamma_examples() {
        assert!(digamma_bracket(1.0, 2).unwrap().contains(-EULER_GAMMA));
        assert!(digamma_bracket(2.0, 1).unwrap().contains(1.0 - EULER_GAMMA));
        // first omitted term is B_4 / (4 z^4) = 1 / (120 z^4)
        let w1 = digamma_bracket(50.0, 1).unwrap().width();
        assert!(w1 < 1.4e-9, "{w1}");
        assert!(digamma_bracket(50.0, 2).unwrap().width() < 1e-10);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(log_gamma_bracket(0.0, 1).is_err());
        assert!(digamma_bracket(-2.0, 1).is_err());
        assert!(digamma_bracket(1.0, 0).is_err());
        assert!(digamma_bracket(1.0, MAX_BRACKET_TERMS + 1).is_err());
    }

    #[test]
    fn brackets_nest_and_hold_production_values() {
        let mut z = 0.6;
        while z <= 50.0 {
            for n in 1..MAX_BRACKET_TERMS {
                let (a, b) = (log_gamma_bracket(z, n).unwrap(), log_gamma_bracket(z, n + 1).unwrap());
                assert!(a.contains(ln_gamma(z)), "lg z={z} n={n}");
                assert!(a.encloses(&b), "lg nest z={z} n={n}");
                let (a, b) = (digamma_bracket(z, n).unwrap(), digamma_bracket(z, n + 1).unwrap());
                assert!(a.contains(digamma(z)), "psi z={z} n={n}");
                assert!(a.encloses(&b), "psi nest z={z} n={n}");
            }
            z += 0.37;
        }
    }
}
