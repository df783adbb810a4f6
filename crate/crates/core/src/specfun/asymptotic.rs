//! Large-μ expansions of log Γ_r(μ + x) and ψ_r(μ + x) through μ⁻².

use super::scalar::LN_PI;
use super::ConeSpec;

/// Expansion of log Γ_r(μ + x) with an O(μ⁻³) remainder.
pub fn asympt_log_mvgamma(cone: ConeSpec, mu: f64, x: f64) -> f64 {
    let d = cone.d() as f64;
    let r = cone.r() as f64;
    let ln_mu = mu.ln();
    let p = d * d - 6.0 * d + 4.0;

    let log_coef = -0.25 * d * r * r + 0.25 * (d - 2.0) * r + r * x;
    let constant = 0.25 * d * LN_PI * r * r + 0.25 * (-LN_PI * d + 2.0 * (2.0 * std::f64::consts::PI).ln()) * r;
    let c1 = d * d * r.powi(3) / 24.0 - (d - 2.0) * d * r * r / 16.0
        + p * r / 48.0
        + (-0.25 * d * r * r + 0.25 * (d - 2.0) * r) * x
        + 0.5 * r * x * x;
    let c2 = d.powi(3) * r.powi(4) / 192.0 - (d - 2.0) * d * d * r.powi(3) / 96.0
        + p * d * r * r / 192.0
        + (d - 2.0) * d * r / 96.0
        + (-d * d * r.powi(3) / 24.0 + (d - 2.0) * d * r * r / 16.0 - p * r / 48.0) * x
        + (d * r * r / 8.0 - (d - 2.0) * r / 8.0) * x * x
        - r * x.powi(3) / 6.0;

    r * mu * ln_mu - r * mu + log_coef * ln_mu + constant + c1 / mu + c2 / (mu * mu)
}

/// Expansion of ψ_r(μ + x) with an O(μ⁻³) remainder.
pub fn asympt_mvdigamma(cone: ConeSpec, mu: f64, x: f64) -> f64 {
    let d = cone.d() as f64;
    let r = cone.r() as f64;
    let p = d * d - 6.0 * d + 4.0;
    let c1 = -0.25 * d * r * r + 0.25 * (d - 2.0) * r + r * x;
    let c2 = -d * d * r.powi(3) / 24.0 + (d - 2.0) * d * r * r / 16.0 - p * r / 48.0
        + (0.25 * d * r * r - 0.25 * (d - 2.0) * r) * x
        - 0.5 * r * x * x;
    r * mu.ln() + c1 / mu + c2 / (mu * mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{log_mvgamma, mvdigamma};

    #[test]
    fn log_mvgamma_expansion_examples() {
        let c = ConeSpec::real(1);
        assert!((asympt_log_mvgamma(c, 100.0, 0.0) - log_mvgamma(c, 100.0).unwrap()).abs() < 1e-6);
        let c = ConeSpec::complex(2);
        assert!((asympt_log_mvgamma(c, 100.0, 0.0) - log_mvgamma(c, 100.0).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn log_mvgamma_error_is_cubic() {
        let c = ConeSpec::real(2);
        let err = |mu: f64| (asympt_log_mvgamma(c, mu, 1.0) - log_mvgamma(c, mu + 1.0).unwrap()).abs();
        let ratio = err(100.0) / err(200.0);
        assert!((6.0..10.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn mvdigamma_expansion_examples() {
        let c = ConeSpec::real(1);
        assert!((asympt_mvdigamma(c, 100.0, 0.0) - mvdigamma(c, 100.0).unwrap()).abs() < 1e-6);
        let c = ConeSpec::real(2);
        assert!((asympt_mvdigamma(c, 100.0, 0.5) - mvdigamma(c, 100.5).unwrap()).abs() < 1e-4);
        let c = ConeSpec::complex(3);
        assert!((asympt_mvdigamma(c, 500.0, 0.0) - mvdigamma(c, 500.0).unwrap()).abs() < 1e-6);
    }
}
