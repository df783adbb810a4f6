//! Multivariate gamma and polygamma functions on symmetric cones.

mod asymptotic;
mod bracket;
mod scalar;

pub use asymptotic::{asympt_log_mvgamma, asympt_mvdigamma};
pub use bracket::{digamma_bracket, log_gamma_bracket, Bracket, MAX_BRACKET_TERMS};
pub use scalar::{digamma, digamma_diff, ln_gamma, ln_gamma_diff, polygamma, trigamma, ASYMPTOTIC_FLOOR};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub(crate) use scalar::LN_PI;

/// The cone of positive definite real symmetric (d = 1) or complex
/// Hermitian (d = 2) matrices of rank r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCone", into = "RawCone")]
pub struct ConeSpec {
    d: u32,
    r: usize,
}

#[derive(Serialize, Deserialize)]
struct RawCone {
    d: u32,
    r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
}

impl TryFrom<RawCone> for ConeSpec {
    type Error = Error;

    fn try_from(raw: RawCone) -> Result<Self> {
        let cone = ConeSpec::new(raw.d, raw.r)?;
        match raw.n {
            Some(n) if n != cone.n() => Err(Error::domain(format!(
                "dimension {n} does not match r + r(r-1)d/2 = {}",
                cone.n()
            ))),
            _ => Ok(cone),
        }
    }
}

impl From<ConeSpec> for RawCone {
    fn from(c: ConeSpec) -> Self {
        RawCone { d: c.d, r: c.r, n: Some(c.n()) }
    }
}

impl ConeSpec {
    pub fn new(d: u32, r: usize) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::domain(format!("d must be 1 or 2, got {d}")));
        }
        if r == 0 {
            return Err(Error::domain("rank r must be at least 1"));
        }
        Ok(ConeSpec { d, r })
    }

    pub fn real(r: usize) -> Self {
        ConeSpec { d: 1, r: r.max(1) }
    }

    pub fn complex(r: usize) -> Self {
        ConeSpec { d: 2, r: r.max(1) }
    }

    /// Peirce invariant.
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Real dimension r + r(r-1)d/2.
    pub fn n(&self) -> usize {
        self.r + self.r * (self.r - 1) * self.d as usize / 2
    }

    /// Same Peirce invariant, different rank.
    pub fn with_rank(&self, r: usize) -> Result<Self> {
        ConeSpec::new(self.d, r)
    }

    /// n / r = (r-1)d/2 + 1.
    pub fn ratio(&self) -> f64 {
        (self.r as f64 - 1.0) * self.half_d() + 1.0
    }

    pub(crate) fn half_d(&self) -> f64 {
        self.d as f64 / 2.0
    }

    /// Lower end (r-1)d/2 of the open domain of Γ_r.
    pub fn gamma_threshold(&self) -> f64 {
        (self.r as f64 - 1.0) * self.half_d()
    }

    pub(crate) fn check_domain(&self, mu: f64, name: &str) -> Result<()> {
        let lo = self.gamma_threshold();
        if mu.is_finite() && mu > lo {
            Ok(())
        } else {
            Err(Error::domain(format!("{name} must exceed (r-1)d/2 = {lo}, got {mu}")))
        }
    }
}

/// log Γ_k(a) for rank k and Peirce invariant d, without a domain check.
/// Returns NaN outside the domain.
pub(crate) fn ln_mvgamma_raw(d: u32, k: usize, a: f64) -> f64 {
    let hd = d as f64 / 2.0;
    let constant = d as f64 * (k * (k - 1)) as f64 / 4.0 * LN_PI;
    constant + (0..k).map(|j| ln_gamma(a - j as f64 * hd)).sum::<f64>()
}

/// ψ_k^(m)(a) without a domain check.
pub(crate) fn mvpolygamma_raw(d: u32, k: usize, m: u32, a: f64) -> f64 {
    let hd = d as f64 / 2.0;
    (0..k).map(|j| polygamma(m, a - j as f64 * hd)).sum()
}

/// Logarithm of the multivariate gamma function Γ_r(μ).
pub fn log_mvgamma(cone: ConeSpec, mu: f64) -> Result<f64> {
    cone.check_domain(mu, "mu")?;
    Ok(ln_mvgamma_raw(cone.d, cone.r, mu))
}

/// Multivariate polygamma ψ_r^(order)(μ) = Σ_k ψ^(order)(μ − (k−1)d/2).
pub fn mvpolygamma(cone: ConeSpec, order: u32, mu: f64) -> Result<f64> {
    cone.check_domain(mu, "mu")?;
    Ok(mvpolygamma_raw(cone.d, cone.r, order, mu))
}

/// Multivariate digamma ψ_r(μ).
pub fn mvdigamma(cone: ConeSpec, mu: f64) -> Result<f64> {
    mvpolygamma(cone, 0, mu)
}
