//! Exact Kullback–Leibler prediction risks for the conjugate family with
//! s = 0, their t-derivatives, and large-μ approximations.
//!
//! With a = t + μ + n_(i)/r_(i) and b = t + μ + n_(i−1)/r_(i−1), block i has
//! risk
//!   −νk − log Γ_k(a+ν) + log Γ_k(a) + (a+ν)ψ_{r_(i)}(μ+ν) − aψ_{r_(i)}(μ)
//!       − (b+ν)ψ_{r_(i−1)}(μ+ν) + bψ_{r_(i−1)}(μ),
//! the b terms being absent for the leading block. It is evaluated here in
//! differenced form, a·[ψ(μ+ν) − ψ(μ)] + νψ(μ+ν), so that nothing of size μ
//! log μ cancels.

use serde::Serialize;

use crate::cone::{Partition, PhiParam};
use crate::error::{Error, Result};
use crate::priors::{canonical_hyperparams, domain_bound, HyperT, PriorKind};
use crate::specfun::{digamma, digamma_diff, ln_gamma_diff, polygamma};

/// Per-block and total risk with normalizations and t-derivatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub parts: Vec<f64>,
    pub total: f64,
    /// (μ/ν) R.
    pub nr: f64,
    /// (μ²/ν)(R − R at t_J).
    pub nrd: f64,
    pub grad: Vec<f64>,
    pub hess_diag: Vec<f64>,
}

fn check_sizes(p: &Partition, mu: f64, nu: f64) -> Result<()> {
    p.cone().check_domain(mu, "mu")?;
    p.cone().check_domain(nu, "nu")
}

fn check_block(p: &Partition, i: usize, t_i: f64, mu: f64) -> Result<()> {
    if i >= p.h() {
        return Err(Error::domain(format!("block index {i} out of range for h = {}", p.h())));
    }
    let lo = domain_bound(p, i, mu);
    if !(t_i > lo) || !t_i.is_finite() {
        return Err(Error::domain(format!(
            "t^({}) must exceed -mu - (r_(i)-k^(i))d/2 - 1 = {lo}, got {t_i}",
            i + 1
        )));
    }
    Ok(())
}

/// Arguments μ − j d/2 for j = r_(i−1), ..., r_(i) − 1: the digamma terms
/// that survive in ψ_{r_(i)} − ψ_{r_(i−1)}.
fn block_args(p: &Partition, i: usize, base: f64) -> impl Iterator<Item = f64> {
    let hd = p.d() as f64 / 2.0;
    (p.prev_rank(i)..p.cum_rank(i)).map(move |j| base - j as f64 * hd)
}

/// Arguments a − j d/2 for j = 0..k^(i), the terms of Γ_k(a).
fn gamma_args(p: &Partition, i: usize, a: f64) -> impl Iterator<Item = f64> {
    let hd = p.d() as f64 / 2.0;
    (0..p.block(i)).map(move |j| a - j as f64 * hd)
}

fn lgd(p: &Partition, i: usize, a: f64, nu: f64) -> f64 {
    gamma_args(p, i, a).map(|x| ln_gamma_diff(x, nu)).sum()
}

/// ψ_{r_(i)}(μ+ν) − ψ_{r_(i)}(μ), over the full rank-r_(i) sum.
fn dpsi_cum(p: &Partition, rank: usize, mu: f64, nu: f64) -> f64 {
    let hd = p.d() as f64 / 2.0;
    (0..rank).map(|j| digamma_diff(mu - j as f64 * hd, nu)).sum()
}

fn shape_a(p: &Partition, i: usize, t_i: f64, mu: f64) -> f64 {
    // t + ratio is exact for the canonical t values, which keeps the gradient
    // at t_R identically zero.
    mu + (t_i + p.ratio(i))
}

/// Exact risk of block `i` (0-based).
pub fn part_risk_exact(p: &Partition, i: usize, t_i: f64, mu: f64, nu: f64) -> Result<f64> {
    check_sizes(p, mu, nu)?;
    check_block(p, i, t_i, mu)?;
    Ok(part_risk_unchecked(p, i, t_i, mu, nu))
}

fn part_risk_unchecked(p: &Partition, i: usize, t_i: f64, mu: f64, nu: f64) -> f64 {
    let k = p.block(i) as f64;
    let a = shape_a(p, i, t_i, mu);
    let ri = p.cum_rank(i);
    let mut v = -nu * k - lgd(p, i, a, nu) + a * dpsi_cum(p, ri, mu, nu);
    if let Some(prev) = p.prev_ratio(i) {
        let b = mu + (t_i + prev);
        v -= b * dpsi_cum(p, p.prev_rank(i), mu, nu);
    }
    v + nu * block_args(p, i, mu + nu).map(digamma).sum::<f64>()
}

/// R^(i)(t) − R^(i)(t'), computed without forming either risk.
pub fn part_risk_difference(p: &Partition, i: usize, t_i: f64, t_ref: f64, mu: f64, nu: f64) -> Result<f64> {
    check_sizes(p, mu, nu)?;
    check_block(p, i, t_i, mu)?;
    check_block(p, i, t_ref, mu)?;
    Ok(part_diff_unchecked(p, i, t_i, t_ref, mu, nu))
}

fn part_diff_unchecked(p: &Partition, i: usize, t_i: f64, t_ref: f64, mu: f64, nu: f64) -> f64 {
    let a = shape_a(p, i, t_i, mu);
    let a_ref = shape_a(p, i, t_ref, mu);
    let lg: f64 = gamma_args(p, i, a)
        .zip(gamma_args(p, i, a_ref))
        .map(|(x, y)| ln_gamma_diff(x, nu) - ln_gamma_diff(y, nu))
        .sum();
    let slope: f64 = block_args(p, i, mu).map(|x| digamma_diff(x, nu)).sum();
    -lg + (t_i - t_ref) * slope
}

/// dR^(i)/dt^(i) = −[ψ_k(a+ν) − ψ_k(a)] + [ψ_{r_(i)} − ψ_{r_(i−1)}](μ+ν) − (same at μ).
pub fn part_risk_gradient(p: &Partition, i: usize, t_i: f64, mu: f64, nu: f64) -> Result<f64> {
    check_sizes(p, mu, nu)?;
    check_block(p, i, t_i, mu)?;
    Ok(grad_unchecked(p, i, t_i, mu, nu))
}

fn grad_unchecked(p: &Partition, i: usize, t_i: f64, mu: f64, nu: f64) -> f64 {
    let a = shape_a(p, i, t_i, mu);
    let lhs: f64 = gamma_args(p, i, a).map(|x| digamma_diff(x, nu)).sum();
    let rhs: f64 = block_args(p, i, mu).map(|x| digamma_diff(x, nu)).sum();
    rhs - lhs
}

/// d²R^(i)/dt² = ψ¹_k(a) − ψ¹_k(a+ν).
pub fn part_risk_curvature(p: &Partition, i: usize, t_i: f64, mu: f64, nu: f64) -> Result<f64> {
    check_sizes(p, mu, nu)?;
    check_block(p, i, t_i, mu)?;
    Ok(curv_unchecked(p, i, t_i, mu, nu))
}

fn curv_unchecked(p: &Partition, i: usize, t_i: f64, mu: f64, nu: f64) -> f64 {
    let a = shape_a(p, i, t_i, mu);
    gamma_args(p, i, a).map(|x| polygamma(1, x) - polygamma(1, x + nu)).sum()
}

/// Full report for hyperparameter t.
pub fn exact_risk(p: &Partition, t: &HyperT, mu: f64, nu: f64) -> Result<RiskReport> {
    t.check(p)?;
    check_sizes(p, mu, nu)?;
    for i in 0..p.h() {
        check_block(p, i, t[i], mu)?;
    }
    let tj = canonical_hyperparams(p, PriorKind::Jeffreys);
    let parts: Vec<f64> = (0..p.h()).map(|i| part_risk_unchecked(p, i, t[i], mu, nu)).collect();
    let total = parts.iter().sum::<f64>();
    let diff: f64 = (0..p.h()).map(|i| part_diff_unchecked(p, i, t[i], tj[i], mu, nu)).sum();
    Ok(RiskReport {
        total,
        nr: mu / nu * total,
        nrd: mu * mu / nu * diff,
        grad: (0..p.h()).map(|i| grad_unchecked(p, i, t[i], mu, nu)).collect(),
        hess_diag: (0..p.h()).map(|i| curv_unchecked(p, i, t[i], mu, nu)).collect(),
        parts,
    })
}

/// R(t) − R(t').
pub fn risk_difference(p: &Partition, t: &HyperT, t_ref: &HyperT, mu: f64, nu: f64) -> Result<f64> {
    t.check(p)?;
    t_ref.check(p)?;
    (0..p.h()).map(|i| part_risk_difference(p, i, t[i], t_ref[i], mu, nu)).sum()
}

/// Normalized risk difference (μ²/ν)(R(t) − R(t_J)).
pub fn nrd(p: &Partition, t: &HyperT, mu: f64, nu: f64) -> Result<f64> {
    let tj = canonical_hyperparams(p, PriorKind::Jeffreys);
    Ok(mu * mu / nu * risk_difference(p, t, &tj, mu, nu)?)
}

/// Eigenvalue of the Laplace–Beltrami operator on K_t:
/// Σ_i [k(t − t_R)²/4 − d² k (r − 2r_(i) + k)²/16].
pub fn lb_eigenvalue(p: &Partition, t: &HyperT) -> Result<f64> {
    t.check(p)?;
    let tr = canonical_hyperparams(p, PriorKind::RightInvariant);
    let d = p.d() as f64;
    let r = p.r() as f64;
    Ok((0..p.h())
        .map(|i| {
            let k = p.block(i) as f64;
            let ri = p.cum_rank(i) as f64;
            0.25 * k * (t[i] - tr[i]).powi(2) - d * d / 16.0 * k * (r - 2.0 * ri + k).powi(2)
        })
        .sum())
}

/// Large-μ expansion of the block risk through μ⁻², centred at t_R.
pub fn asympt_part_risk(p: &Partition, i: usize, t_i: f64, mu: f64, nu: f64) -> f64 {
    let d = p.d() as f64;
    let k = p.block(i) as f64;
    let ri = p.cum_rank(i) as f64;
    let c = 2.0 * ri - k - 1.0;
    let t_r = -(c * d / 2.0 + 1.0);
    let mu2 = mu * mu;
    let at_tr = nu / mu * (0.5 * k + d / 4.0 * k * c) - nu * nu / mu2 * (0.25 * k + d / 8.0 * k * c)
        + nu / mu2
            * (k / 6.0
                + d / 4.0 * k * c
                + d * d / 24.0 * k * (3.0 * ri * ri - 6.0 * ri - 3.0 * k * (ri - 1.0) + 2.0 * k * k + 1.0));
    at_tr + nu / mu2 * 0.5 * k * (t_i - t_r).powi(2)
}

/// Leading term (ν/2μ)(n_(i) − n_(i−1)) of the block risk.
pub fn leading_part_risk(p: &Partition, i: usize, mu: f64, nu: f64) -> f64 {
    0.5 * nu / mu * (p.cum_dim(i) - p.prev_dim(i)) as f64
}

/// log K_t(φ) = Σ_i ½(t^(i) − t_J) log|ξ^(i)_0|.
pub fn log_k_eigenfunction(p: &Partition, t: &HyperT, phi: &PhiParam) -> Result<f64> {
    t.check(p)?;
    let tj = -((p.r() as f64 - 1.0) * p.d() as f64 / 2.0 + 1.0);
    (0..p.h()).map(|i| Ok(0.5 * (t[i] - tj) * phi.xi_0(i).log_det()?)).sum()
}

/// K_t(φ) = (π_t(φ)/π_J(φ))^{1/2}.
pub fn k_eigenfunction(p: &Partition, t: &HyperT, phi: &PhiParam) -> Result<f64> {
    Ok(log_k_eigenfunction(p, t, phi)?.exp())
}

/// Expected log-determinants entering the general-s block risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogDetMoments {
    /// E log|s + X_(i) + Y_(i)|.
    pub sxy: f64,
    /// E log|s + X_(i)|.
    pub sx: f64,
    /// E log|s_1 + X_(i−1) + Y_(i−1)|; unused for the leading block.
    pub s1xy: f64,
    /// E log|s_1 + X_(i−1)|; unused for the leading block.
    pub s1x: f64,
}

/// Block risk at parameter φ for a general (proper or improper) s, given the
/// log-determinant expectations and log|ξ^(i)_0|.
pub fn part_risk_with_moments(
    p: &Partition,
    i: usize,
    t_i: f64,
    mu: f64,
    nu: f64,
    log_det_xi0: f64,
    m: &LogDetMoments,
) -> Result<f64> {
    check_sizes(p, mu, nu)?;
    check_block(p, i, t_i, mu)?;
    let k = p.block(i) as f64;
    let a = shape_a(p, i, t_i, mu);
    let mut v = -nu * k + nu * log_det_xi0 - lgd(p, i, a, nu) + (a + nu) * m.sxy - a * m.sx;
    if let Some(prev) = p.prev_ratio(i) {
        let b = mu + (t_i + prev);
        v += -(b + nu) * m.s1xy + b * m.s1x;
    }
    Ok(v)
}
