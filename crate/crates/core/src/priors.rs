//! The enriched conjugate prior family on the block coordinates φ.
//!
//! Block i contributes
//!   t_i log|ξ^(i)_0| − ⟨ξ_{1/2} ξ_0⁻¹ ξ_{1/2}* | s_1⟩ − ⟨ξ_{1/2} | s_{1/2}⟩ − ⟨ξ_0 | s_0⟩
//! to the unnormalized log density, where s_1, s_{1/2}, s_0 are the blocks of
//! s^(i) split after row r_(i−1). The rectangular pairing is
//! ⟨a|b⟩ = 2 Re tr(a b*), so the block exponent equals
//! −⟨ζ_(i)|s^(i)⟩ + ⟨ζ_(i−1)|s^(i)_1⟩.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cone::{xi_to_phi, C64, CMatrix, ConeElement, Partition, PhiParam};
use crate::error::{Error, Result};
use crate::specfun::{ln_mvgamma_raw, LN_PI};

/// Named members of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    Jeffreys,
    Reference,
    RightInvariant,
}

impl PriorKind {
    pub const ALL: [PriorKind; 3] = [PriorKind::Jeffreys, PriorKind::Reference, PriorKind::RightInvariant];

    pub fn name(&self) -> &'static str {
        match self {
            PriorKind::Jeffreys => "jeffreys",
            PriorKind::Reference => "reference",
            PriorKind::RightInvariant => "right_invariant",
        }
    }
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "jeffreys" | "j" => Ok(PriorKind::Jeffreys),
            "reference" | "c" => Ok(PriorKind::Reference),
            "right_invariant" | "rightinvariant" | "r" => Ok(PriorKind::RightInvariant),
            other => Err(Error::domain(format!(
                "unknown prior '{other}', expected jeffreys, reference or right_invariant"
            ))),
        }
    }
}

/// Exponents t = (t^(1), ..., t^(h)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperT(pub Vec<f64>);

impl HyperT {
    pub fn new(values: Vec<f64>) -> Self {
        HyperT(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn check(&self, p: &Partition) -> Result<()> {
        if self.0.len() != p.h() {
            return Err(Error::Dimension(format!(
                "t has {} components, partition has {} blocks",
                self.0.len(),
                p.h()
            )));
        }
        if let Some(v) = self.0.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("t has a non-finite component {v}")));
        }
        Ok(())
    }

    /// Membership in T^μ: t^(i) > −μ − (r_(i) − k^(i))d/2 − 1 for every block.
    pub fn in_domain(&self, p: &Partition, mu: f64) -> bool {
        self.0.len() == p.h() && self.0.iter().enumerate().all(|(i, &t)| t > domain_bound(p, i, mu))
    }

    pub fn offset(&self, delta: f64) -> HyperT {
        HyperT(self.0.iter().map(|t| t + delta).collect())
    }
}

impl std::ops::Index<usize> for HyperT {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Lower bound on t^(i) for the block risk to be finite at sample size μ.
pub fn domain_bound(p: &Partition, i: usize, mu: f64) -> f64 {
    -mu - p.offset(i) - 1.0
}

/// Scale hyperparameters s^(i) of rank r_(i), each positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HyperS(pub Vec<ConeElement>);

impl HyperS {
    pub fn new(p: &Partition, blocks: Vec<ConeElement>) -> Result<Self> {
        let s = HyperS(blocks);
        s.check(p)?;
        Ok(s)
    }

    /// s = 0, the standard (improper) family.
    pub fn zero(p: &Partition) -> Self {
        HyperS((0..p.h()).map(|i| ConeElement::zeros(p.d(), p.cum_rank(i))).collect())
    }

    /// s^(i) = principal r_(i) block of one matrix.
    pub fn from_matrix(p: &Partition, s: &ConeElement) -> Result<Self> {
        if s.rank() != p.r() {
            return Err(Error::Dimension(format!("s has rank {}, expected {}", s.rank(), p.r())));
        }
        HyperS::new(p, (0..p.h()).map(|i| s.principal(p.cum_rank(i))).collect())
    }

    pub fn block(&self, i: usize) -> &ConeElement {
        &self.0[i]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|b| b.matrix().iter().all(|z| z.re == 0.0 && z.im == 0.0))
    }

    pub fn check(&self, p: &Partition) -> Result<()> {
        if self.0.len() != p.h() {
            return Err(Error::Dimension(format!("s has {} blocks, partition has {}", self.0.len(), p.h())));
        }
        for (i, b) in self.0.iter().enumerate() {
            if b.rank() != p.cum_rank(i) {
                return Err(Error::Dimension(format!(
                    "s block {i} has rank {}, expected {}",
                    b.rank(),
                    p.cum_rank(i)
                )));
            }
            let shifted = b.add(&ConeElement::scaled_identity(b.d(), b.rank(), 1e-10))?;
            if !shifted.is_pd() {
                return Err(Error::not_pd(&format!("s block {i} has an eigenvalue below -1e-10")));
            }
        }
        Ok(())
    }
}

/// t_J, t_C (reference) or t_R for the partition.
pub fn canonical_hyperparams(p: &Partition, kind: PriorKind) -> HyperT {
    let hd = p.cone().d() as f64 / 2.0;
    let r = p.r() as f64;
    HyperT(
        (0..p.h())
            .map(|i| {
                let ri = p.cum_rank(i) as f64;
                let k = p.block(i) as f64;
                match kind {
                    PriorKind::Jeffreys => -((r - 1.0) * hd + 1.0),
                    PriorKind::Reference => -((ri - 1.0) * hd + 1.0),
                    PriorKind::RightInvariant => -((2.0 * ri - k - 1.0) * hd + 1.0),
                }
            })
            .collect(),
    )
}

fn split_blocks(s: &ConeElement, split: usize) -> (CMatrix, CMatrix, CMatrix) {
    let r = s.rank();
    let m = s.matrix();
    (
        m.view((0, 0), (split, split)).into_owned(),
        m.view((0, split), (split, r - split)).into_owned(),
        m.view((split, split), (r - split, r - split)).into_owned(),
    )
}

fn re_trace_prod(a: &CMatrix, b: &CMatrix) -> f64 {
    // Re tr(a b) without forming the product
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Unnormalized log prior density of block `i` at φ.
pub fn log_prior_block(p: &Partition, i: usize, s_i: &ConeElement, t_i: f64, phi: &PhiParam) -> Result<f64> {
    let x0 = phi.xi_0(i);
    let mut v = t_i * x0.log_det()?;
    if s_i.matrix().iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Ok(v);
    }
    match phi.xi_half(i) {
        None => v -= x0.inner(s_i),
        Some(xh) => {
            let (s1, sh, s0) = split_blocks(s_i, p.prev_rank(i));
            let a = xh * x0.inverse()?.matrix() * xh.adjoint();
            v -= re_trace_prod(&a, &s1);
            v -= 2.0 * re_trace_prod(xh, &sh.adjoint());
            v -= re_trace_prod(x0.matrix(), &s0);
        }
    }
    Ok(v)
}

/// Unnormalized log prior density Σ_i (block exponent) at φ.
pub fn log_prior_density(p: &Partition, s: &HyperS, t: &HyperT, phi: &PhiParam) -> Result<f64> {
    t.check(p)?;
    if s.0.len() != p.h() {
        return Err(Error::Dimension("s does not match the partition".into()));
    }
    (0..p.h()).map(|i| log_prior_block(p, i, s.block(i), t[i], phi)).sum()
}

/// Same density evaluated at ξ.
pub fn log_prior_density_xi(p: &Partition, s: &HyperS, t: &HyperT, xi: &ConeElement) -> Result<f64> {
    log_prior_density(p, s, t, &xi_to_phi(p, xi)?)
}

/// (t^(i) + n_(i)/r_(i)); the shape parameter of block i.
fn block_shape(p: &Partition, i: usize, t_i: f64) -> f64 {
    t_i + p.ratio(i)
}

/// log ∫ exp(block exponent) dφ^(i) (Lebesgue measure on the real
/// coordinates of ξ^(i)_{1/2} and ξ^(i)_0).
pub fn log_normalization(p: &Partition, i: usize, s_i: &ConeElement, t_i: f64) -> Result<f64> {
    if i >= p.h() {
        return Err(Error::domain(format!("block index {i} out of range for h = {}", p.h())));
    }
    if s_i.rank() != p.cum_rank(i) {
        return Err(Error::Dimension(format!("s has rank {}, expected {}", s_i.rank(), p.cum_rank(i))));
    }
    let bound = -p.offset(i) - 1.0;
    if !(t_i > bound) || !t_i.is_finite() {
        return Err(Error::domain(format!(
            "prior block {i} is improper: t must exceed -(r_(i)-k^(i))d/2 - 1 = {bound}, got {t_i}"
        )));
    }
    let chol = s_i.cholesky().map_err(|_| Error::domain(format!("prior block {i} is improper: s is not positive definite")))?;
    let dets = chol.leading_log_dets();
    let hd = p.d() as f64 / 2.0;
    let k = p.block(i);
    let a = block_shape(p, i, t_i);
    let mut v = ln_mvgamma_raw(p.d(), k, a) - a * dets[dets.len() - 1];
    if let Some(prev) = p.prev_ratio(i) {
        let r0 = p.prev_rank(i);
        v += (r0 * k) as f64 * hd * LN_PI + (t_i + prev) * dets[r0 - 1];
    }
    Ok(v)
}

/// Σ_i log_normalization over all blocks.
pub fn log_normalization_total(p: &Partition, s: &HyperS, t: &HyperT) -> Result<f64> {
    t.check(p)?;
    (0..p.h()).map(|i| log_normalization(p, i, s.block(i), t[i])).sum()
}

/// Conjugate update after one observation x ~ W_r(μ, ξ):
/// s^(i) ← s^(i) + x_(i), t^(i) ← t^(i) + μ.
pub fn posterior_update(p: &Partition, s: &HyperS, t: &HyperT, x: &ConeElement, mu: f64) -> Result<(HyperS, HyperT)> {
    t.check(p)?;
    p.cone().check_domain(mu, "mu")?;
    if x.rank() != p.r() {
        return Err(Error::Dimension(format!("x has rank {}, expected {}", x.rank(), p.r())));
    }
    x.cholesky()?;
    let blocks = (0..p.h())
        .map(|i| s.block(i).add(&x.principal(p.cum_rank(i))))
        .collect::<Result<Vec<_>>>()?;
    Ok((HyperS(blocks), t.offset(mu)))
}

/// An invertible matrix that is block upper triangular for a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockUpperTriangular {
    m: CMatrix,
    log_abs_dets: Vec<f64>,
}

impl BlockUpperTriangular {
    pub fn new(p: &Partition, m: CMatrix) -> Result<Self> {
        let r = p.r();
        if m.shape() != (r, r) {
            return Err(Error::Dimension(format!("g is {}x{}, expected {r}x{r}", m.nrows(), m.ncols())));
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        for i in 0..p.h() {
            let lo = p.cum_rank(i);
            for row in lo..r {
                for col in p.prev_rank(i)..lo {
                    if m[(row, col)].norm() > 1e-14 * scale {
                        return Err(Error::domain(format!("g is not block upper triangular at ({row},{col})")));
                    }
                }
            }
        }
        if p.d() == 1 && m.iter().any(|z| z.im != 0.0) {
            return Err(Error::domain("g must be real for d = 1"));
        }
        let mut log_abs_dets = Vec::with_capacity(p.h());
        for i in 0..p.h() {
            let (o, k) = (p.prev_rank(i), p.block(i));
            let det = m.view((o, o), (k, k)).into_owned().determinant();
            if !(det.norm() > 0.0) || !det.norm().is_finite() {
                return Err(Error::Singular(format!("diagonal block {i} of g")));
            }
            log_abs_dets.push(det.norm().ln());
        }
        Ok(BlockUpperTriangular { m, log_abs_dets })
    }

    pub fn identity(p: &Partition) -> Self {
        BlockUpperTriangular { m: CMatrix::identity(p.r(), p.r()), log_abs_dets: vec![0.0; p.h()] }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// log|det g^(i)| of diagonal block i.
    pub fn log_abs_det_block(&self, i: usize) -> f64 {
        self.log_abs_dets[i]
    }

    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_dets.iter().sum()
    }
}

/// g·ξ = g ξ g*.
pub fn group_action(g: &BlockUpperTriangular, xi: &ConeElement) -> Result<ConeElement> {
    xi.cholesky()?;
    let out = xi.congruence(g.matrix())?;
    out.cholesky()?;
    Ok(out)
}

/// log χ_t(g) = Σ_i 2(t^(i) + n/r) log|det g^(i)|.
pub fn log_chi_multiplier(p: &Partition, t: &HyperT, g: &BlockUpperTriangular) -> Result<f64> {
    t.check(p)?;
    let ratio = p.cone().ratio();
    Ok((0..p.h()).map(|i| 2.0 * (t[i] + ratio) * g.log_abs_det_block(i)).sum())
}

pub fn chi_multiplier(p: &Partition, t: &HyperT, g: &BlockUpperTriangular) -> Result<f64> {
    Ok(log_chi_multiplier(p, t, g)?.exp())
}
