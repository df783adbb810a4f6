//! Wishart sampling, predictive densities and Monte Carlo risk estimates.
//!
//! Every outer sample j draws from its own ChaCha stream (seed, j), so the
//! estimates do not depend on how samples are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cone::{xi_to_phi, C64, CMatrix, ConeElement, Partition, PhiParam};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::priors::{log_prior_block, HyperS, HyperT};
use crate::risk::{part_risk_with_moments, LogDetMoments};
use crate::specfun::{ln_mvgamma_raw, ConeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub n_outer: usize,
    pub n_inner: usize,
    #[serde(default)]
    pub execution: Execution,
}

impl McConfig {
    pub fn new(seed: u64, n_outer: usize, n_inner: usize) -> Self {
        McConfig { seed, n_outer, n_inner, execution: Execution::default() }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn check(&self) -> Result<()> {
        if self.n_outer == 0 || self.n_inner == 0 {
            return Err(Error::domain("n_outer and n_inner must be at least 1"));
        }
        Ok(())
    }

    /// The random stream of outer sample `index`.
    pub fn stream(&self, index: usize) -> ChaCha8Rng {
        stream(self.seed, index as u64)
    }
}

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Number of (X, Y) pairs that entered the estimate.
    pub n_total: usize,
}

impl McEstimate {
    /// Mean and standard error of independent per-sample values, accumulated
    /// in index order.
    pub fn from_samples(values: &[f64], per_sample: usize) -> Self {
        let n = values.len();
        let (mut mean, mut m2) = (0.0, 0.0);
        for (j, &v) in values.iter().enumerate() {
            let delta = v - mean;
            mean += delta / (j + 1) as f64;
            m2 += delta * (v - mean);
        }
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        McEstimate { mean, std_error: (var / n as f64).sqrt(), n_total: n * per_sample }
    }

    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.std_error
    }

    /// |mean − target| ≤ k combined standard errors.
    pub fn agrees_with(&self, target: f64, target_se: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * (self.std_error.powi(2) + target_se.powi(2)).sqrt()
    }
}

/// Draws from W_r(μ, ξ) by the Bartlett construction X = (CT)(CT)*, where
/// ξ = LL*, C = L⁻*, T lower triangular with T_ii² ~ Gamma(μ − (i−1)d/2, 1)
/// and off-diagonal entries with independent N(0, 1/2) real components.
#[derive(Debug, Clone)]
pub struct WishartSampler {
    d: u32,
    c: CMatrix,
    diag: Vec<Gamma<f64>>,
}

impl WishartSampler {
    pub fn new(cone: ConeSpec, mu: f64, xi: &ConeElement) -> Result<Self> {
        cone.check_domain(mu, "mu")?;
        if xi.rank() != cone.r() || xi.d() != cone.d() {
            return Err(Error::Dimension(format!("xi has rank {}, expected {}", xi.rank(), cone.r())));
        }
        let c = xi.cholesky()?.l_inverse().adjoint();
        let hd = cone.d() as f64 / 2.0;
        let diag = (0..cone.r())
            .map(|i| Gamma::new(mu - i as f64 * hd, 1.0).map_err(|e| Error::domain(e.to_string())))
            .collect::<Result<_>>()?;
        Ok(WishartSampler { d: cone.d(), c, diag })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ConeElement {
        let r = self.diag.len();
        let mut t = CMatrix::zeros(r, r);
        for i in 0..r {
            t[(i, i)] = C64::new(self.diag[i].sample(rng).sqrt(), 0.0);
            for j in 0..i {
                let re: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
                let im = if self.d == 2 {
                    rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2
                } else {
                    0.0
                };
                t[(i, j)] = C64::new(re, im);
            }
        }
        let f = &self.c * t;
        ConeElement::from_hermitian(self.d, &f * f.adjoint())
    }
}

/// One draw from W_r(μ, ξ).
pub fn sample_wishart<R: Rng + ?Sized>(cone: ConeSpec, mu: f64, xi: &ConeElement, rng: &mut R) -> Result<ConeElement> {
    Ok(WishartSampler::new(cone, mu, xi)?.sample(rng))
}

/// (μ − n/r) log|x| − log Γ_r(μ) + μ log|ξ| − ⟨ξ|x⟩.
pub fn log_wishart_density(cone: ConeSpec, mu: f64, xi: &ConeElement, x: &ConeElement) -> Result<f64> {
    cone.check_domain(mu, "mu")?;
    if xi.rank() != cone.r() || x.rank() != cone.r() {
        return Err(Error::Dimension("xi and x must have the cone's rank".into()));
    }
    let lx = x.log_det()?;
    let lxi = xi.log_det()?;
    Ok((mu - cone.ratio()) * lx - ln_mvgamma_raw(cone.d(), cone.r(), mu) + mu * lxi - xi.inner(x))
}

/// Closed-form Bayesian predictive density δ(y|x) for fixed (s, t, μ, ν).
#[derive(Debug, Clone)]
pub struct PredictiveDensity {
    p: Partition,
    s: HyperS,
    nu: f64,
    /// (a, b) per block; b is None for the leading block.
    shapes: Vec<(f64, Option<f64>)>,
    /// Σ_i log Γ_k(a + ν) − log Γ_k(a).
    gamma_const: f64,
    ln_gamma_nu: f64,
}

/// Log-determinants of s^(i) + m_(i) and of its leading r_(i−1) block, per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLogDets(Vec<(f64, f64)>);

impl PredictiveDensity {
    pub fn new(p: &Partition, s: &HyperS, t: &HyperT, mu: f64, nu: f64) -> Result<Self> {
        t.check(p)?;
        s.check(p)?;
        p.cone().check_domain(mu, "mu")?;
        p.cone().check_domain(nu, "nu")?;
        if !t.in_domain(p, mu) {
            return Err(Error::domain(format!("t = {:?} gives an improper posterior at mu = {mu}", t.values())));
        }
        let d = p.d();
        let mut shapes = Vec::with_capacity(p.h());
        let mut gamma_const = 0.0;
        for i in 0..p.h() {
            let a = mu + (t[i] + p.ratio(i));
            let b = p.prev_ratio(i).map(|pr| mu + (t[i] + pr));
            gamma_const += ln_mvgamma_raw(d, p.block(i), a + nu) - ln_mvgamma_raw(d, p.block(i), a);
            shapes.push((a, b));
        }
        Ok(PredictiveDensity {
            p: p.clone(),
            s: s.clone(),
            nu,
            shapes,
            gamma_const,
            ln_gamma_nu: ln_mvgamma_raw(d, p.r(), nu),
        })
    }

    /// log|s^(i) + m_(i)| and log|s^(i)_1 + m_(i−1)| for every block.
    pub fn block_log_dets(&self, m: &ConeElement) -> Result<BlockLogDets> {
        let p = &self.p;
        if self.s.is_zero() {
            let dets = m.cholesky()?.leading_log_dets();
            return Ok(BlockLogDets(
                (0..p.h())
                    .map(|i| {
                        let r0 = p.prev_rank(i);
                        (dets[p.cum_rank(i) - 1], if r0 > 0 { dets[r0 - 1] } else { 0.0 })
                    })
                    .collect(),
            ));
        }
        let mut out = Vec::with_capacity(p.h());
        for i in 0..p.h() {
            let sm = self.s.block(i).add(&m.principal(p.cum_rank(i)))?;
            let dets = sm.cholesky()?.leading_log_dets();
            let r0 = p.prev_rank(i);
            out.push((dets[dets.len() - 1], if r0 > 0 { dets[r0 - 1] } else { 0.0 }));
        }
        Ok(BlockLogDets(out))
    }

    /// Σ_i [−(a+ν)L_i(s+x+y) + a L_i(s+x) + (b+ν)L1_i(s+x+y) − b L1_i(s+x)]
    /// plus the gamma constants: log δ minus the terms that depend on y alone.
    pub fn log_ratio_terms(&self, sx: &BlockLogDets, sxy: &BlockLogDets) -> f64 {
        let nu = self.nu;
        let mut v = self.gamma_const;
        for (i, &(a, b)) in self.shapes.iter().enumerate() {
            let (lxy, lxy1) = sxy.0[i];
            let (lx, lx1) = sx.0[i];
            v += -(a + nu) * lxy + a * lx;
            if let Some(b) = b {
                v += (b + nu) * lxy1 - b * lx1;
            }
        }
        v
    }

    pub fn log_density(&self, x: &ConeElement, y: &ConeElement) -> Result<f64> {
        let xy = x.add(y)?;
        let head = (self.nu - self.p.cone().ratio()) * y.log_det()? - self.ln_gamma_nu;
        Ok(head + self.log_ratio_terms(&self.block_log_dets(x)?, &self.block_log_dets(&xy)?))
    }
}

/// log δ(y|x) in closed form.
pub fn log_predictive_density(
    p: &Partition,
    s: &HyperS,
    t: &HyperT,
    mu: f64,
    nu: f64,
    x: &ConeElement,
    y: &ConeElement,
) -> Result<f64> {
    PredictiveDensity::new(p, s, t, mu, nu)?.log_density(x, y)
}

/// log δ(y|x) rebuilt from log p^ν(y|ξ₀) and the per-block identity for
/// −log(δ_i/p_i) at an arbitrary reference point φ₀; the result must not
/// depend on φ₀.
#[allow(clippy::too_many_arguments)]
pub fn log_predictive_density_via_reference(
    p: &Partition,
    s: &HyperS,
    t: &HyperT,
    mu: f64,
    nu: f64,
    x: &ConeElement,
    y: &ConeElement,
    xi_ref: &ConeElement,
) -> Result<f64> {
    let dens = PredictiveDensity::new(p, s, t, mu, nu)?;
    let phi = xi_to_phi(p, xi_ref)?;
    let log_p = log_wishart_density(p.cone(), nu, xi_ref, y)?;
    let sx = dens.block_log_dets(x)?;
    let sxy = dens.block_log_dets(&x.add(y)?)?;
    let mut rhs = -dens.log_ratio_terms(&sx, &sxy);
    for i in 0..p.h() {
        // ν log|ξ^(i)_0| − (⟨ζ_i|y_(i)⟩ − ⟨ζ_{i−1}|y_(i−1)⟩), written as the
        // block prior exponent with t = ν and s = y_(i).
        let y_i = y.principal(p.cum_rank(i));
        rhs += log_prior_block(p, i, &y_i, nu, &phi)?;
    }
    Ok(log_p - rhs)
}

/// Per-X cache: block log-dets of s + x.
struct OuterDraw {
    x: ConeElement,
    sx: BlockLogDets,
}

fn loss_parts(
    dens: &[PredictiveDensity],
    xi: &ConeElement,
    nu: f64,
    log_det_xi: f64,
    outer: &OuterDraw,
    y: &ConeElement,
    out: &mut [f64],
) -> Result<()> {
    // log p^ν(y|ξ) − log δ(y|x): the (ν − n/r) log|y| − log Γ_r(ν) parts cancel.
    let base = nu * log_det_xi - xi.inner(y);
    let xy = outer.x.add(y)?;
    let mut shared: Option<BlockLogDets> = None;
    for (o, d) in out.iter_mut().zip(dens) {
        let sxy = if d.s.is_zero() {
            shared.get_or_insert_with(|| d.block_log_dets(&xy).expect("x + y is positive definite")).clone()
        } else {
            d.block_log_dets(&xy)?
        };
        *o += base - d.log_ratio_terms(&outer.sx, &sxy);
    }
    Ok(())
}

/// Monte Carlo risk for several hyperparameters t sharing the same draws.
#[allow(clippy::too_many_arguments)]
pub fn mc_risk_batch(
    p: &Partition,
    s: &HyperS,
    ts: &[HyperT],
    mu: f64,
    nu: f64,
    xi: &ConeElement,
    cfg: &McConfig,
) -> Result<Vec<McEstimate>> {
    cfg.check()?;
    let dens = ts
        .iter()
        .map(|t| PredictiveDensity::new(p, s, t, mu, nu))
        .collect::<Result<Vec<_>>>()?;
    let sx_sampler = WishartSampler::new(p.cone(), mu, xi)?;
    let sy_sampler = WishartSampler::new(p.cone(), nu, xi)?;
    let log_det_xi = xi.log_det()?;
    let m = ts.len();

    let per_outer = map_indexed(cfg.n_outer, cfg.execution, |j| -> Result<Vec<f64>> {
        let mut rng = cfg.stream(j);
        let x = sx_sampler.sample(&mut rng);
        let sx = dens.first().map(|d| d.block_log_dets(&x)).transpose()?;
        let mut acc = vec![0.0; m];
        if let Some(sx) = sx {
            // s is shared by all densities, so one set of log-dets serves them all
            let outer = OuterDraw { x, sx };
            for _ in 0..cfg.n_inner {
                let y = sy_sampler.sample(&mut rng);
                loss_parts(&dens, xi, nu, log_det_xi, &outer, &y, &mut acc)?;
            }
        }
        acc.iter_mut().for_each(|v| *v /= cfg.n_inner as f64);
        Ok(acc)
    });
    let per_outer = per_outer.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..m)
        .map(|k| {
            let col: Vec<f64> = per_outer.iter().map(|row| row[k]).collect();
            McEstimate::from_samples(&col, cfg.n_inner)
        })
        .collect())
}

/// Monte Carlo estimate of E[log p^ν(Y|ξ) − log δ(Y|X)].
pub fn mc_risk(
    p: &Partition,
    s: &HyperS,
    t: &HyperT,
    mu: f64,
    nu: f64,
    xi: &ConeElement,
    cfg: &McConfig,
) -> Result<McEstimate> {
    Ok(mc_risk_batch(p, s, std::slice::from_ref(t), mu, nu, xi, cfg)?.remove(0))
}

/// The general-s risk formula with its log-determinant expectations replaced
/// by sample means over n_outer independent (X, Y) pairs. Only n_outer is
/// used from `cfg`.
pub fn mc_risk_via_moments(
    p: &Partition,
    s: &HyperS,
    t: &HyperT,
    mu: f64,
    nu: f64,
    xi: &ConeElement,
    cfg: &McConfig,
) -> Result<McEstimate> {
    cfg.check()?;
    let dens = PredictiveDensity::new(p, s, t, mu, nu)?;
    let phi: PhiParam = xi_to_phi(p, xi)?;
    let sx_sampler = WishartSampler::new(p.cone(), mu, xi)?;
    let sy_sampler = WishartSampler::new(p.cone(), nu, xi)?;
    // Constant part: the formula evaluated with all four expectations set to 0.
    let zero = LogDetMoments { sxy: 0.0, sx: 0.0, s1xy: 0.0, s1x: 0.0 };
    let mut constant = 0.0;
    for i in 0..p.h() {
        constant += part_risk_with_moments(p, i, t[i], mu, nu, phi.xi_0(i).log_det()?, &zero)?;
    }
    let samples = map_indexed(cfg.n_outer, cfg.execution, |j| -> Result<f64> {
        let mut rng = cfg.stream(j);
        let x = sx_sampler.sample(&mut rng);
        let y = sy_sampler.sample(&mut rng);
        let sx = dens.block_log_dets(&x)?;
        let sxy = dens.block_log_dets(&x.add(&y)?)?;
        // the linear part of the formula is minus the y-free part of log δ
        Ok(-(dens.log_ratio_terms(&sx, &sxy) - dens.gamma_const))
    });
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let est = McEstimate::from_samples(&samples, 1);
    Ok(McEstimate { mean: constant + est.mean, ..est })
}

/// Sample mean and standard error of each entry of X, plus of log|X|.
pub fn moment_check(cone: ConeSpec, mu: f64, xi: &ConeElement, n: usize, seed: u64, exec: Execution) -> Result<SampleMoments> {
    let sampler = WishartSampler::new(cone, mu, xi)?;
    let draws = map_indexed(n, exec, |j| {
        let x = sampler.sample(&mut stream(seed, j as u64));
        let ld = x.log_det().unwrap_or(f64::NAN);
        (x, ld)
    });
    Ok(SampleMoments::from_draws(&draws))
}

/// Entrywise sample means and standard errors of Wishart draws.
#[derive(Debug, Clone)]
pub struct SampleMoments {
    pub mean: CMatrix,
    /// Standard errors of the real and imaginary parts, entrywise.
    pub se_re: DMatrixF,
    pub se_im: DMatrixF,
    pub log_det: McEstimate,
}

pub type DMatrixF = nalgebra::DMatrix<f64>;

impl SampleMoments {
    pub fn from_draws(draws: &[(ConeElement, f64)]) -> Self {
        let r = draws[0].0.rank();
        let mut mean = CMatrix::zeros(r, r);
        let mut se_re = DMatrixF::zeros(r, r);
        let mut se_im = DMatrixF::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                let re: Vec<f64> = draws.iter().map(|(x, _)| x.get(i, j).re).collect();
                let im: Vec<f64> = draws.iter().map(|(x, _)| x.get(i, j).im).collect();
                let (er, ei) = (McEstimate::from_samples(&re, 1), McEstimate::from_samples(&im, 1));
                mean[(i, j)] = C64::new(er.mean, ei.mean);
                se_re[(i, j)] = er.std_error;
                se_im[(i, j)] = ei.std_error;
            }
        }
        let lds: Vec<f64> = draws.iter().map(|(_, l)| *l).collect();
        SampleMoments { mean, se_re, se_im, log_det: McEstimate::from_samples(&lds, 1) }
    }

    /// Largest |mean − target| / SE over entries (zero-SE entries must match exactly).
    pub fn max_z(&self, target: &CMatrix) -> f64 {
        let mut z: f64 = 0.0;
        for i in 0..self.mean.nrows() {
            for j in 0..self.mean.ncols() {
                let diff = self.mean[(i, j)] - target[(i, j)];
                for (dv, se) in [(diff.re, self.se_re[(i, j)]), (diff.im, self.se_im[(i, j)])] {
                    if se > 0.0 {
                        z = z.max(dv.abs() / se);
                    } else if dv.abs() > 1e-12 * (1.0 + target[(i, j)].norm()) {
                        z = f64::INFINITY;
                    }
                }
            }
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::{canonical_hyperparams, PriorKind};
    use crate::risk::exact_risk;

    #[test]
    fn scalar_density_example() {
        let c = ConeSpec::real(1);
        let one = ConeElement::identity(1, 1);
        assert!((log_wishart_density(c, 1.0, &one, &one).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn streams_are_deterministic() {
        let p = Partition::split(ConeSpec::real(2), 1).unwrap();
        let t = canonical_hyperparams(&p, PriorKind::RightInvariant);
        let xi = ConeElement::identity(1, 2);
        let cfg = McConfig::new(11, 200, 2);
        let a = mc_risk(&p, &HyperS::zero(&p), &t, 1.0, 1.0, &xi, &cfg).unwrap();
        let b = mc_risk(&p, &HyperS::zero(&p), &t, 1.0, 1.0, &xi, &cfg.with_execution(Execution::Sequential)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_total, 400);
    }

    #[test]
    fn small_mc_is_close_to_exact() {
        let p = Partition::whole(ConeSpec::real(1));
        let t = HyperT(vec![-1.0]);
        let xi = ConeElement::from_rows(&[&[0.3]]).unwrap();
        let est = mc_risk(&p, &HyperS::zero(&p), &t, 2.0, 1.0, &xi, &McConfig::new(5, 20000, 2)).unwrap();
        let exact = exact_risk(&p, &t, 2.0, 1.0).unwrap().total;
        assert!(est.z_score(exact).abs() < 4.0, "{est:?} vs {exact}");
    }

    #[test]
    fn rejects_bad_config() {
        let p = Partition::whole(ConeSpec::real(1));
        let xi = ConeElement::identity(1, 1);
        let t = HyperT(vec![-1.0]);
        assert!(mc_risk(&p, &HyperS::zero(&p), &t, 1.0, 1.0, &xi, &McConfig::new(1, 0, 1)).is_err());
        // posterior t + μ must stay in the proper domain
        assert!(mc_risk(&p, &HyperS::zero(&p), &HyperT(vec![-2.5]), 1.0, 1.0, &xi, &McConfig::new(1, 1, 1)).is_err());
    }
}
