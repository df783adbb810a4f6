//! Positive definite symmetric / Hermitian matrices, partitions of the
//! rank, and the block Schur-complement coordinates ξ ↔ φ.
//!
//! Blocks of a partition are indexed from 0 in this API; block 0 is the
//! leading one, whose scale parameter is the innermost Schur complement ζ₁.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::specfun::ConeSpec;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

const HERMITIAN_TOL: f64 = 1e-12;

/// An ordered split k = (k^(1), ..., k^(h)) of the rank r.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    cone: ConeSpec,
    blocks: Vec<usize>,
}

impl Partition {
    pub fn new(cone: ConeSpec, blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::domain("partition needs at least one block"));
        }
        if blocks.contains(&0) {
            return Err(Error::domain("partition blocks must be positive"));
        }
        let total: usize = blocks.iter().sum();
        if total != cone.r() {
            return Err(Error::domain(format!(
                "partition blocks sum to {total}, rank is {}",
                cone.r()
            )));
        }
        Ok(Partition { cone, blocks })
    }

    /// The trivial partition with a single block.
    pub fn whole(cone: ConeSpec) -> Self {
        Partition { cone, blocks: vec![cone.r()] }
    }

    /// Two blocks (k, r − k).
    pub fn split(cone: ConeSpec, k: usize) -> Result<Self> {
        if k == 0 || k >= cone.r() {
            return Err(Error::domain(format!("split k must satisfy 0 < k < r = {}, got {k}", cone.r())));
        }
        Partition::new(cone, vec![k, cone.r() - k])
    }

    /// Every ordered partition of the rank.
    pub fn all(cone: ConeSpec) -> Vec<Partition> {
        compositions(cone.r())
            .into_iter()
            .map(|blocks| Partition { cone, blocks })
            .collect()
    }

    pub fn cone(&self) -> ConeSpec {
        self.cone
    }

    pub fn d(&self) -> u32 {
        self.cone.d()
    }

    pub fn r(&self) -> usize {
        self.cone.r()
    }

    pub fn h(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// k^(i).
    pub fn block(&self, i: usize) -> usize {
        self.blocks[i]
    }

    /// r_(i) = k^(1) + ... + k^(i), through block `i` inclusive.
    pub fn cum_rank(&self, i: usize) -> usize {
        self.blocks[..=i].iter().sum()
    }

    /// r_(i-1), zero for the leading block.
    pub fn prev_rank(&self, i: usize) -> usize {
        self.blocks[..i].iter().sum()
    }

    /// n_(i) = r_(i) + r_(i)(r_(i) − 1)d/2.
    pub fn cum_dim(&self, i: usize) -> usize {
        dim(self.d(), self.cum_rank(i))
    }

    /// n_(i-1).
    pub fn prev_dim(&self, i: usize) -> usize {
        dim(self.d(), self.prev_rank(i))
    }

    /// m^(i) = k^(i) + k^(i)(k^(i) − 1)d/2.
    pub fn block_dim(&self, i: usize) -> usize {
        dim(self.d(), self.blocks[i])
    }

    /// n_(i)/r_(i) written as (r_(i) − 1)d/2 + 1.
    pub fn ratio(&self, i: usize) -> f64 {
        (self.cum_rank(i) as f64 - 1.0) * self.cone.half_d() + 1.0
    }

    /// n_(i-1)/r_(i-1); undefined (None) for the leading block.
    pub fn prev_ratio(&self, i: usize) -> Option<f64> {
        (i > 0).then(|| (self.prev_rank(i) as f64 - 1.0) * self.cone.half_d() + 1.0)
    }

    /// (r_(i) − k^(i))d/2, the shift in the domain bound of block `i`.
    pub fn offset(&self, i: usize) -> f64 {
        self.prev_rank(i) as f64 * self.cone.half_d()
    }

    /// Cone of rank r_(i).
    pub fn cum_cone(&self, i: usize) -> ConeSpec {
        ConeSpec::new(self.d(), self.cum_rank(i)).expect("positive rank")
    }

    /// Cone of rank k^(i).
    pub fn block_cone(&self, i: usize) -> ConeSpec {
        ConeSpec::new(self.d(), self.blocks[i]).expect("positive rank")
    }
}

fn dim(d: u32, r: usize) -> usize {
    if r == 0 {
        0
    } else {
        r + r * (r - 1) * d as usize / 2
    }
}

fn compositions(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=r {
        for mut rest in compositions(r - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Lower-triangular Cholesky factor with a strictly positive real diagonal.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: CMatrix,
}

impl Cholesky {
    /// Factor a Hermitian matrix without pivoting. Fails on the first
    /// non-positive pivot.
    pub fn new(a: &CMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("{}x{} is not square", n, a.ncols())));
        }
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a[(j, j)].re;
            for k in 0..j {
                diag -= l[(j, k)].norm_sqr();
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::not_pd(&format!("pivot {j} is {diag:.3e}")));
            }
            let ljj = diag.sqrt();
            l[(j, j)] = C64::new(ljj, 0.0);
            for i in j + 1..n {
                let mut v = a[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = v / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn l(&self) -> &CMatrix {
        &self.l
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.l.nrows()).map(|j| self.l[(j, j)].re.ln()).sum::<f64>()
    }

    /// log|A_(k)| for every leading principal block; entry k−1 is rank k.
    pub fn leading_log_dets(&self) -> Vec<f64> {
        let mut acc = 0.0;
        (0..self.l.nrows())
            .map(|j| {
                acc += 2.0 * self.l[(j, j)].re.ln();
                acc
            })
            .collect()
    }

    /// L⁻¹ by forward substitution.
    pub fn l_inverse(&self) -> CMatrix {
        let n = self.l.nrows();
        let mut inv = CMatrix::zeros(n, n);
        for c in 0..n {
            inv[(c, c)] = C64::new(1.0 / self.l[(c, c)].re, 0.0);
            for i in c + 1..n {
                let mut v = C64::new(0.0, 0.0);
                for k in c..i {
                    v -= self.l[(i, k)] * inv[(k, c)];
                }
                inv[(i, c)] = v / self.l[(i, i)].re;
            }
        }
        inv
    }

    /// A⁻¹ = L⁻* L⁻¹.
    pub fn inverse(&self) -> CMatrix {
        let li = self.l_inverse();
        li.adjoint() * li
    }
}

/// A real symmetric (d = 1) or complex Hermitian (d = 2) matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeElement {
    d: u32,
    m: CMatrix,
}

impl ConeElement {
    /// Validates Hermitian symmetry to a relative tolerance of 1e-12 and
    /// stores the exactly symmetrized matrix.
    pub fn new(d: u32, m: CMatrix) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::domain(format!("d must be 1 or 2, got {d}")));
        }
        let n = m.nrows();
        if m.ncols() != n || n == 0 {
            return Err(Error::Dimension(format!("{}x{} is not a non-empty square matrix", n, m.ncols())));
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let tol = HERMITIAN_TOL * scale;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Encoding("matrix has non-finite entries".into()));
        }
        for i in 0..n {
            for j in 0..=i {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                    return Err(Error::Encoding(format!("matrix is not Hermitian at ({i},{j})")));
                }
                if d == 1 && m[(i, j)].im.abs() > tol {
                    return Err(Error::Encoding(format!("real cone element has imaginary entry at ({i},{j})")));
                }
            }
        }
        let mut sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        if d == 1 {
            sym.iter_mut().for_each(|z| z.im = 0.0);
        }
        for i in 0..n {
            sym[(i, i)].im = 0.0;
        }
        Ok(ConeElement { d, m: sym })
    }

    /// Trusted constructor; symmetrizes without validation.
    pub(crate) fn from_hermitian(d: u32, m: CMatrix) -> Self {
        let mut sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        if d == 1 {
            sym.iter_mut().for_each(|z| z.im = 0.0);
        }
        ConeElement { d, m: sym }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        ConeElement::new(1, m.map(|v| C64::new(v, 0.0)))
    }

    /// Real symmetric matrix from rows.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("rows must form a square matrix".into()));
        }
        ConeElement::from_real(&DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(d: u32, r: usize) -> Self {
        ConeElement { d, m: CMatrix::identity(r, r) }
    }

    pub fn zeros(d: u32, r: usize) -> Self {
        ConeElement { d, m: CMatrix::zeros(r, r) }
    }

    pub fn scaled_identity(d: u32, r: usize, c: f64) -> Self {
        ConeElement { d, m: CMatrix::identity(r, r) * C64::new(c, 0.0) }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.m.nrows()
    }

    pub fn cone(&self) -> ConeSpec {
        ConeSpec::new(self.d, self.rank()).expect("validated at construction")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::new(&self.m)
    }

    pub fn is_pd(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// log|x| through the Cholesky factor.
    pub fn log_det(&self) -> Result<f64> {
        Ok(self.cholesky()?.log_det())
    }

    pub fn inverse(&self) -> Result<ConeElement> {
        let inv = self.cholesky()?.inverse();
        Ok(ConeElement::from_hermitian(self.d, inv))
    }

    /// Leading principal k×k block x_(k).
    pub fn principal(&self, k: usize) -> ConeElement {
        ConeElement { d: self.d, m: self.m.view((0, 0), (k, k)).into_owned() }
    }

    /// ⟨x|y⟩ = Re tr(xy).
    pub fn inner(&self, other: &ConeElement) -> f64 {
        let n = self.rank();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.m[(i, j)] * other.m[(j, i)]).re;
            }
        }
        acc
    }

    pub fn trace(&self) -> f64 {
        (0..self.rank()).map(|i| self.m[(i, i)].re).sum()
    }

    /// g x g*.
    pub fn congruence(&self, g: &CMatrix) -> Result<ConeElement> {
        if g.ncols() != self.rank() {
            return Err(Error::Dimension(format!(
                "cannot form g x g* with g {}x{} and x of rank {}",
                g.nrows(),
                g.ncols(),
                self.rank()
            )));
        }
        Ok(ConeElement::from_hermitian(self.d, g * &self.m * g.adjoint()))
    }

    pub fn add(&self, other: &ConeElement) -> Result<ConeElement> {
        if self.rank() != other.rank() {
            return Err(Error::Dimension(format!("rank {} plus rank {}", self.rank(), other.rank())));
        }
        Ok(ConeElement { d: self.d.max(other.d), m: &self.m + &other.m })
    }

    pub fn scale(&self, c: f64) -> ConeElement {
        ConeElement { d: self.d, m: &self.m * C64::new(c, 0.0) }
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &ConeElement) -> f64 {
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Array-of-rows encoding; complex entries as [re, im] when d = 2.
    pub fn to_json(&self) -> Value {
        matrix_to_json(&self.m, self.d == 2)
    }

    pub fn from_json(d: u32, v: &Value) -> Result<Self> {
        ConeElement::new(d, matrix_from_json(v)?)
    }

    pub fn from_json_str(d: u32, s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::Encoding(e.to_string()))?;
        ConeElement::from_json(d, &v)
    }
}

impl Serialize for ConeElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Array-of-rows encoding of an arbitrary (possibly rectangular) matrix.
pub fn matrix_to_json(m: &CMatrix, complex: bool) -> Value {
    let rows = (0..m.nrows())
        .map(|i| {
            Value::Array(
                (0..m.ncols())
                    .map(|j| {
                        let z = m[(i, j)];
                        if complex {
                            serde_json::json!([z.re, z.im])
                        } else {
                            serde_json::json!(z.re)
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

pub fn matrix_from_json(v: &Value) -> Result<CMatrix> {
    let rows = v.as_array().ok_or_else(|| Error::Encoding("matrix must be an array of rows".into()))?;
    if rows.is_empty() {
        return Err(Error::Encoding("matrix has no rows".into()));
    }
    let mut data = Vec::new();
    let mut ncols = None;
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::Encoding(format!("row {i} is not an array")))?;
        match ncols {
            None => ncols = Some(row.len()),
            Some(c) if c != row.len() => return Err(Error::Encoding(format!("row {i} has {} entries, expected {c}", row.len()))),
            _ => {}
        }
        for (j, e) in row.iter().enumerate() {
            data.push(entry_from_json(e).ok_or_else(|| Error::Encoding(format!("bad entry at ({i},{j})")))?);
        }
    }
    let ncols = ncols.unwrap_or(0);
    if ncols == 0 {
        return Err(Error::Encoding("matrix has no columns".into()));
    }
    Ok(CMatrix::from_row_slice(rows.len(), ncols, &data))
}

fn entry_from_json(e: &Value) -> Option<C64> {
    match e {
        Value::Number(n) => Some(C64::new(n.as_f64()?, 0.0)),
        Value::Array(p) if p.len() == 2 => Some(C64::new(p[0].as_f64()?, p[1].as_f64()?)),
        _ => None,
    }
}

/// Top-left Schur complement x₁ − x_{1/2} x₀⁻¹ x_{1/2}* for the split
/// after row `split`.
pub fn schur_complement(x: &ConeElement, split: usize) -> Result<ConeElement> {
    let r = x.rank();
    if split == 0 || split >= r {
        return Err(Error::domain(format!("split must satisfy 0 < split < {r}, got {split}")));
    }
    let (x1, xh, x0) = blocks_of(x, split);
    let x0_inv = ConeElement::from_hermitian(x.d, x0).inverse()?;
    let s = x1 - &xh * x0_inv.matrix() * xh.adjoint();
    let s = ConeElement::from_hermitian(x.d, s);
    s.cholesky()?;
    Ok(s)
}

fn blocks_of(x: &ConeElement, split: usize) -> (CMatrix, CMatrix, CMatrix) {
    let r = x.rank();
    let m = x.matrix();
    (
        m.view((0, 0), (split, split)).into_owned(),
        m.view((0, split), (split, r - split)).into_owned(),
        m.view((split, split), (r - split, r - split)).into_owned(),
    )
}

/// Off-diagonal and diagonal parts (ξ^(i)_{1/2}, ξ^(i)_0) of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiBlock {
    /// r_(i−1) × k^(i).
    pub xi_half: CMatrix,
    pub xi_0: ConeElement,
}

/// Conditionally reduced coordinates (ζ₁, {ξ^(i)_{1/2}, ξ^(i)_0}_{i≥2}).
#[derive(Debug, Clone, PartialEq)]
pub struct PhiParam {
    pub zeta_1: ConeElement,
    /// Entry j corresponds to partition block j + 1.
    pub blocks: Vec<PhiBlock>,
}

impl PhiParam {
    /// ξ^(i)_0 for 0-based block `i`; ζ₁ stands in for the leading block.
    pub fn xi_0(&self, i: usize) -> &ConeElement {
        if i == 0 {
            &self.zeta_1
        } else {
            &self.blocks[i - 1].xi_0
        }
    }

    pub fn xi_half(&self, i: usize) -> Option<&CMatrix> {
        (i > 0).then(|| &self.blocks[i - 1].xi_half)
    }

    /// All-identity coordinates, the image of ξ = I.
    pub fn identity(p: &Partition) -> Self {
        let d = p.d();
        PhiParam {
            zeta_1: ConeElement::identity(d, p.block(0)),
            blocks: (1..p.h())
                .map(|i| PhiBlock {
                    xi_half: CMatrix::zeros(p.prev_rank(i), p.block(i)),
                    xi_0: ConeElement::identity(d, p.block(i)),
                })
                .collect(),
        }
    }

    fn check(&self, p: &Partition) -> Result<()> {
        if self.blocks.len() + 1 != p.h() || self.zeta_1.rank() != p.block(0) {
            return Err(Error::Dimension("phi does not match the partition".into()));
        }
        for (j, b) in self.blocks.iter().enumerate() {
            let i = j + 1;
            if b.xi_0.rank() != p.block(i) || b.xi_half.shape() != (p.prev_rank(i), p.block(i)) {
                return Err(Error::Dimension(format!("phi block {i} has the wrong shape")));
            }
        }
        Ok(())
    }
}

/// ζ_(i) for every block, from ξ = ζ_(h) down to ζ_(1).
pub fn nested_schur(p: &Partition, xi: &ConeElement) -> Result<Vec<ConeElement>> {
    check_rank(p, xi)?;
    xi.cholesky()?;
    let h = p.h();
    let mut zetas = vec![xi.clone(); h];
    for i in (1..h).rev() {
        zetas[i - 1] = schur_complement(&zetas[i], p.prev_rank(i))?;
    }
    Ok(zetas)
}

fn check_rank(p: &Partition, xi: &ConeElement) -> Result<()> {
    if xi.rank() != p.r() {
        return Err(Error::Dimension(format!("matrix rank {} vs partition rank {}", xi.rank(), p.r())));
    }
    Ok(())
}

/// ξ ↦ φ.
pub fn xi_to_phi(p: &Partition, xi: &ConeElement) -> Result<PhiParam> {
    let zetas = nested_schur(p, xi)?;
    let blocks = (1..p.h())
        .map(|i| {
            let (_, xh, x0) = blocks_of(&zetas[i], p.prev_rank(i));
            PhiBlock { xi_half: xh, xi_0: ConeElement::from_hermitian(xi.d, x0) }
        })
        .collect();
    Ok(PhiParam { zeta_1: zetas[0].clone(), blocks })
}

/// φ ↦ ξ, rebuilding ζ_(i) = [[ζ_(i−1) + ξ_{1/2} ξ₀⁻¹ ξ_{1/2}*, ξ_{1/2}], [ξ_{1/2}*, ξ₀]].
pub fn phi_to_xi(p: &Partition, phi: &PhiParam) -> Result<ConeElement> {
    phi.check(p)?;
    let d = p.d();
    phi.zeta_1.cholesky()?;
    let mut zeta = phi.zeta_1.matrix().clone();
    for (j, b) in phi.blocks.iter().enumerate() {
        let i = j + 1;
        let x0_inv = b.xi_0.inverse()?;
        let (r0, k) = (p.prev_rank(i), p.block(i));
        let upper = &zeta + &b.xi_half * x0_inv.matrix() * b.xi_half.adjoint();
        let mut next = CMatrix::zeros(r0 + k, r0 + k);
        next.view_mut((0, 0), (r0, r0)).copy_from(&upper);
        next.view_mut((0, r0), (r0, k)).copy_from(&b.xi_half);
        next.view_mut((r0, 0), (k, r0)).copy_from(&b.xi_half.adjoint());
        next.view_mut((r0, r0), (k, k)).copy_from(b.xi_0.matrix());
        zeta = next;
    }
    Ok(ConeElement::from_hermitian(d, zeta))
}

/// G G* + 10⁻³ I with i.i.d. standard normal entries of G (real and
/// imaginary parts independent when d = 2).
pub fn random_pd<R: Rng + ?Sized>(d: u32, r: usize, rng: &mut R) -> ConeElement {
    let g = CMatrix::from_fn(r, r, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if d == 2 { rng.sample(StandardNormal) } else { 0.0 };
        C64::new(re, im)
    });
    let m = &g * g.adjoint() + CMatrix::identity(r, r) * C64::new(1e-3, 0.0);
    ConeElement::from_hermitian(d, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partition_bookkeeping() {
        let p = Partition::new(ConeSpec::complex(5), vec![2, 1, 2]).unwrap();
        assert_eq!((p.cum_rank(1), p.prev_rank(1)), (3, 2));
        assert_eq!(p.cum_dim(1), 9);
        assert_eq!(p.prev_dim(0), 0);
        assert_eq!(p.block_dim(2), 4);
        assert_eq!(p.ratio(2), 5.0);
        assert_eq!(p.prev_ratio(0), None);
        assert_eq!(p.prev_ratio(2), Some(3.0));
        assert!(Partition::new(ConeSpec::real(3), vec![1, 1]).is_err());
        assert_eq!(Partition::all(ConeSpec::real(4)).len(), 8);
    }

    #[test]
    fn log_det_examples() {
        assert!(ConeElement::identity(1, 2).log_det().unwrap().abs() < 1e-15);
        let x = ConeElement::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        assert!((x.log_det().unwrap() - 3f64.ln()).abs() < 1e-14);
        let i = C64::new(0.0, 1.0);
        let two = C64::new(2.0, 0.0);
        let m = CMatrix::from_row_slice(2, 2, &[two, i, -i, two]);
        let x = ConeElement::new(2, m).unwrap();
        assert!((x.log_det().unwrap() - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_non_pd() {
        assert!(ConeElement::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).is_err());
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        assert!(ConeElement::new(1, CMatrix::from_row_slice(2, 2, &[one, i, -i, one])).is_err());
        let x = ConeElement::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(!x.is_pd());
        assert!(matches!(x.log_det(), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn json_round_trip() {
        let x = ConeElement::from_json_str(2, "[[2, [0, 1]], [[0, -1], 2]]").unwrap();
        assert!((x.log_det().unwrap() - 3f64.ln()).abs() < 1e-14);
        let back = ConeElement::from_json(2, &x.to_json()).unwrap();
        assert_eq!(back, x);
        let y = ConeElement::from_json_str(1, "[[1.5, 0.25], [0.25, 1]]").unwrap();
        assert_eq!(serde_json::to_string(&y).unwrap(), "[[1.5,0.25],[0.25,1.0]]");
        assert!(ConeElement::from_json_str(1, "[[1, 2]]").is_err());
        assert!(ConeElement::from_json_str(1, "[[1, \"a\"], [0, 1]]").is_err());
    }

    #[test]
    fn schur_examples() {
        let x = ConeElement::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let s = schur_complement(&x, 1).unwrap();
        assert!((s.get(0, 0).re - 1.5).abs() < 1e-15);
        // |ξ| = |ζ₁||ξ₀|
        assert!((x.log_det().unwrap() - (1.5f64.ln() + 2f64.ln())).abs() < 1e-14);
        let id = ConeElement::identity(2, 4);
        assert!(schur_complement(&id, 3).unwrap().max_abs_diff(&ConeElement::identity(2, 3)) == 0.0);
        assert!(schur_complement(&x, 0).is_err());
        assert!(schur_complement(&x, 2).is_err());
    }

    #[test]
    fn phi_examples() {
        let p = Partition::split(ConeSpec::real(2), 1).unwrap();
        let phi = xi_to_phi(&p, &ConeElement::identity(1, 2)).unwrap();
        assert_eq!(phi, PhiParam::identity(&p));
        let x = ConeElement::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let phi = xi_to_phi(&p, &x).unwrap();
        assert!((phi.zeta_1.get(0, 0).re - 1.5).abs() < 1e-15);
        assert_eq!(phi.blocks[0].xi_half[(0, 0)].re, 1.0);
        assert_eq!(phi.blocks[0].xi_0.get(0, 0).re, 2.0);
        let back = phi_to_xi(&p, &phi).unwrap();
        assert!(back.max_abs_diff(&x) < 1e-15);
        assert_eq!(phi_to_xi(&p, &PhiParam::identity(&p)).unwrap(), ConeElement::identity(1, 2));
    }

    #[test]
    fn leading_log_dets_match_principal_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_pd(2, 4, &mut rng);
        let all = x.cholesky().unwrap().leading_log_dets();
        for k in 1..=4 {
            assert!((all[k - 1] - x.principal(k).log_det().unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_is_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_pd(2, 3, &mut rng);
        let prod = x.matrix() * x.inverse().unwrap().matrix();
        assert!((prod - CMatrix::identity(3, 3)).iter().all(|z| z.norm() < 1e-9));
    }
}
