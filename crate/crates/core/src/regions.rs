//! Dominance regions for two-block partitions: NRD grids, the limit oval
//! D^∞, the small-μ rectangle and finite-intersection estimates of V^ν.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::cone::Partition;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::priors::{canonical_hyperparams, HyperT, PriorKind};
use crate::risk::nrd;
use crate::specfun::ConeSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t1_min: f64,
    pub t1_max: f64,
    pub t2_min: f64,
    pub t2_max: f64,
    /// Points per axis, endpoints included.
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(t1: (f64, f64), t2: (f64, f64), resolution: usize) -> Result<Self> {
        let g = GridSpec { t1_min: t1.0, t1_max: t1.1, t2_min: t2.0, t2_max: t2.1, resolution };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        let finite = [self.t1_min, self.t1_max, self.t2_min, self.t2_max].iter().all(|v| v.is_finite());
        if !finite || self.t1_max <= self.t1_min || self.t2_max <= self.t2_min {
            return Err(Error::domain("grid bounds must be finite with max > min on both axes"));
        }
        if self.resolution < 2 {
            return Err(Error::domain("grid resolution must be at least 2"));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize, j: usize) -> f64 {
        if j + 1 == n {
            hi
        } else {
            lo + (hi - lo) * j as f64 / (n - 1) as f64
        }
    }

    pub fn t1(&self, i: usize) -> f64 {
        Self::axis(self.t1_min, self.t1_max, self.resolution, i)
    }

    pub fn t2(&self, j: usize) -> f64 {
        Self::axis(self.t2_min, self.t2_max, self.resolution, j)
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid point with flat index `idx`, t1 varying slowest.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        (self.t1(idx / self.resolution), self.t2(idx % self.resolution))
    }
}

/// NRD values and membership on a grid, stored row-major with t1 outer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionGrid {
    pub grid: GridSpec,
    /// NaN outside T^μ. For intersections, the largest value over the μ list.
    pub nrd_values: Vec<f64>,
    pub membership: Vec<bool>,
    /// Sample sizes μ that entered the grid.
    pub mu_list: Vec<f64>,
    pub nu: f64,
}

impl RegionGrid {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.grid.resolution + j
    }

    pub fn nrd_at(&self, i: usize, j: usize) -> f64 {
        self.nrd_values[self.index(i, j)]
    }

    pub fn member_at(&self, i: usize, j: usize) -> bool {
        self.membership[self.index(i, j)]
    }

    pub fn member_count(&self) -> usize {
        self.membership.iter().filter(|&&m| m).count()
    }

    /// Header `t1,t2,nrd,member`, one row per point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t1,t2,nrd,member")?;
        for idx in 0..self.grid.len() {
            let (t1, t2) = self.grid.point(idx);
            let v = self.nrd_values[idx];
            let v = if v.is_nan() { "nan".to_string() } else { format!("{v}") };
            writeln!(w, "{t1},{t2},{v},{}", u8::from(self.membership[idx]))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// True when every row and every column has a membership set without gaps.
    pub fn rows_and_columns_are_intervals(&self) -> bool {
        let n = self.grid.resolution;
        let interval = |it: &mut dyn Iterator<Item = bool>| {
            // count transitions in and out; an interval has at most one of each
            let (mut runs, mut prev) = (0, false);
            for m in it {
                if m && !prev {
                    runs += 1;
                }
                prev = m;
            }
            runs <= 1
        };
        (0..n).all(|i| interval(&mut (0..n).map(|j| self.member_at(i, j))))
            && (0..n).all(|j| interval(&mut (0..n).map(|i| self.member_at(i, j))))
    }
}

fn two_block(cone: ConeSpec, k: usize) -> Result<Partition> {
    if cone.r() < 2 || k == 0 || k >= cone.r() {
        return Err(Error::domain(format!("split k must satisfy 0 < k < r = {}, got {k}", cone.r())));
    }
    Partition::split(cone, k)
}

/// NRD^{μ,ν} over the grid; points outside the open set T^μ are NaN.
pub fn scan_nrd(cone: ConeSpec, k: usize, mu: f64, nu: f64, grid: &GridSpec, exec: Execution) -> Result<RegionGrid> {
    let p = two_block(cone, k)?;
    grid.check()?;
    cone.check_domain(mu, "mu")?;
    cone.check_domain(nu, "nu")?;
    let values = map_indexed(grid.len(), exec, |idx| {
        let (t1, t2) = grid.point(idx);
        let t = HyperT(vec![t1, t2]);
        if !t.in_domain(&p, mu) {
            return f64::NAN;
        }
        nrd(&p, &t, mu, nu).unwrap_or(f64::NAN)
    });
    let membership = values.iter().map(|v| *v < 0.0).collect();
    Ok(RegionGrid { grid: *grid, nrd_values: values, membership, mu_list: vec![mu], nu })
}

/// (k/2)(t1 − t_R1)² + ((r−k)/2)(t2 − t_R2)² − (d²/8)rk(r−k); negative inside D^∞.
pub fn oval_signed(cone: ConeSpec, k: usize, t: &HyperT) -> Result<f64> {
    let p = two_block(cone, k)?;
    t.check(&p)?;
    let tr = canonical_hyperparams(&p, PriorKind::RightInvariant);
    let (r, k, d) = (cone.r() as f64, k as f64, cone.d() as f64);
    Ok(0.5 * k * (t[0] - tr[0]).powi(2) + 0.5 * (r - k) * (t[1] - tr[1]).powi(2) - d * d / 8.0 * r * k * (r - k))
}

/// Limit of D^{μ,ν} as μ approaches (r−1)d/2: t1 > t_J1 and t_R2 < t2 < t_J2.
pub fn rect_membership(cone: ConeSpec, k: usize, t: &HyperT) -> Result<bool> {
    let p = two_block(cone, k)?;
    t.check(&p)?;
    let tj = canonical_hyperparams(&p, PriorKind::Jeffreys);
    let tr = canonical_hyperparams(&p, PriorKind::RightInvariant);
    Ok(t[0] > tj[0] && tr[1] < t[1] && t[1] < tj[1])
}

/// Pointwise intersection of D^{μ,ν} over `mu_list`.
pub fn v_estimate(
    cone: ConeSpec,
    k: usize,
    nu: f64,
    mu_list: &[f64],
    grid: &GridSpec,
    exec: Execution,
) -> Result<RegionGrid> {
    let (first, rest) = mu_list.split_first().ok_or_else(|| Error::domain("mu list must not be empty"))?;
    let mut acc = scan_nrd(cone, k, *first, nu, grid, exec)?;
    for &mu in rest {
        let g = scan_nrd(cone, k, mu, nu, grid, exec)?;
        for idx in 0..grid.len() {
            acc.membership[idx] &= g.membership[idx];
            let (a, b) = (acc.nrd_values[idx], g.nrd_values[idx]);
            acc.nrd_values[idx] = if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) };
        }
        acc.mu_list.push(mu);
    }
    Ok(acc)
}

/// Grid comparison of a V^ν estimate with rectangle ∩ oval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConjectureDiagnostic {
    pub both: usize,
    pub estimate_only: usize,
    pub conjecture_only: usize,
    pub neither: usize,
}

impl ConjectureDiagnostic {
    pub fn agrees(&self) -> bool {
        self.estimate_only == 0 && self.conjecture_only == 0
    }
}

pub fn conjecture_diagnostic(cone: ConeSpec, k: usize, region: &RegionGrid) -> Result<ConjectureDiagnostic> {
    let mut out = ConjectureDiagnostic { both: 0, estimate_only: 0, conjecture_only: 0, neither: 0 };
    for idx in 0..region.grid.len() {
        let (t1, t2) = region.grid.point(idx);
        let t = HyperT(vec![t1, t2]);
        let conj = rect_membership(cone, k, &t)? && oval_signed(cone, k, &t)? < 0.0;
        match (region.membership[idx], conj) {
            (true, true) => out.both += 1,
            (true, false) => out.estimate_only += 1,
            (false, true) => out.conjecture_only += 1,
            (false, false) => out.neither += 1,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> ConeSpec {
        ConeSpec::real(2)
    }

    #[test]
    fn oval_examples() {
        let tj = HyperT(vec![-1.5, -1.5]);
        assert_eq!(oval_signed(c2(), 1, &tj).unwrap(), 0.0);
        let tc = HyperT(vec![-1.0, -1.5]);
        assert!((oval_signed(c2(), 1, &tc).unwrap() + 0.125).abs() < 1e-15);
        let tr = HyperT(vec![-1.0, -2.0]);
        assert!((oval_signed(c2(), 1, &tr).unwrap() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn rectangle_examples() {
        assert!(rect_membership(c2(), 1, &HyperT(vec![-1.2, -1.8])).unwrap());
        assert!(!rect_membership(c2(), 1, &HyperT(vec![-1.0, -1.5])).unwrap());
        assert!(!rect_membership(c2(), 1, &HyperT(vec![-2.0, -1.8])).unwrap());
    }

    #[test]
    fn jeffreys_point_is_not_a_member() {
        let g = GridSpec::new((-2.5, -0.5), (-2.5, -0.5), 5).unwrap();
        let s = scan_nrd(c2(), 1, 3.0, 1.0, &g, Execution::Sequential).unwrap();
        // (−1.5, −1.5) is grid point (2, 2)
        assert_eq!(g.point(s.index(2, 2)), (-1.5, -1.5));
        assert!(s.nrd_at(2, 2).abs() < 1e-12);
        assert!(!s.member_at(2, 2));
    }

    #[test]
    fn csv_layout() {
        let g = GridSpec::new((-30.0, -0.5), (-2.5, -0.5), 2).unwrap();
        let s = scan_nrd(c2(), 1, 1.0, 1.0, &g, Execution::Sequential).unwrap();
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t1,t2,nrd,member");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("-30,-2.5,nan,0"));
        assert!(lines[2].starts_with("-30,-0.5,"));
    }

    #[test]
    fn bad_inputs() {
        let g = GridSpec { t1_min: 0.0, t1_max: -1.0, t2_min: 0.0, t2_max: 1.0, resolution: 3 };
        assert!(g.check().is_err());
        let ok = GridSpec::new((-2.0, -1.0), (-2.0, -1.0), 3).unwrap();
        assert!(scan_nrd(c2(), 2, 1.0, 1.0, &ok, Execution::Sequential).is_err());
        assert!(scan_nrd(c2(), 1, 0.5, 1.0, &ok, Execution::Sequential).is_err());
        assert!(v_estimate(c2(), 1, 1.0, &[], &ok, Execution::Sequential).is_err());
    }
}
