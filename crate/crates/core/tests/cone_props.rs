use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wishart_core::cone::{
    phi_to_xi, random_pd, schur_complement, xi_to_phi, CMatrix, PhiBlock, PhiParam, C64,
};
use wishart_core::{ConeElement, ConeSpec, Partition};

fn cases() -> Vec<Partition> {
    let mut out = Vec::new();
    for d in [1, 2] {
        for r in 1..=4 {
            out.extend(Partition::all(ConeSpec::new(d, r).unwrap()));
        }
    }
    out
}

/// Blocks are shifted by the identity to keep the rebuilt ξ well conditioned.
fn random_phi(p: &Partition, rng: &mut ChaCha8Rng) -> PhiParam {
    let d = p.d();
    let entry = |rng: &mut ChaCha8Rng| {
        let im = if d == 2 { rng.random_range(-1.0..1.0) } else { 0.0 };
        C64::new(rng.random_range(-1.0..1.0), im)
    };
    PhiParam {
        zeta_1: random_pd(d, p.block(0), rng).add(&ConeElement::identity(d, p.block(0))).unwrap(),
        blocks: (1..p.h())
            .map(|i| PhiBlock {
                xi_half: CMatrix::from_fn(p.prev_rank(i), p.block(i), |_, _| entry(rng)),
                xi_0: random_pd(d, p.block(i), rng).add(&ConeElement::identity(d, p.block(i))).unwrap(),
            })
            .collect(),
    }
}

fn phi_gap(a: &PhiParam, b: &PhiParam) -> f64 {
    let mut gap = a.zeta_1.max_abs_diff(&b.zeta_1);
    for (x, y) in a.blocks.iter().zip(&b.blocks) {
        gap = gap.max(x.xi_0.max_abs_diff(&y.xi_0));
        gap = gap.max((&x.xi_half - &y.xi_half).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    gap
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn scale_of(x: &ConeElement) -> f64 {
    x.matrix().iter().map(|z| z.norm()).fold(1.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn xi_phi_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in cases() {
            let xi = random_pd(p.d(), p.r(), &mut rng);
            let phi = xi_to_phi(&p, &xi).unwrap();
            let back = phi_to_xi(&p, &phi).unwrap();
            let tol = 1e-12 * scale_of(&xi);
            prop_assert!(back.max_abs_diff(&xi) <= tol, "{:?} {}", p.blocks(), back.max_abs_diff(&xi));
            let again = xi_to_phi(&p, &back).unwrap();
            prop_assert!(phi_gap(&again, &phi) <= tol, "{:?} {}", p.blocks(), phi_gap(&again, &phi));
        }
    }

    #[test]
    fn arbitrary_phi_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in cases() {
            let phi = random_phi(&p, &mut rng);
            let xi = phi_to_xi(&p, &phi).unwrap();
            prop_assert!(xi.is_pd());
            let tol = 1e-12 * scale_of(&xi);
            prop_assert!(phi_gap(&xi_to_phi(&p, &xi).unwrap(), &phi) <= tol);
        }
    }

    #[test]
    fn log_det_splits_over_blocks(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in cases() {
            let xi = random_pd(p.d(), p.r(), &mut rng);
            let phi = xi_to_phi(&p, &xi).unwrap();
            let sum: f64 = (0..p.h()).map(|i| phi.xi_0(i).log_det().unwrap()).sum();
            prop_assert!(rel(sum, xi.log_det().unwrap()) < 1e-10);
        }
    }

    #[test]
    fn schur_complements_are_pd(seed in any::<u64>(), d in 1u32..=2, r in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_pd(d, r, &mut rng);
        for split in 1..r {
            let s = schur_complement(&x, split).unwrap();
            prop_assert!(s.is_pd());
            let x0 = ConeElement::new(d, x.matrix().view((split, split), (r - split, r - split)).into_owned()).unwrap();
            let lhs = x.log_det().unwrap();
            prop_assert!(rel(s.log_det().unwrap() + x0.log_det().unwrap(), lhs) < 1e-10);
        }
    }

    #[test]
    fn cholesky_succeeds_exactly_on_pd(seed in any::<u64>(), d in 1u32..=2, r in 1usize..=4, shift in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_pd(d, r, &mut rng);
        // eigenvalues of base + shift·I decide definiteness
        let m = base.matrix() + CMatrix::identity(r, r) * C64::new(shift, 0.0);
        let x = ConeElement::new(d, m.clone()).unwrap();
        let min_eig = m.symmetric_eigenvalues().min();
        if min_eig.abs() > 1e-8 {
            prop_assert_eq!(x.is_pd(), min_eig > 0.0);
        }
    }

    #[test]
    fn inner_product_is_real_trace(seed in any::<u64>(), d in 1u32..=2, r in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_pd(d, r, &mut rng), random_pd(d, r, &mut rng));
        let tr = (x.matrix() * y.matrix()).trace();
        prop_assert!((x.inner(&y) - tr.re).abs() <= 1e-12 * tr.norm().max(1.0));
        prop_assert!(tr.im.abs() <= 1e-10 * tr.norm().max(1.0));
    }
}

#[test]
fn three_block_determinant_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = Partition::new(ConeSpec::real(3), vec![1, 1, 1]).unwrap();
    for _ in 0..20 {
        let xi = random_pd(1, 3, &mut rng);
        let phi = xi_to_phi(&p, &xi).unwrap();
        let prod: f64 = (0..3).map(|i| phi.xi_0(i).matrix()[(0, 0)].re).product();
        let det = xi.log_det().unwrap().exp();
        assert!((prod / det - 1.0).abs() < 1e-10);
    }
}

#[test]
fn matrix_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for d in [1, 2] {
        let x = random_pd(d, 3, &mut rng);
        let text = x.to_json().to_string();
        let back = ConeElement::from_json_str(d, &text).unwrap();
        assert_eq!(back.max_abs_diff(&x), 0.0);
    }
}
