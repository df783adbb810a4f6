use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wishart_core::cone::{nested_schur, random_pd, CMatrix, C64};
use wishart_core::montecarlo::{
    log_predictive_density, log_wishart_density, mc_risk, mc_risk_batch, mc_risk_via_moments, moment_check,
    sample_wishart, stream,
};
use wishart_core::priors::canonical_hyperparams;
use wishart_core::risk::exact_risk;
use wishart_core::{ConeElement, ConeSpec, Execution, HyperS, HyperT, McConfig, McEstimate, Partition, PriorKind};

fn half_line(f: impl Fn(f64) -> f64) -> f64 {
    let g = |v: f64| {
        let w = 1.0 - v;
        if v <= 0.0 || w <= 0.0 {
            0.0
        } else {
            f(v / w) / (w * w)
        }
    };
    quadrature::double_exponential::integrate(g, 0.0, 1.0, 1e-14).integral
}

#[test]
fn scalar_draws_have_gamma_moments() {
    // X ~ W_1(μ, [0.5]) has density ∝ x^{μ−1} e^{−x/2}, so 0.5·X ~ Gamma(μ, 1)
    let c = ConeSpec::real(1);
    let xi = ConeElement::from_rows(&[&[0.5]]).unwrap();
    for mu in [0.3, 1.0, 4.5] {
        let draws: Vec<f64> = (0..100_000u64)
            .map(|j| 0.5 * sample_wishart(c, mu, &xi, &mut stream(3, j)).unwrap().get(0, 0).re)
            .collect();
        let mean = McEstimate::from_samples(&draws, 1);
        assert!(mean.z_score(mu).abs() < 3.0, "mu={mu}: {mean:?}");
        let sq: Vec<f64> = draws.iter().map(|g| (g - mu).powi(2)).collect();
        let var = McEstimate::from_samples(&sq, 1);
        assert!(var.z_score(mu).abs() < 3.0, "mu={mu}: {var:?}");
    }
}

#[test]
fn scalar_density_integrates_to_one() {
    let c = ConeSpec::real(1);
    for (mu, xi) in [(0.7, 0.4), (1.0, 1.0), (6.0, 3.0)] {
        let xi_el = ConeElement::from_rows(&[&[xi]]).unwrap();
        let q = half_line(|x| log_wishart_density(c, mu, &xi_el, &ConeElement::from_rows(&[&[x]]).unwrap()).unwrap().exp());
        assert!((q - 1.0).abs() < 1e-8, "mu={mu}: {q}");
    }
}

#[test]
fn density_is_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in [1, 2] {
        let c = ConeSpec::new(d, 3).unwrap();
        let (x, xi) = (random_pd(d, 3, &mut rng), random_pd(d, 3, &mut rng));
        // unitary factor of a random matrix
        let g = random_pd(d, 3, &mut rng).matrix() + CMatrix::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64 * 0.1, if d == 2 { 0.3 } else { 0.0 }));
        let u = g.qr().q();
        let rot = |m: &ConeElement| m.congruence(&u).unwrap();
        let a = log_wishart_density(c, 2.4, &xi, &x).unwrap();
        let b = log_wishart_density(c, 2.4, &rot(&xi), &rot(&x)).unwrap();
        assert!((a - b).abs() < 1e-10, "d={d}: {a} vs {b}");
    }
}

#[test]
fn principal_block_follows_the_chain_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (d, r, k) in [(1, 3, 2), (2, 3, 1), (2, 4, 2)] {
        let cone = ConeSpec::new(d, r).unwrap();
        let xi = random_pd(d, r, &mut rng);
        let mu = cone.gamma_threshold() + 1.3;
        let m = moment_check(cone, mu, &xi, 40_000, 17, Execution::Parallel).unwrap();
        let p = Partition::split(cone, k).unwrap();
        let target = nested_schur(&p, &xi).unwrap()[0].inverse().unwrap().scale(mu);
        for a in 0..k {
            for b in 0..k {
                let diff = m.mean[(a, b)] - target.get(a, b);
                assert!(diff.re.abs() <= 4.0 * m.se_re[(a, b)], "d={d} r={r}: {diff}");
                if m.se_im[(a, b)] > 0.0 {
                    assert!(diff.im.abs() <= 4.0 * m.se_im[(a, b)]);
                }
            }
        }
    }
}

#[test]
fn improper_limit_is_continuous() {
    let p = Partition::split(ConeSpec::complex(3), 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (x, y) = (random_pd(2, 3, &mut rng), random_pd(2, 3, &mut rng));
    let t = canonical_hyperparams(&p, PriorKind::Reference);
    let zero = HyperS::zero(&p);
    let tiny = HyperS::from_matrix(&p, &ConeElement::scaled_identity(2, 3, 1e-12)).unwrap();
    let a = log_predictive_density(&p, &zero, &t, 2.5, 2.2, &x, &y).unwrap();
    let b = log_predictive_density(&p, &tiny, &t, 2.5, 2.2, &x, &y).unwrap();
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
}

#[test]
fn risk_is_constant_in_xi_for_complex_cones() {
    let p = Partition::split(ConeSpec::complex(2), 1).unwrap();
    let ts = [
        canonical_hyperparams(&p, PriorKind::Jeffreys),
        canonical_hyperparams(&p, PriorKind::RightInvariant),
    ];
    let (mu, nu) = (1.6, 1.4);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for j in 0..3 {
        let xi = random_pd(2, 2, &mut rng);
        let est = mc_risk_batch(&p, &HyperS::zero(&p), &ts, mu, nu, &xi, &McConfig::new(100 + j, 20_000, 2)).unwrap();
        for (e, t) in est.iter().zip(&ts) {
            let exact = exact_risk(&p, t, mu, nu).unwrap().total;
            assert!(e.z_score(exact).abs() < 3.0, "xi #{j}: {e:?} vs {exact}");
        }
    }
}

#[test]
fn proper_prior_risk_matches_general_formula() {
    let p = Partition::whole(ConeSpec::real(1));
    let s = HyperS::from_matrix(&p, &ConeElement::from_rows(&[&[0.8]]).unwrap()).unwrap();
    let t = HyperT(vec![0.5]);
    let xi = ConeElement::from_rows(&[&[1.7]]).unwrap();
    let direct = mc_risk(&p, &s, &t, 1.5, 2.0, &xi, &McConfig::new(21, 100_000, 2)).unwrap();
    let formula = mc_risk_via_moments(&p, &s, &t, 1.5, 2.0, &xi, &McConfig::new(22, 100_000, 1)).unwrap();
    assert!(direct.agrees_with(formula.mean, formula.std_error, 3.0), "{direct:?} vs {formula:?}");
}

#[test]
fn proper_prior_risk_depends_on_xi() {
    // with s ≠ 0 the risk is no longer constant; a large scale mismatch is visible
    let p = Partition::whole(ConeSpec::real(1));
    let s = HyperS::from_matrix(&p, &ConeElement::from_rows(&[&[5.0]]).unwrap()).unwrap();
    let t = HyperT(vec![2.0]);
    let cfg = McConfig::new(3, 20_000, 1);
    let near = mc_risk_via_moments(&p, &s, &t, 1.0, 1.0, &ConeElement::from_rows(&[&[0.6]]).unwrap(), &cfg).unwrap();
    let far = mc_risk_via_moments(&p, &s, &t, 1.0, 1.0, &ConeElement::from_rows(&[&[50.0]]).unwrap(), &cfg).unwrap();
    assert!((far.mean - near.mean).abs() > 10.0 * (far.std_error + near.std_error));
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let p = Partition::split(ConeSpec::real(3), 2).unwrap();
    let t = canonical_hyperparams(&p, PriorKind::Reference);
    let xi = random_pd(1, 3, &mut ChaCha8Rng::seed_from_u64(9));
    let cfg = McConfig::new(5, 3000, 3);
    let run = |threads: usize, exec: Execution| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| mc_risk(&p, &HyperS::zero(&p), &t, 2.0, 1.5, &xi, &cfg.with_execution(exec)).unwrap())
    };
    let base = run(1, Execution::Sequential);
    for threads in [1, 2, 4] {
        let e = run(threads, Execution::Parallel);
        assert_eq!(e.mean.to_bits(), base.mean.to_bits());
        assert_eq!(e.std_error.to_bits(), base.std_error.to_bits());
    }
}
