use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use wishart_core::montecarlo::mc_risk;
use wishart_core::priors::canonical_hyperparams;
use wishart_core::regions::scan_nrd;
use wishart_core::{ConeElement, ConeSpec, Execution, GridSpec, HyperS, McConfig, Partition, PriorKind};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_mc(c: &mut Criterion) {
    let p = Partition::split(ConeSpec::real(2), 1).unwrap();
    let t = canonical_hyperparams(&p, PriorKind::RightInvariant);
    let xi = ConeElement::from_rows(&[&[3.583614, 2.408764], &[2.408764, 4.671542]]).unwrap();
    let s = HyperS::zero(&p);
    let mut group = c.benchmark_group("mc_risk");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = McConfig::new(1, 20_000, 4).with_execution(exec);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| mc_risk(&p, &s, &t, 1.0, 1.0, &xi, cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_scan(c: &mut Criterion) {
    let grid = GridSpec::new((-2.5, 0.0), (-3.0, -0.5), 200).unwrap();
    let mut group = c.benchmark_group("scan_nrd");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| scan_nrd(ConeSpec::real(2), 1, 100.0, 1.0, &grid, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_mc, bench_scan);
criterion_main!(benches);
