//! Sequential vs rayon execution of the hot loops.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num::rational::Rational64;

use egdef::distributions::{default_probe, geometric_grid, pair, scaling_degree_numeric, Kernel, QuadratureSpec};
use egdef::exec::Exec;
use egdef::group::{verify_claims, ClaimConfig};
use egdef::wick::{verify_axioms, AxiomSuiteConfig};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn quadrature(c: &mut Criterion) {
    let mut group = c.benchmark_group("pair");
    for m in [2usize, 3] {
        let kernel = Kernel::homogeneous(Rational64::from_integer(1), m).unwrap();
        let omega = default_probe(&kernel).unwrap();
        for (name, exec) in POLICIES {
            let spec = QuadratureSpec { exec, ..QuadratureSpec::default() };
            group.bench_with_input(BenchmarkId::new(name, m), &m, |b, _| {
                b.iter(|| pair(&kernel, &omega, &spec).unwrap())
            });
        }
    }
    group.finish();
}

fn scaling_degree(c: &mut Criterion) {
    let mut group = c.benchmark_group("scaling_degree_numeric");
    group.sample_size(10);
    let kernel = Kernel::homogeneous(Rational64::from_integer(2), 3).unwrap();
    let omega = default_probe(&kernel).unwrap();
    let lambdas = geometric_grid(1.0, 1e-2, 10).unwrap();
    for (name, exec) in POLICIES {
        let spec = QuadratureSpec { exec, ..QuadratureSpec::default() };
        group.bench_function(name, |b| b.iter(|| scaling_degree_numeric(&kernel, &omega, &lambdas, &spec).unwrap()));
    }
    group.finish();
}

fn claim_suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("claim_suites");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let axioms = AxiomSuiteConfig { exec, ..AxiomSuiteConfig::default() };
        group.bench_function(BenchmarkId::new("verify_axioms", name), |b| b.iter(|| verify_axioms(&axioms).unwrap()));
        let claims = ClaimConfig { exec, trials: 20, ..ClaimConfig::default() };
        group.bench_function(BenchmarkId::new("verify_claims", name), |b| b.iter(|| verify_claims(&claims).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, quadrature, scaling_degree, claim_suites);
criterion_main!(benches);
