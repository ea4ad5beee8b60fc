//! Sequential and parallel runs must agree bit for bit.

use num::rational::Rational64;

use egdef::distributions::{
    default_probe, geometric_grid, pair, scaling_degree_numeric, Kernel, QuadratureSpec,
};
use egdef::exec::Exec;
use egdef::group::{verify_claims, ClaimConfig};
use egdef::wick::{verify_axioms, AxiomSuiteConfig};

fn spec(exec: Exec) -> QuadratureSpec {
    QuadratureSpec { exec, ..QuadratureSpec::default() }
}

#[test]
fn quadrature_is_policy_independent() {
    for m in 1..=3 {
        let k = Kernel::homogeneous(Rational64::new(1, 2), m).unwrap();
        let w = default_probe(&k).unwrap();
        let a = pair(&k, &w, &spec(Exec::Sequential)).unwrap();
        let b = pair(&k, &w, &spec(Exec::Parallel)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let lambdas = geometric_grid(1.0, 1e-2, 8).unwrap();
        let a = scaling_degree_numeric(&k, &w, &lambdas, &spec(Exec::Sequential)).unwrap();
        let b = scaling_degree_numeric(&k, &w, &lambdas, &spec(Exec::Parallel)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn claim_suites_are_policy_independent() {
    let seq = verify_claims(&ClaimConfig { exec: Exec::Sequential, trials: 20, ..ClaimConfig::default() }).unwrap();
    let par = verify_claims(&ClaimConfig { exec: Exec::Parallel, trials: 20, ..ClaimConfig::default() }).unwrap();
    assert_eq!(seq.to_json(), par.to_json());
    let seq = verify_axioms(&AxiomSuiteConfig { exec: Exec::Sequential, instances: 40, oracle_legs: 6, ..Default::default() }).unwrap();
    let par = verify_axioms(&AxiomSuiteConfig { exec: Exec::Parallel, instances: 40, oracle_legs: 6, ..Default::default() }).unwrap();
    assert_eq!(seq.to_json(), par.to_json());
}
