mod common;

use common::partition_power;
use voa_core::sweep::{self, SweepConfig};
use voa_core::{IdentityName, Model, Strategy};

#[test]
fn exhaustive_counts_match_the_triple_count() {
    let m = Model::rank_one(6).unwrap();
    let rep = sweep::axiom_sweep(&m, &SweepConfig::exhaustive(5)).unwrap();
    assert!(rep.pass);
    let triples: usize = partition_power(3, 5).iter().sum();
    let pairs: usize = partition_power(2, 5).iter().sum();
    assert_eq!(rep.tallies[&IdentityName::Jacobi].checked, triples);
    assert_eq!(rep.tallies[&IdentityName::Skew].checked, pairs);
}

#[test]
fn strategies_agree() {
    let m = Model::diagonal(2, voa_core::linalg::frac(1, 2), 5).unwrap();
    let mut cfg = SweepConfig::exhaustive(3);
    cfg.random_samples = 10;
    cfg.random_max_degree = 4;
    cfg.seed = 11;
    let par = sweep::axiom_sweep(&m, &cfg).unwrap();
    cfg.strategy = Strategy::Sequential;
    let seq = sweep::axiom_sweep(&m, &cfg).unwrap();
    assert!(par.pass && seq.pass);
    assert_eq!(
        serde_json::to_string(&par).unwrap(),
        serde_json::to_string(&seq).unwrap()
    );
}

#[test]
fn seeds_change_the_random_triples() {
    let m = Model::rank_one(8).unwrap();
    let a = sweep::random_triples(&m, 7, 30, 1).unwrap();
    let b = sweep::random_triples(&m, 7, 30, 2).unwrap();
    assert_ne!(a, b);
}
