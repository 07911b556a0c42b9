mod common;

use num_traits::Zero;
use voa_core::linalg::{factorial, frac, int, Scalar};
use voa_core::recovery::{self, CentralRoute};
use voa_core::{Error, Model};

/// Hilbert determinant `c_N^4 / c_{2N}`, `c_k = prod_{i<k} i!`, with the
/// sign `(-1)^{floor(N/2)}` from the alternating columns.
fn expected_det(n: usize) -> Scalar {
    let big_n = n + 1;
    let c = |k: usize| (1..k).fold(int(1), |acc, i| acc * factorial(i as u32));
    let cn = c(big_n);
    let h = cn.clone() * cn.clone() * cn.clone() * cn / c(2 * big_n);
    if (big_n / 2) % 2 == 1 {
        -h
    } else {
        h
    }
}

#[test]
fn sign_matrix_determinants_match_closed_form() {
    for n in 0..=10 {
        let det = recovery::hilbert_sign_matrix(n).determinant().unwrap();
        assert!(!det.is_zero());
        assert_eq!(det, expected_det(n), "n = {n}");
    }
    assert_eq!(expected_det(1), frac(-1, 12));
}

#[test]
fn rank_one_pairs_recover_exactly() {
    let m = Model::rank_one(9).unwrap();
    for h in 0..=5 {
        for k in 0..=5 - h {
            for a in m.basis_states(h).unwrap() {
                for b in m.basis_states(k).unwrap() {
                    let rec = recovery::recover_bracket(&m, &a, &b).unwrap();
                    assert_eq!(rec.bracket, m.lambda_bracket(&a, &b).unwrap(), "{a} , {b}");
                }
            }
        }
    }
}

#[test]
fn rank_two_pairs_recover_exactly() {
    let m = Model::diagonal(2, frac(-2, 3), 7).unwrap();
    for h in 0..=3 {
        for k in 0..=4 - h {
            for a in m.basis_states(h).unwrap() {
                for b in m.basis_states(k).unwrap() {
                    let out = recovery::compare_pair(&m, &a, &b).unwrap();
                    assert!(out.equal, "{a} , {b}");
                }
            }
        }
    }
}

#[test]
fn generator_bracket_recovers_its_central_term() {
    let m = Model::rank_one(6).unwrap();
    let b = m.generator(0);
    let rec = recovery::recover_bracket(&m, &b, &b).unwrap();
    assert_eq!(rec.bracket.coeff(1, 0), m.vacuum());
    assert_ne!(rec.route, CentralRoute::Trivial);
    assert!(!recovery::admissible_us(&m, &b, &b, 3).unwrap().is_empty());
}

#[test]
fn recovery_path_never_calls_the_bracket() {
    let m = Model::rank_one(8).unwrap();
    let mut pairs = Vec::new();
    for a in common::basis_up_to(&m, 2) {
        for b in common::basis_up_to(&m, 2) {
            pairs.push((a.clone(), b));
        }
    }
    let audit = recovery::purity_audit(&m, &pairs).unwrap();
    assert!(audit.pass);
    assert_eq!(audit.bracket_calls, 0);
}

#[test]
fn system_without_headroom_names_the_operation() {
    let m = Model::rank_one(4).unwrap();
    let x = m.basis_states(2).unwrap()[0].clone();
    let y = m.basis_states(2).unwrap()[1].clone();
    match recovery::build_system(&m, &x, &y) {
        Err(Error::CutoffExceeded { op, .. }) => assert_eq!(op, "build_system"),
        other => panic!("expected a cutoff error, got {other:?}"),
    }
    assert_eq!(recovery::required_cutoff(2, 2), 7);
}
