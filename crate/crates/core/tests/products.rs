mod common;

use voa_core::linalg::frac;
use voa_core::{IdentityName, Model, ProductMode};

#[test]
fn normally_ordered_product_is_not_associative() {
    let m = Model::rank_one(6).unwrap();
    let b = m.generator(0);
    let bb = m.nop(&b, &b).unwrap();
    let left = m.nop(&bb, &b).unwrap();
    let right = m.nop(&b, &bb).unwrap();
    assert_eq!(m.associator(&b, &b, &b).unwrap(), left.sub(&right));
    assert!(!left.sub(&right).is_zero());
}

#[test]
fn commutator_is_the_integral_of_the_bracket() {
    let m = Model::rank_one(6).unwrap();
    let b = m.generator(0);
    let db = m.derivative(&b).unwrap();
    assert!(m.commutator(&b, &db).unwrap().is_zero());
    let w = m.virasoro_element().unwrap();
    assert!(!m.commutator(&w, &b).unwrap().is_zero());
}

#[test]
fn nonnegative_products_of_weight_one_land_in_the_vacuum() {
    let m = Model::rank_one(4).unwrap();
    let v1 = m.family_from_states(m.basis_states(1).unwrap().iter()).unwrap();
    let p = m.subspace_product(&v1, &v1, ProductMode::NonNegative).unwrap();
    assert_eq!(p.dims(), vec![1, 0, 0, 0, 0]);
    let all = m.subspace_product(&v1, &v1, ProductMode::All).unwrap();
    // one product :(d^k b) b: per degree k + 2
    assert_eq!(all.dims(), vec![1, 0, 1, 1, 1]);
}

#[test]
fn nth_products_of_generators() {
    let m = Model::diagonal(1, frac(5, 2), 4).unwrap();
    let b = m.generator(0);
    assert_eq!(m.nth_product(&b, 1, &b).unwrap(), m.vacuum().scale(&frac(5, 2)));
    assert!(m.nth_product(&b, 0, &b).unwrap().is_zero());
    assert_eq!(m.nth_product(&b, -2, &m.vacuum()).unwrap(), m.derivative(&b).unwrap());
}

#[test]
fn identity_reports_carry_zero_discrepancy() {
    let m = Model::rank_one(8).unwrap();
    let pool = common::basis_up_to(&m, 2);
    for a in &pool {
        for b in &pool {
            for c in &pool {
                let rep = m
                    .check_identity(IdentityName::Jacobi, &[a.clone(), b.clone(), c.clone()])
                    .unwrap();
                assert!(rep.pass);
            }
        }
    }
    let w = m.virasoro_element().unwrap();
    let rep = m.check_identity(IdentityName::Virasoro, &[w]).unwrap();
    assert!(rep.pass);
    assert!(m.check_identity(IdentityName::Skew, &[m.generator(0)]).is_err());
}
