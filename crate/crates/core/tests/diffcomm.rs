mod common;

use common::{even_part_count, partition_count};
use proptest::prelude::*;
use voa_core::diffcomm::{self, DiffAlgebra, DiffMonomial, DiffPoly};
use voa_core::linalg::int;

fn poly() -> impl Strategy<Value = DiffPoly> {
    prop::collection::vec((prop::collection::vec(0u32..4, 0..4), -3i64..=3), 0..4).prop_map(|terms| {
        let mut p = DiffPoly::zero();
        for (orders, c) in terms {
            p.add_term(DiffMonomial::from_orders(&orders), int(c));
        }
        p
    })
}

proptest! {
    #[test]
    fn sign_commutes_with_d(p in poly()) {
        prop_assert_eq!(p.derivative().sigma(), p.sigma().derivative());
    }

    #[test]
    fn d_is_a_derivation(p in poly(), q in poly()) {
        let lhs = p.mul(&q).derivative();
        let rhs = p.derivative().mul(&q).add(&p.mul(&q.derivative()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn reynolds_is_an_invariant_projector(p in poly()) {
        let r = p.reynolds();
        prop_assert_eq!(r.reynolds(), r.clone());
        prop_assert_eq!(r.sigma(), r);
    }

    #[test]
    fn multiplication_is_commutative(p in poly(), q in poly()) {
        prop_assert_eq!(p.mul(&q), q.mul(&p));
    }
}

#[test]
fn monomials_are_counted_by_partitions() {
    for w in 0..=10 {
        assert_eq!(diffcomm::monomials_of_weight(w).len(), partition_count(w));
    }
}

#[test]
fn invariants_are_even_length_monomials() {
    let dims = diffcomm::invariant_dims(12);
    let alg = DiffAlgebra::new(12);
    for w in 0..=12 {
        assert_eq!(dims[w], even_part_count(w));
        assert_eq!(alg.invariant_space(w).unwrap().dim(), even_part_count(w));
    }
}

#[test]
fn growth_never_stops_at_even_weights() {
    let rep = DiffAlgebra::new(12).generator_growth().unwrap();
    assert!(rep.grows_at_every_even_weight());
    for r in &rep.rows {
        if r.weight % 2 == 1 {
            assert_eq!(r.new_generators, 0, "weight {}", r.weight);
        }
    }
    let totals: Vec<usize> = (1..=6)
        .map(|k| DiffAlgebra::new(2 * k).generator_growth().unwrap().total())
        .collect();
    assert!(totals.windows(2).all(|w| w[0] < w[1]), "{totals:?}");
}

#[test]
fn u_squared_generates_weight_two_and_three() {
    let alg = DiffAlgebra::new(6);
    let u = DiffPoly::variable(0);
    let span = alg.diff_subalgebra_span(&[u.mul(&u)]).unwrap();
    assert_eq!(span.piece(2).dim(), 1);
    assert_eq!(span.piece(3).dim(), 1);
    assert_eq!(span.piece(4).dim(), 2);
    assert_eq!(alg.invariant_space(4).unwrap().dim(), 3);
}
