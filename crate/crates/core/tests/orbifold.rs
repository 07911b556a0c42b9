mod common;

use common::{even_part_count, partition_power};
use proptest::prelude::*;
use voa_core::linalg::{frac, int, Matrix};
use voa_core::orbifold::{self, CoeffSide, GroupAction, WitnessTerm};
use voa_core::{Error, FockState, Model, Strategy};

#[test]
fn sign_invariants_count_even_partitions() {
    let m = Model::rank_one(10).unwrap();
    let g = GroupAction::sign(&m).unwrap();
    let inv = g.invariant_family(&m).unwrap();
    let chars = g.character_dims(10).unwrap();
    for d in 0..=10 {
        assert_eq!(inv.piece(d).dim(), even_part_count(d));
        assert_eq!(chars[d], int(even_part_count(d) as i64));
    }
}

#[test]
fn swap_invariants_follow_the_symmetric_square() {
    // (P(q)^2 + P(q^2)) / 2
    let m = Model::diagonal(2, int(1), 8).unwrap();
    let g = GroupAction::flavor_swap(&m).unwrap();
    assert_eq!(g.order(), 2);
    let sq = partition_power(2, 8);
    let p = partition_power(1, 8);
    let inv = g.invariant_family(&m).unwrap();
    for d in 0..=8 {
        let fixed = if d % 2 == 0 { p[d / 2] } else { 0 };
        assert_eq!(inv.piece(d).dim(), (sq[d] + fixed) / 2, "degree {d}");
    }
}

#[test]
fn group_elements_must_preserve_the_level() {
    let m = Model::diagonal(2, int(1), 4).unwrap();
    let shear = Matrix::from_rows(vec![vec![int(1), int(1)], vec![int(0), int(1)]]).unwrap();
    assert!(GroupAction::generated_by(&m, &[shear]).is_err());
    let rot = Matrix::from_rows(vec![vec![int(0), int(-1)], vec![int(1), int(0)]]).unwrap();
    assert_eq!(GroupAction::generated_by(&m, &[rot]).unwrap().order(), 4);
}

#[test]
fn reynolds_laws_in_rank_two() {
    let m = Model::diagonal(2, frac(1, 3), 6).unwrap();
    let g = GroupAction::flavor_swap(&m).unwrap();
    assert!(orbifold::reynolds_laws(&m, &g, 5, Strategy::Parallel).unwrap().pass);
}

#[test]
fn search_finds_square_and_its_companion() {
    let m = Model::rank_one(10).unwrap();
    let g = GroupAction::sign(&m).unwrap();
    let (xs, rep) = orbifold::strong_gen_search(&m, &g, 4).unwrap();
    assert_eq!(rep.generator_degrees, vec![2, 4]);
    assert!(rep.test.pass && rep.test.gr_pass && rep.test.agree);
    assert!(orbifold::implication_check(&m, &g, &xs).unwrap().pass);
}

#[test]
fn search_capped_at_degree_two_fails() {
    let m = Model::rank_one(8).unwrap();
    let g = GroupAction::sign(&m).unwrap();
    let (_, rep) = orbifold::strong_gen_search(&m, &g, 2).unwrap();
    assert!(!rep.test.pass);
    assert_eq!(rep.test.first_failure, Some(4));
    assert!(rep.test.agree);
}

#[test]
fn rewriting_reevaluates_exactly() {
    let m = Model::rank_one(9).unwrap();
    let g = GroupAction::sign(&m).unwrap();
    let (xs, _) = orbifold::strong_gen_search(&m, &g, 4).unwrap();
    let inv = g.invariant_family(&m).unwrap();
    for d in 1..=6 {
        for u in m.family_states(&inv, d).unwrap() {
            let w = orbifold::xv_vx_membership(&m, &u, &xs).unwrap().expect("witness");
            let r = orbifold::hilbert_rewrite(&m, &g, &u, &xs, &w).unwrap();
            assert!(r.complete() && r.verified);
            assert_eq!(r.tree.evaluate(&m, &xs).unwrap(), u);
        }
    }
}

#[test]
fn wrong_witness_is_rejected() {
    let m = Model::rank_one(6).unwrap();
    let g = GroupAction::sign(&m).unwrap();
    let b = m.generator(0);
    let bb = m.nop(&b, &b).unwrap();
    let u = m.nop(&bb, &bb).unwrap();
    let bogus = vec![WitnessTerm {
        coeff: m.vacuum(),
        x: 0,
        d: 0,
        side: CoeffSide::Left,
    }];
    let err = orbifold::hilbert_rewrite(&m, &g, &u, &[bb], &bogus).unwrap_err();
    assert!(matches!(err, Error::Witness(_)));
}

fn random_state(m: &Model, picks: &[(usize, i64)]) -> FockState {
    let pool = common::basis_up_to(m, 4);
    let mut s = FockState::zero();
    for &(i, c) in picks {
        s.add_scaled(&pool[i % pool.len()], &int(c));
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reynolds_is_idempotent_and_invariant(picks in prop::collection::vec((0usize..64, -3i64..=3), 1..5)) {
        let m = Model::diagonal(2, int(1), 4).unwrap();
        let g = GroupAction::flavor_swap(&m).unwrap();
        let a = random_state(&m, &picks);
        let r = g.reynolds(&a);
        prop_assert_eq!(g.reynolds(&r), r.clone());
        for i in 0..g.order() {
            prop_assert_eq!(g.act(i, &r), r.clone());
        }
    }

    #[test]
    fn action_commutes_with_derivative(picks in prop::collection::vec((0usize..64, -3i64..=3), 1..5)) {
        let m = Model::diagonal(2, int(1), 5).unwrap();
        let g = GroupAction::flavor_swap(&m).unwrap();
        let a = random_state(&m, &picks);
        for i in 0..g.order() {
            prop_assert_eq!(g.act(i, &m.derivative(&a).unwrap()), m.derivative(&g.act(i, &a)).unwrap());
        }
    }
}
