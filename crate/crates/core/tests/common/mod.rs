#![allow(dead_code)]

use bridgeland_core::num::{int, Integer, Rational};
use bridgeland_core::{MukaiVector, NsLattice};
use proptest::prelude::*;

pub fn lattices() -> Vec<NsLattice> {
    vec![
        NsLattice::rank_one(2, true).unwrap(),
        NsLattice::rank_one(4, true).unwrap(),
        NsLattice::new(
            vec![vec![int(2), int(1)], vec![int(1), int(-2)]],
            vec![int(1), int(0)],
            true,
        )
        .unwrap(),
        NsLattice::rank_one(1, false).unwrap(),
    ]
}

pub fn k3_lattices() -> Vec<NsLattice> {
    lattices().into_iter().filter(|l| l.is_k3()).collect()
}

pub fn lattice() -> impl Strategy<Value = NsLattice> {
    prop::sample::select(lattices())
}

pub fn k3_lattice() -> impl Strategy<Value = NsLattice> {
    prop::sample::select(k3_lattices())
}

pub fn rational(num: i64, den: i64) -> impl Strategy<Value = Rational> {
    (-num..=num, 1..=den).prop_map(|(n, d)| Rational::new(int(n), int(d)))
}

pub fn positive_rational(num: i64, den: i64) -> impl Strategy<Value = Rational> {
    (1..=num, 1..=den).prop_map(|(n, d)| Rational::new(int(n), int(d)))
}

pub fn int_vec(len: usize, bound: i64) -> impl Strategy<Value = Vec<Integer>> {
    prop::collection::vec((-bound..=bound).prop_map(int), len)
}

pub fn rat_vec(len: usize, num: i64, den: i64) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rational(num, den), len)
}

pub fn mukai(rho: usize, bound: i64) -> impl Strategy<Value = MukaiVector> {
    int_vec(rho + 2, bound).prop_map(|c| MukaiVector::from_coords(&c).unwrap())
}

/// A lattice together with `k` Mukai vectors on it.
pub fn lattice_with_vectors(k: usize, bound: i64) -> impl Strategy<Value = (NsLattice, Vec<MukaiVector>)> {
    lattice().prop_flat_map(move |l| {
        let rho = l.rank();
        (Just(l), prop::collection::vec(mukai(rho, bound), k))
    })
}

pub fn k3_lattice_with_vectors(k: usize, bound: i64) -> impl Strategy<Value = (NsLattice, Vec<MukaiVector>)> {
    k3_lattice().prop_flat_map(move |l| {
        let rho = l.rank();
        (Just(l), prop::collection::vec(mukai(rho, bound), k))
    })
}

pub fn mv(r: i64, c: i64, s: i64) -> MukaiVector {
    MukaiVector::from_i64(r, &[c], s)
}
