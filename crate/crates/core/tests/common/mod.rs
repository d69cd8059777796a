#![allow(dead_code)]

use proptest::prelude::*;
use qshift_core::coefficients::{int, HSeries};
use qshift_core::diffops::{OpMonomial, Operator, Polyvector};
use qshift_core::gca::{make_crit_locus, CritLocus, Element, EtaSet, Monomial};

pub fn mono(y: &[u32], eta: &[usize]) -> Monomial {
    Monomial { y: y.to_vec(), eta: EtaSet::from_indices(eta.iter().copied()) }
}

pub fn poly(m: usize, terms: &[(&[u32], i64)]) -> Element {
    Element::from_terms(m, terms.iter().map(|(e, c)| (mono(e, &[]), HSeries::from_int(*c))))
}

pub fn locus(m: usize, terms: &[(&[u32], i64)]) -> CritLocus {
    make_crit_locus(&poly(m, terms), m).unwrap()
}

/// The potentials used throughout the tests, by name.
pub fn corpus() -> Vec<(&'static str, CritLocus)> {
    vec![
        ("x^2", locus(1, &[(&[2], 1)])),
        ("x^3", locus(1, &[(&[3], 1)])),
        ("x^4", locus(1, &[(&[4], 1)])),
        ("x^2+y^2", locus(2, &[(&[2, 0], 1), (&[0, 2], 1)])),
        ("x^3+y^3", locus(2, &[(&[3, 0], 1), (&[0, 3], 1)])),
        ("x^3+y^5", locus(2, &[(&[3, 0], 1), (&[0, 5], 1)])),
        ("x^2+y^3", locus(2, &[(&[2, 0], 1), (&[0, 3], 1)])),
        ("x^2+y^2+z^2", locus(3, &[(&[2, 0, 0], 1), (&[0, 2, 0], 1), (&[0, 0, 2], 1)])),
        ("x^3+xy", locus(2, &[(&[3, 0], 1), (&[1, 1], 1)])),
    ]
}

pub fn arb_exps(m: usize, max: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=max, m)
}

pub fn arb_mask(m: usize) -> impl Strategy<Value = EtaSet> {
    (0u32..(1 << m)).prop_map(EtaSet)
}

pub fn arb_op_monomial(m: usize, max_y: u32, max_d: u32) -> impl Strategy<Value = OpMonomial> {
    (arb_exps(m, max_y), arb_mask(m), arb_exps(m, max_d), arb_mask(m))
        .prop_map(|(y, eta, dy, deta)| OpMonomial { mul: Monomial { y, eta }, dy, deta })
}

pub fn arb_operator(m: usize, max_y: u32, max_d: u32, len: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec((arb_op_monomial(m, max_y, max_d), -3i64..=3), 1..=len)
        .prop_map(move |terms| Operator::from_terms(m, terms.into_iter().map(|(mono, c)| (mono, HSeries::from_int(c)))))
        .prop_filter("zero operator", |op| !op.is_zero())
}

pub fn arb_element(m: usize, max_y: u32, len: usize) -> impl Strategy<Value = Element> {
    prop::collection::vec((arb_exps(m, max_y), arb_mask(m), -3i64..=3), 1..=len).prop_map(move |terms| {
        Element::from_terms(m, terms.into_iter().map(|(y, eta, c)| (Monomial { y, eta }, HSeries::from_int(c))))
    })
}

/// Homogeneous in arity and cohomological degree.
pub fn arb_polyvector(m: usize, arity: usize, max_y: u32, len: usize) -> impl Strategy<Value = Polyvector> {
    (arb_operator(m, max_y, arity as u32, len * 4), 0usize..8).prop_map(move |(op, pick)| {
        let p = Polyvector::from_terms(m, op.terms().filter(|(mono, _)| mono.order() == arity).map(|(k, c)| (k.clone(), c.clone())));
        let parts = p.homogeneous_parts();
        if parts.is_empty() {
            return Polyvector::zero(m);
        }
        let idx = pick % parts.len();
        parts.into_values().nth(idx).unwrap()
    })
}

/// Nonzero polynomial potential in `m` variables.
pub fn arb_potential(m: usize, max_deg: u32) -> impl Strategy<Value = CritLocus> {
    prop::collection::vec((arb_exps(m, max_deg), -3i64..=3), 1..=4).prop_filter_map("zero potential", move |terms| {
        let f = Element::from_terms(m, terms.into_iter().map(|(y, c)| (Monomial { y, eta: EtaSet::EMPTY }, HSeries::constant(int(c)))));
        make_crit_locus(&f, m).ok()
    })
}

use qshift_core::derham::{DRWord, WordKey};
use qshift_core::quantise::Quantisation;
use std::collections::BTreeMap;

pub fn arb_monomial(m: usize, max_y: u32) -> impl Strategy<Value = Monomial> {
    (arb_exps(m, max_y), arb_mask(m)).prop_map(|(y, eta)| Monomial { y, eta })
}

/// Random cochain: up to three words of up to `max_len` letters.
pub fn arb_word(m: usize, max_len: usize) -> impl Strategy<Value = DRWord> {
    prop::collection::vec((0i32..=1, prop::collection::vec(arb_monomial(m, 2), 1..=max_len), -3i64..=3), 1..=3).prop_map(
        move |terms| {
            let mut w = DRWord::zero(m);
            for (hbar, letters, c) in terms {
                w.add_term(WordKey { hbar, letters }, &int(c));
            }
            w
        },
    )
}

/// Random degree one quantisation with `Δ_2` and `Δ_3`; usually not a
/// solution of the master equation.
pub fn arb_quantisation(m: usize) -> impl Strategy<Value = Quantisation> {
    (arb_operator(m, 1, 2, 8), arb_operator(m, 1, 3, 8)).prop_map(move |(a, b)| {
        let keep = |op: &Operator, j: usize| op.filter(|mono| mono.degree() == 1 && mono.order() <= j);
        Quantisation::new(m, BTreeMap::from([(2, keep(&a, 2)), (3, keep(&b, 3))])).unwrap()
    })
}
