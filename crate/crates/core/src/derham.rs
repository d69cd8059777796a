//! Cochains of the Amitsur model of the de Rham complex, with cup product,
//! total differential and the maps `mu` and `nu` into operators.
//!
//! A word `a_0 ⊗ .. ⊗ a_r` of letters has degree `sum |a_i| + r`. The cup
//! product multiplies the last letter of the left word with the first letter
//! of the right one.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::coefficients::{HSeries, Rational};
use crate::diffops::{op_monomials, Operator};
use crate::error::{Error, Result};
use crate::gca::{CritLocus, Element, Monomial};
use crate::linalg::{Echelon, SparseVec};
use crate::quantise::{centre_differential_unchecked, kappa, Quantisation};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordKey {
    pub hbar: i32,
    pub letters: Vec<Monomial>,
}

impl WordKey {
    pub fn degree(&self) -> i32 {
        self.letters.iter().map(Monomial::degree).sum::<i32>() + self.letters.len() as i32 - 1
    }
}

/// A finite rational combination of words, each carrying a power of `h`.
/// Equality ignores the recorded Hodge weight.
#[derive(Clone, Debug)]
pub struct DRWord {
    nvars: usize,
    terms: BTreeMap<WordKey, Rational>,
    hodge_weight: usize,
}

impl DRWord {
    pub fn zero(m: usize) -> Self {
        DRWord { nvars: m, terms: BTreeMap::new(), hodge_weight: 0 }
    }

    /// The word `1 ⊗ 1` of degree 1.
    pub fn e(m: usize) -> Self {
        Self::from_word(0, vec![Monomial::one(m), Monomial::one(m)], Rational::one(), 1)
    }

    pub fn from_word(hbar: i32, letters: Vec<Monomial>, c: Rational, hodge_weight: usize) -> Self {
        assert!(!letters.is_empty(), "words have at least one letter");
        let mut w = Self::zero(letters[0].y.len());
        w.hodge_weight = hodge_weight;
        w.add_term(WordKey { hbar, letters }, &c);
        w
    }

    pub fn add_term(&mut self, key: WordKey, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn hodge_weight(&self) -> usize {
        self.hodge_weight
    }

    pub fn with_hodge_weight(mut self, p: usize) -> Self {
        self.hodge_weight = p;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WordKey, &Rational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &DRWord) -> DRWord {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c);
        }
        out.hodge_weight = self.hodge_weight.min(other.hodge_weight);
        out
    }

    pub fn sub(&self, other: &DRWord) -> DRWord {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, factor: &Rational) -> DRWord {
        let mut out = DRWord { nvars: self.nvars, terms: BTreeMap::new(), hodge_weight: self.hodge_weight };
        for (k, c) in &self.terms {
            out.add_term(k.clone(), &(c * factor));
        }
        out
    }

    /// Multiplication by `h^k`.
    pub fn shift_hbar(&self, k: i32) -> DRWord {
        let mut out = DRWord { nvars: self.nvars, terms: BTreeMap::new(), hodge_weight: self.hodge_weight };
        for (key, c) in &self.terms {
            out.add_term(WordKey { hbar: key.hbar + k, letters: key.letters.clone() }, c);
        }
        out
    }

    pub fn cup(&self, other: &DRWord) -> DRWord {
        let mut out = DRWord::zero(self.nvars);
        out.hodge_weight = self.hodge_weight + other.hodge_weight;
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let last = ka.letters.last().expect("nonempty word");
                let Some((neg, mid)) = last.mul(&kb.letters[0]) else { continue };
                let mut letters = ka.letters[..ka.letters.len() - 1].to_vec();
                letters.push(mid);
                letters.extend_from_slice(&kb.letters[1..]);
                let c = ca * cb;
                out.add_term(WordKey { hbar: ka.hbar + kb.hbar, letters }, &if neg { -c } else { c });
            }
        }
        out
    }
}

impl PartialEq for DRWord {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms
    }
}

impl Eq for DRWord {}

fn parity(n: i32) -> bool {
    n.rem_euclid(2) == 1
}

/// Splits an element into words of length one, one per monomial and power of `h`.
fn letters_of(a: &Element) -> Vec<(i32, Monomial, Rational)> {
    let mut out = Vec::new();
    for (mono, c) in a.terms() {
        for (k, r) in c.iter() {
            out.push((k, mono.clone(), r.clone()));
        }
    }
    out
}

/// The length one word `a`.
pub fn dr_of(a: &Element) -> DRWord {
    let mut w = DRWord::zero(a.nvars());
    for (k, mono, c) in letters_of(a) {
        w.add_term(WordKey { hbar: k, letters: vec![mono] }, &c);
    }
    w
}

/// `1 ⊗ a - (-1)^|a| a ⊗ 1`, term by term.
pub fn dr_d(a: &Element) -> DRWord {
    let m = a.nvars();
    let mut w = DRWord::zero(m);
    w.hodge_weight = 1;
    for (k, mono, c) in letters_of(a) {
        let odd = parity(mono.degree());
        w.add_term(WordKey { hbar: k, letters: vec![Monomial::one(m), mono.clone()] }, &c);
        w.add_term(WordKey { hbar: k, letters: vec![mono, Monomial::one(m)] }, &if odd { c } else { -c });
    }
    w
}

pub fn cup(w1: &DRWord, w2: &DRWord) -> DRWord {
    w1.cup(w2)
}

/// Total differential: signed unit insertions plus the Koszul differential
/// applied letter by letter. Both pieces carry the sign of the part of the
/// word to their left.
pub fn dr_total_d(x: &CritLocus, w: &DRWord) -> DRWord {
    let m = w.nvars;
    let mut out = DRWord::zero(m);
    out.hodge_weight = w.hodge_weight;
    for (key, c) in &w.terms {
        let r = key.letters.len() - 1;
        let mut prefix = 0i32;
        for i in 0..=r + 1 {
            let sign = parity(i as i32 + prefix);
            let mut letters = key.letters.clone();
            letters.insert(i, Monomial::one(m));
            out.add_term(WordKey { hbar: key.hbar, letters }, &if sign { -c.clone() } else { c.clone() });
            if i <= r {
                let a = &key.letters[i];
                let da = x.delta(&Element::from_monomial(a.clone(), HSeries::one()));
                for (k, mono, coeff) in letters_of(&da) {
                    let mut letters = key.letters.clone();
                    letters[i] = mono;
                    let v = c * coeff;
                    out.add_term(WordKey { hbar: key.hbar + k, letters }, &if sign { -v } else { v });
                }
                prefix += a.degree();
            }
        }
    }
    out
}

fn letter_op(mono: &Monomial) -> Operator {
    Operator::multiplication(&Element::from_monomial(mono.clone(), HSeries::one()))
}

fn word_factor(key: &WordKey, c: &Rational, trunc: i32) -> HSeries {
    HSeries::monomial(c.clone(), key.hbar).with_trunc(trunc)
}

/// `a_0 Δ a_1 Δ .. Δ a_r`, extended linearly.
pub fn mu(w: &DRWord, delta: &Quantisation, _x: &CritLocus) -> Result<Operator> {
    let ds = delta.series();
    let trunc = delta.trunc_order();
    let mut out = Operator::zero(w.nvars);
    for (key, c) in &w.terms {
        let mut acc = letter_op(&key.letters[0]);
        for a in &key.letters[1..] {
            acc = acc.compose(&ds)?.compose(&letter_op(a))?;
        }
        out.add_assign(&acc.scale_series(&word_factor(key, c, trunc)));
    }
    Ok(out)
}

/// The `mu`-derivation replacing one `Δ` slot by `rho`.
pub fn nu(w: &DRWord, delta: &Quantisation, rho: &Operator, _x: &CritLocus) -> Result<Operator> {
    let ds = delta.series();
    let trunc = delta.trunc_order();
    let mut out = Operator::zero(w.nvars);
    for (k, rho_k) in rho.homogeneous_parts() {
        for (key, c) in &w.terms {
            let r = key.letters.len() - 1;
            let ops: Vec<Operator> = key.letters.iter().map(letter_op).collect();
            // suffix[i] = a_i Δ a_{i+1} .. Δ a_r
            let mut suffix = vec![ops[r].clone(); r + 1];
            for i in (0..r).rev() {
                suffix[i] = ops[i].compose(&ds)?.compose(&suffix[i + 1])?;
            }
            let mut prefix = ops[0].clone();
            let mut prefix_degree = key.letters[0].degree();
            for i in 0..r {
                let term = prefix.compose(&rho_k)?.compose(&suffix[i + 1])?;
                let negative = parity((k - 1) * (prefix_degree + i as i32));
                let term = if negative { term.neg() } else { term };
                out.add_assign(&term.scale_series(&word_factor(key, c, trunc)));
                prefix = prefix.compose(&ds)?.compose(&ops[i + 1])?;
                prefix_degree += key.letters[i + 1].degree();
            }
        }
    }
    Ok(out)
}

/// `δ_Δ mu(w) - mu(Dw) - nu(w, Δ, κ(Δ))`; zero for every `w` and every
/// degree one `Δ`, whether or not `Δ` solves the master equation.
pub fn check_key_identity(w: &DRWord, delta: &Quantisation, x: &CritLocus) -> Result<Operator> {
    let lhs = centre_differential_unchecked(x, delta, &mu(w, delta, x)?)?;
    let dw = mu(&dr_total_d(x, w), delta, x)?;
    let k = kappa(x, delta)?;
    let nw = nu(w, delta, &k, x)?;
    Ok(lhs.sub(&dw).sub(&nw))
}

/// `sum_i d(y_i) ⌣ d(η_i)`.
pub fn canonical_symplectic(x: &CritLocus) -> DRWord {
    let m = x.m();
    let mut w = DRWord::zero(m);
    for i in 0..m {
        w = w.add(&dr_d(&Element::y(m, i)).cup(&dr_d(&Element::eta(m, i))));
    }
    w.with_hodge_weight(2)
}

/// Where coboundary witnesses are searched for: powers `h^1 .. h^max_hbar`
/// and multiplication parts of y-degree at most `coefficient_degree`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompatWindow {
    pub max_hbar: i32,
    pub coefficient_degree: u32,
}

impl Default for CompatWindow {
    fn default() -> Self {
        CompatWindow { max_hbar: 3, coefficient_degree: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompatVerdict {
    ExactCocycleEquality,
    CoboundaryWitness(Operator),
    Fails { residual: Operator, window: CompatWindow },
}

/// Compares `mu(ω, Δ)` with `h^2 dΔ/dh`. When they differ, looks for `h` of
/// one degree lower with `δ_Δ(h)` equal to the difference, among operators
/// of order at most `min(e, 2e - 2)` at `h^e`.
pub fn check_compatibility(omega: &DRWord, delta: &Quantisation, x: &CritLocus, window: &CompatWindow) -> Result<CompatVerdict> {
    if !kappa(x, delta)?.is_zero() {
        return Err(Error::NotMaurerCartan);
    }
    let r = mu(omega, delta, x)?.sub(&delta.series().hbar_derivative_scaled());
    if r.is_zero() {
        return Ok(CompatVerdict::ExactCocycleEquality);
    }
    let fails = || CompatVerdict::Fails { residual: r.clone(), window: *window };
    let Some(deg) = r.degree() else { return Ok(fails()) };

    let mut index: BTreeMap<(i32, crate::diffops::OpMonomial), usize> = BTreeMap::new();
    let mut to_vec = |op: &Operator| -> SparseVec {
        let mut v = SparseVec::new();
        for (mono, c) in op.terms() {
            for (e, q) in c.iter() {
                let n = index.len();
                let id = *index.entry((e, mono.clone())).or_insert(n);
                v.insert(id, q.clone());
            }
        }
        v
    };
    let target = to_vec(&r);
    let mut basis = Vec::new();
    let mut ech = Echelon::new();
    for e in 1..=window.max_hbar {
        let max_order = e.min(2 * e - 2);
        if max_order < 0 {
            continue;
        }
        for mono in op_monomials(x.m(), window.coefficient_degree, max_order as usize) {
            if mono.degree() != deg - 1 {
                continue;
            }
            let h = Operator::from_monomial(mono, HSeries::monomial(Rational::one(), e).with_trunc(delta.trunc_order()));
            let image = centre_differential_unchecked(x, delta, &h)?;
            ech.insert(to_vec(&image));
            basis.push(h);
        }
    }
    match ech.express(target) {
        Some(sol) => {
            let mut witness = Operator::zero(x.m());
            for (j, c) in sol {
                witness.add_assign(&basis[j].scale(&c));
            }
            Ok(CompatVerdict::CoboundaryWitness(witness))
        }
        None => Ok(fails()),
    }
}
