//! The free graded-commutative algebra `Q[y_1..y_m] ⊗ Λ[η_1..η_m]` with the
//! Koszul differential of a potential `f`.
//!
//! Degrees are cohomological: `y_i` sits in degree 0 and `η_i` in degree -1.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::coefficients::{format_rational, int, HSeries, Rational};
use crate::error::{Error, Result};
use crate::linalg::{self, SparseVec};

/// A subset of `{0, .., 31}` stored as a bit mask. Ordered lexicographically
/// on the ascending list of its members.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct EtaSet(pub u32);

impl EtaSet {
    pub const EMPTY: EtaSet = EtaSet(0);

    pub fn single(i: usize) -> Self {
        EtaSet(1 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        EtaSet(it.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        EtaSet(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Self {
        EtaSet(self.0 & !(1 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_disjoint(self, other: EtaSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: EtaSet) -> Self {
        EtaSet(self.0 | other.0)
    }

    /// Members strictly below `i`.
    pub fn count_below(self, i: usize) -> usize {
        (self.0 & ((1u32 << i) - 1)).count_ones() as usize
    }

    /// Members strictly above `i`.
    pub fn count_above(self, i: usize) -> usize {
        (self.0 >> (i + 1)).count_ones() as usize
    }

    pub fn iter(self) -> impl DoubleEndedIterator<Item = usize> {
        (0..32).filter(move |i| self.contains(*i))
    }

    /// All subsets of `{0, .., m-1}`.
    pub fn all_subsets(m: usize) -> impl Iterator<Item = EtaSet> {
        (0..(1u32 << m)).map(EtaSet)
    }
}

impl PartialOrd for EtaSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EtaSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

/// Sign of `η_a η_b -> ± η_{a ∪ b}`, or `None` when the sets overlap.
pub fn merge_sign(a: EtaSet, b: EtaSet) -> Option<bool> {
    if !a.is_disjoint(b) {
        return None;
    }
    let swaps: usize = b.iter().map(|u| a.count_above(u)).sum();
    Some(swaps % 2 == 1)
}

/// `y^exponents η_eta`, the η part written in ascending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub y: Vec<u32>,
    pub eta: EtaSet,
}

impl Monomial {
    pub fn one(m: usize) -> Self {
        Monomial { y: vec![0; m], eta: EtaSet::EMPTY }
    }

    pub fn y_var(m: usize, i: usize) -> Self {
        let mut mono = Self::one(m);
        mono.y[i] = 1;
        mono
    }

    pub fn eta_var(m: usize, i: usize) -> Self {
        Monomial { y: vec![0; m], eta: EtaSet::single(i) }
    }

    pub fn degree(&self) -> i32 {
        -(self.eta.len() as i32)
    }

    pub fn y_degree(&self) -> u32 {
        self.y.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.eta.is_empty() && self.y.iter().all(|e| *e == 0)
    }

    /// Product with Koszul sign, `None` when an η repeats.
    pub fn mul(&self, other: &Monomial) -> Option<(bool, Monomial)> {
        let negative = merge_sign(self.eta, other.eta)?;
        let y = self.y.iter().zip(&other.y).map(|(a, b)| a + b).collect();
        Some((negative, Monomial { y, eta: self.eta.union(other.eta) }))
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (i, e) in self.y.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(names[i].clone()),
                _ => parts.push(format!("{}^{}", names[i], e)),
            }
        }
        for i in self.eta.iter() {
            parts.push(format!("e{}", i + 1));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

pub(crate) fn default_names(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("y{i}")).collect()
}

/// All exponent vectors of length `m` with total degree at most `max`.
pub fn exponent_vectors(m: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; m];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, max, &mut cur, &mut out);
    out
}

/// Sparse linear combination of monomials with `HSeries` coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    nvars: usize,
    terms: BTreeMap<Monomial, HSeries>,
}

impl Element {
    pub fn zero(m: usize) -> Self {
        Element { nvars: m, terms: BTreeMap::new() }
    }

    pub fn one(m: usize) -> Self {
        Self::from_monomial(Monomial::one(m), HSeries::one())
    }

    pub fn constant(m: usize, c: Rational) -> Self {
        Self::from_monomial(Monomial::one(m), HSeries::constant(c))
    }

    pub fn y(m: usize, i: usize) -> Self {
        Self::from_monomial(Monomial::y_var(m, i), HSeries::one())
    }

    pub fn eta(m: usize, i: usize) -> Self {
        Self::from_monomial(Monomial::eta_var(m, i), HSeries::one())
    }

    pub fn from_monomial(mono: Monomial, c: HSeries) -> Self {
        let mut e = Self::zero(mono.y.len());
        e.add_term(mono, &c);
        e
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, HSeries)>>(m: usize, terms: I) -> Self {
        let mut e = Self::zero(m);
        for (mono, c) in terms {
            assert_eq!(mono.y.len(), m, "monomial has the wrong number of variables");
            e.add_term(mono, &c);
        }
        e
    }

    pub fn add_term(&mut self, mono: Monomial, c: &HSeries) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                existing.add_assign(c);
                if existing.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c.clone());
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &HSeries)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &Monomial) -> HSeries {
        self.terms.get(mono).cloned().unwrap_or_default()
    }

    /// The common degree of all terms, `None` for zero or mixed elements.
    pub fn degree(&self) -> Option<i32> {
        let mut degs = self.terms.keys().map(Monomial::degree);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Splits into homogeneous components.
    pub fn homogeneous_parts(&self) -> BTreeMap<i32, Element> {
        let mut out: BTreeMap<i32, Element> = BTreeMap::new();
        for (mono, c) in &self.terms {
            out.entry(mono.degree()).or_insert_with(|| Element::zero(self.nvars)).add_term(mono.clone(), c);
        }
        out
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.add_term(mono.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Element {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, factor: &Rational) -> Element {
        let mut out = Element::zero(self.nvars);
        for (mono, c) in &self.terms {
            out.add_term(mono.clone(), &c.scale(factor));
        }
        out
    }

    pub fn scale_series(&self, factor: &HSeries) -> Element {
        let mut out = Element::zero(self.nvars);
        for (mono, c) in &self.terms {
            out.add_term(mono.clone(), &c.mul(factor));
        }
        out
    }

    /// Graded-commutative product.
    pub fn gmul(&self, other: &Element) -> Result<Element> {
        if self.nvars != other.nvars {
            return Err(Error::SignatureMismatch(self.nvars, other.nvars));
        }
        let mut out = Element::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((negative, mono)) = ma.mul(mb) {
                    let c = ca.mul(cb);
                    out.add_term(mono, &if negative { c.neg() } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Formal partial derivative in `y_i`.
    pub fn y_derivative(&self, i: usize) -> Element {
        let mut out = Element::zero(self.nvars);
        for (mono, c) in &self.terms {
            let e = mono.y[i];
            if e == 0 {
                continue;
            }
            let mut m2 = mono.clone();
            m2.y[i] -= 1;
            out.add_term(m2, &c.scale(&int(i64::from(e))));
        }
        out
    }

    /// True when there is no η and every coefficient is an `h`-free constant.
    pub fn is_plain_polynomial(&self) -> bool {
        self.terms.iter().all(|(m, c)| m.eta.is_empty() && c.as_constant().is_some())
    }

    /// Drops every term containing an η.
    pub fn body(&self) -> Element {
        Element::from_terms(self.nvars, self.terms.iter().filter(|(m, _)| m.eta.is_empty()).map(|(m, c)| (m.clone(), c.clone())))
    }

    /// Total y-degree of the highest term.
    pub fn y_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::y_degree).max()
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (mono, c)) in self.terms.iter().rev().enumerate() {
            let coeff = match c.as_constant() {
                Some(r) => {
                    let negative = r.is_negative();
                    let mag = r.abs();
                    if i > 0 {
                        out.push_str(if negative { " - " } else { " + " });
                    } else if negative {
                        out.push('-');
                    }
                    if mag.is_one() && !mono.is_one() {
                        String::new()
                    } else {
                        format_rational(&mag)
                    }
                }
                None => {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    format!("({c})")
                }
            };
            let body = mono.fmt_with(names);
            match (coeff.is_empty(), mono.is_one()) {
                (true, _) => out.push_str(&body),
                (false, true) => out.push_str(&coeff),
                (false, false) => out.push_str(&format!("{coeff}*{body}")),
            }
        }
        out
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&default_names(self.nvars)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraSignature {
    pub m: usize,
    pub weights: Option<Vec<Rational>>,
}

/// The derived critical locus of a polynomial potential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CritLocus {
    pub signature: AlgebraSignature,
    pub f: Element,
    pub partials: Vec<Element>,
}

impl CritLocus {
    pub fn m(&self) -> usize {
        self.signature.m
    }

    /// Koszul differential: the degree +1 derivation with `δ(η_i) = ∂_i f`.
    pub fn delta(&self, a: &Element) -> Element {
        let m = self.m();
        let mut out = Element::zero(m);
        for (mono, c) in a.terms() {
            for (pos, u) in mono.eta.iter().enumerate() {
                let rest = Monomial { y: mono.y.clone(), eta: mono.eta.without(u) };
                let coeff = if pos % 2 == 1 { c.neg() } else { c.clone() };
                for (pm, pc) in self.partials[u].terms() {
                    let (_, prod) = pm.mul(&rest).expect("partials carry no η");
                    out.add_term(prod, &pc.mul(&coeff));
                }
            }
        }
        out
    }

    /// Total degree of each partial derivative, at least 1.
    pub fn partial_degrees(&self) -> Vec<u32> {
        self.partials.iter().map(|p| p.y_degree().unwrap_or(0).max(1)).collect()
    }
}

/// Builds the critical locus of `f`, detecting quasi-homogeneity weights.
pub fn make_crit_locus(f: &Element, m: usize) -> Result<CritLocus> {
    if f.nvars() != m {
        return Err(Error::SignatureMismatch(f.nvars(), m));
    }
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !f.is_plain_polynomial() {
        return Err(Error::NotPolynomial);
    }
    let partials = (0..m).map(|i| f.y_derivative(i)).collect();
    let weights = detect_weights(f);
    Ok(CritLocus { signature: AlgebraSignature { m, weights }, f: f.clone(), partials })
}

pub fn apply_koszul_delta(x: &CritLocus, a: &Element) -> Result<Element> {
    if a.nvars() != x.m() {
        return Err(Error::SignatureMismatch(a.nvars(), x.m()));
    }
    Ok(x.delta(a))
}

/// Solves `sum_i w_i a_i = 1` over the exponent vectors of `f`. Weights are
/// kept only when the solution is unique and strictly positive.
pub fn detect_weights(f: &Element) -> Option<Vec<Rational>> {
    let m = f.nvars();
    let columns: Vec<SparseVec> = (0..m)
        .map(|i| {
            f.terms()
                .enumerate()
                .filter(|(_, (mono, _))| mono.y[i] != 0)
                .map(|(r, (mono, _))| (r, int(i64::from(mono.y[i]))))
                .collect()
        })
        .collect();
    if linalg::rank(columns.iter().cloned()) < m {
        return None;
    }
    let target: SparseVec = (0..f.len()).map(|r| (r, Rational::one())).collect();
    let sol = linalg::solve(&columns, &target)?;
    let weights: Vec<Rational> = (0..m).map(|i| sol.get(&i).cloned().unwrap_or_else(Rational::zero)).collect();
    weights.iter().all(Rational::is_positive).then_some(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::rat;

    fn poly(m: usize, terms: &[(&[u32], i64)]) -> Element {
        Element::from_terms(m, terms.iter().map(|(e, c)| (Monomial { y: e.to_vec(), eta: EtaSet::EMPTY }, HSeries::from_int(*c))))
    }

    #[test]
    fn eta_anticommute() {
        let e1 = Element::eta(2, 0);
        let e2 = Element::eta(2, 1);
        let e12 = e1.gmul(&e2).unwrap();
        assert_eq!(e2.gmul(&e1).unwrap(), e12.neg());
        assert!(e1.gmul(&e1).unwrap().is_zero());
    }

    #[test]
    fn cross_terms_cancel() {
        let y = Element::y(1, 0);
        let e = Element::eta(1, 0);
        let p = y.add(&e).gmul(&y.sub(&e)).unwrap();
        assert_eq!(p, y.gmul(&y).unwrap());
    }

    #[test]
    fn partials_and_weights() {
        let f = poly(2, &[(&[3, 0], 1), (&[0, 3], 1)]);
        let x = make_crit_locus(&f, 2).unwrap();
        assert_eq!(x.partials[0], poly(2, &[(&[2, 0], 3)]));
        assert_eq!(x.partials[1], poly(2, &[(&[0, 2], 3)]));
        assert_eq!(x.signature.weights, Some(vec![rat(1, 3), rat(1, 3)]));

        let g = poly(2, &[(&[3, 0], 1), (&[1, 1], 1)]);
        let xg = make_crit_locus(&g, 2).unwrap();
        assert_eq!(xg.partials[0], poly(2, &[(&[2, 0], 3), (&[0, 1], 1)]));
        assert_eq!(xg.signature.weights, Some(vec![rat(1, 3), rat(2, 3)]));
    }

    #[test]
    fn non_quasi_homogeneous_has_no_weights() {
        let f = poly(1, &[(&[2], 1), (&[3], 1)]);
        assert_eq!(make_crit_locus(&f, 1).unwrap().signature.weights, None);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(make_crit_locus(&Element::zero(1), 1), Err(Error::ZeroPolynomial));
        assert_eq!(make_crit_locus(&Element::eta(1, 0), 1), Err(Error::NotPolynomial));
        let hf = Element::from_monomial(Monomial::y_var(1, 0), HSeries::hbar());
        assert_eq!(make_crit_locus(&hf, 1), Err(Error::NotPolynomial));
    }

    #[test]
    fn koszul_delta_examples() {
        let x = make_crit_locus(&poly(1, &[(&[2], 1)]), 1).unwrap();
        assert_eq!(x.delta(&Element::eta(1, 0)), poly(1, &[(&[1], 2)]));
        assert!(x.delta(&Element::y(1, 0)).is_zero());

        let x2 = make_crit_locus(&poly(2, &[(&[3, 0], 1), (&[0, 3], 1)]), 2).unwrap();
        let e12 = Element::eta(2, 0).gmul(&Element::eta(2, 1)).unwrap();
        let expect = poly(2, &[(&[2, 0], 3)])
            .gmul(&Element::eta(2, 1))
            .unwrap()
            .sub(&poly(2, &[(&[0, 2], 3)]).gmul(&Element::eta(2, 0)).unwrap());
        assert_eq!(x2.delta(&e12), expect);
    }

    #[test]
    fn eta_set_order_is_lexicographic() {
        let a = EtaSet::from_indices([0, 2]);
        let b = EtaSet::from_indices([1]);
        assert!(a < b);
        assert!(EtaSet::EMPTY < a);
        assert_eq!(a.count_below(2), 1);
        assert_eq!(a.count_above(0), 1);
    }

    #[test]
    fn display() {
        let f = poly(2, &[(&[3, 0], 1), (&[1, 1], -2)]);
        assert_eq!(f.fmt_with(&["x".into(), "y".into()]), "x^3 - 2*x*y");
    }
}
