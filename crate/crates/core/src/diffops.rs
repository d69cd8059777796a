//! Normal-ordered differential operators on the free algebra, their
//! principal symbols, and the bracket on symbols.
//!
//! A monomial `y^a η_S ∂_y^b ∂_η^T` keeps every multiplication to the left of
//! every derivative. `∂_{y_i}` has degree 0 and `∂_{η_i}` degree +1.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::coefficients::{HSeries, Rational};
use crate::error::{Error, Result};
use crate::gca::{default_names, exponent_vectors, merge_sign, Element, EtaSet, Monomial};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpMonomial {
    pub mul: Monomial,
    pub dy: Vec<u32>,
    pub deta: EtaSet,
}

impl OpMonomial {
    pub fn identity(m: usize) -> Self {
        OpMonomial { mul: Monomial::one(m), dy: vec![0; m], deta: EtaSet::EMPTY }
    }

    pub fn multiplication(mono: Monomial) -> Self {
        let m = mono.y.len();
        OpMonomial { mul: mono, dy: vec![0; m], deta: EtaSet::EMPTY }
    }

    pub fn nvars(&self) -> usize {
        self.dy.len()
    }

    pub fn order(&self) -> usize {
        self.dy.iter().sum::<u32>() as usize + self.deta.len()
    }

    pub fn degree(&self) -> i32 {
        self.mul.degree() + self.deta.len() as i32
    }

    pub fn fmt_with(&self, names: &[String], sym: bool) -> String {
        let mut parts = Vec::new();
        if !self.mul.is_one() {
            parts.push(self.mul.fmt_with(names));
        }
        let (dy, de) = if sym { ("p_", "q_") } else { ("d_", "d_e") };
        for (i, e) in self.dy.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("{dy}{}", names[i])),
                _ => parts.push(format!("{dy}{}^{}", names[i], e)),
            }
        }
        for i in self.deta.iter() {
            parts.push(format!("{de}{}", i + 1));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// Every operator monomial in `m` variables whose multiplication part has
/// y-degree at most `max_y` and whose order is at most `max_order`.
pub fn op_monomials(m: usize, max_y: u32, max_order: usize) -> Vec<OpMonomial> {
    let mut out = Vec::new();
    for y in exponent_vectors(m, max_y) {
        for s in EtaSet::all_subsets(m) {
            for t in EtaSet::all_subsets(m) {
                if t.len() > max_order {
                    continue;
                }
                for dy in exponent_vectors(m, (max_order - t.len()) as u32) {
                    out.push(OpMonomial { mul: Monomial { y: y.clone(), eta: s }, dy, deta: t });
                }
            }
        }
    }
    out
}

fn add_into(map: &mut BTreeMap<OpMonomial, HSeries>, key: OpMonomial, c: &HSeries) {
    if c.is_zero() {
        return;
    }
    match map.get_mut(&key) {
        Some(existing) => {
            existing.add_assign(c);
            if existing.is_zero() {
                map.remove(&key);
            }
        }
        None => {
            map.insert(key, c.clone());
        }
    }
}

fn falling(c: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(c - i))
}

fn binomial(n: u32, k: u32) -> BigInt {
    falling(n, k) / falling(k, k)
}

/// `∂^b y^c = sum_k coeff(k) y^(c-k) ∂^(b-k)`, one variable at a time.
fn leibniz_terms(b: &[u32], c: &[u32]) -> Vec<(Vec<u32>, BigInt)> {
    let mut acc: Vec<(Vec<u32>, BigInt)> = vec![(Vec::with_capacity(b.len()), BigInt::one())];
    for (bi, ci) in b.iter().zip(c) {
        let mut next = Vec::new();
        for (ks, coeff) in &acc {
            for k in 0..=(*bi).min(*ci) {
                let mut ks2 = ks.clone();
                ks2.push(k);
                next.push((ks2, coeff * binomial(*bi, k) * falling(*ci, k)));
            }
        }
        acc = next;
    }
    acc
}

/// Normal order of `η_S ∂_η^T · η_U ∂_η^V`, as signed `(S', T')` pairs.
fn odd_product(s: EtaSet, t: EtaSet, u: EtaSet, v: EtaSet) -> Vec<(bool, EtaSet, EtaSet)> {
    let mut terms = vec![(false, s, t)];
    for j in u.iter() {
        let mut next = Vec::with_capacity(terms.len() * 2);
        for (neg, s, t) in terms {
            if let Some(flip) = merge_sign(s, EtaSet::single(j)) {
                // η_j moves left across ∂_η^T
                next.push((neg ^ (t.len() % 2 == 1) ^ flip, s.with(j), t));
            }
            if t.contains(j) {
                next.push((neg ^ (t.count_above(j) % 2 == 1), s, t.without(j)));
            }
        }
        terms = next;
    }
    for j in v.iter() {
        terms = terms
            .into_iter()
            .filter(|(_, _, t)| !t.contains(j))
            .map(|(neg, s, t)| (neg ^ (t.count_above(j) % 2 == 1), s, t.with(j)))
            .collect();
    }
    terms
}

/// Product of two operator monomials in normal order, unit coefficient.
pub fn compose_monomials(a: &OpMonomial, b: &OpMonomial) -> Vec<(OpMonomial, Rational)> {
    let odd = odd_product(a.mul.eta, a.deta, b.mul.eta, b.deta);
    if odd.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (ks, coeff) in leibniz_terms(&a.dy, &b.mul.y) {
        let y: Vec<u32> = a.mul.y.iter().zip(&b.mul.y).zip(&ks).map(|((p, q), k)| p + q - k).collect();
        let dy: Vec<u32> = a.dy.iter().zip(&b.dy).zip(&ks).map(|((p, q), k)| p + q - k).collect();
        for (neg, s, t) in &odd {
            let c = Rational::from_integer(if *neg { -coeff.clone() } else { coeff.clone() });
            out.push((OpMonomial { mul: Monomial { y: y.clone(), eta: *s }, dy: dy.clone(), deta: *t }, c));
        }
    }
    out
}

/// A finite sum of normal-ordered operator monomials with `HSeries`
/// coefficients, read as an operator-valued series in `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operator {
    nvars: usize,
    terms: BTreeMap<OpMonomial, HSeries>,
}

impl Operator {
    pub fn zero(m: usize) -> Self {
        Operator { nvars: m, terms: BTreeMap::new() }
    }

    pub fn identity(m: usize) -> Self {
        Self::from_monomial(OpMonomial::identity(m), HSeries::one())
    }

    pub fn from_monomial(mono: OpMonomial, c: HSeries) -> Self {
        let mut op = Self::zero(mono.nvars());
        op.add_term(mono, &c);
        op
    }

    pub fn from_terms<I: IntoIterator<Item = (OpMonomial, HSeries)>>(m: usize, terms: I) -> Self {
        let mut op = Self::zero(m);
        for (mono, c) in terms {
            assert_eq!(mono.nvars(), m, "operator monomial has the wrong number of variables");
            op.add_term(mono, &c);
        }
        op
    }

    /// Left multiplication by an element.
    pub fn multiplication(a: &Element) -> Self {
        Self::from_terms(a.nvars(), a.terms().map(|(m, c)| (OpMonomial::multiplication(m.clone()), c.clone())))
    }

    pub fn y(m: usize, i: usize) -> Self {
        Self::multiplication(&Element::y(m, i))
    }

    pub fn eta(m: usize, i: usize) -> Self {
        Self::multiplication(&Element::eta(m, i))
    }

    pub fn dy(m: usize, i: usize) -> Self {
        let mut mono = OpMonomial::identity(m);
        mono.dy[i] = 1;
        Self::from_monomial(mono, HSeries::one())
    }

    pub fn deta(m: usize, i: usize) -> Self {
        let mut mono = OpMonomial::identity(m);
        mono.deta = EtaSet::single(i);
        Self::from_monomial(mono, HSeries::one())
    }

    pub fn add_term(&mut self, mono: OpMonomial, c: &HSeries) {
        add_into(&mut self.terms, mono, c);
    }

    pub fn nvars(&self) -> usize {
        self.nvars
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

    pub fn terms(&self) -> impl Iterator<Item = (&OpMonomial, &HSeries)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &OpMonomial) -> HSeries {
        self.terms.get(mono).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Operator) -> Operator {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Operator) {
        for (mono, c) in &other.terms {
            add_into(&mut self.terms, mono.clone(), c);
        }
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Operator {
        self.map_coeffs(HSeries::neg)
    }

    pub fn scale(&self, factor: &Rational) -> Operator {
        self.map_coeffs(|c| c.scale(factor))
    }

    pub fn scale_series(&self, factor: &HSeries) -> Operator {
        self.map_coeffs(|c| c.mul(factor))
    }

    /// Multiplication by `h^k`.
    pub fn shift_hbar(&self, k: i32) -> Operator {
        self.map_coeffs(|c| c.shift(k))
    }

    /// `h^2 d/dh` applied coefficientwise.
    pub fn hbar_derivative_scaled(&self) -> Operator {
        self.map_coeffs(HSeries::hbar_derivative_scaled)
    }

    /// Substitution `h -> -h`.
    pub fn negate_hbar(&self) -> Operator {
        self.map_coeffs(HSeries::negate_hbar)
    }

    pub fn map_coeffs<F: Fn(&HSeries) -> HSeries>(&self, f: F) -> Operator {
        let mut out = Operator::zero(self.nvars);
        for (mono, c) in &self.terms {
            out.add_term(mono.clone(), &f(c));
        }
        out
    }

    pub fn filter<F: Fn(&OpMonomial) -> bool>(&self, keep: F) -> Operator {
        Operator {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// The coefficient of `h^e`, as an operator with constant coefficients.
    pub fn hbar_coefficient(&self, e: i32) -> Operator {
        let mut out = Operator::zero(self.nvars);
        for (mono, c) in &self.terms {
            out.add_term(mono.clone(), &HSeries::constant(c.coeff(e)));
        }
        out
    }

    /// Every exponent of `h` that occurs.
    pub fn hbar_exponents(&self) -> std::collections::BTreeSet<i32> {
        self.terms.values().flat_map(|c| c.iter().map(|(k, _)| k).collect::<Vec<_>>()).collect()
    }

    pub fn is_truncated(&self) -> bool {
        self.terms.values().any(HSeries::is_truncated)
    }

    /// The common cohomological degree, `None` when zero or mixed.
    pub fn degree(&self) -> Option<i32> {
        let mut degs = self.terms.keys().map(OpMonomial::degree);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn homogeneous_parts(&self) -> BTreeMap<i32, Operator> {
        let mut out: BTreeMap<i32, Operator> = BTreeMap::new();
        for (mono, c) in &self.terms {
            out.entry(mono.degree()).or_insert_with(|| Operator::zero(self.nvars)).add_term(mono.clone(), c);
        }
        out
    }

    /// Largest total derivative degree.
    pub fn order(&self) -> Result<usize> {
        self.terms.keys().map(OpMonomial::order).max().ok_or(Error::ZeroOperator)
    }

    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.nvars != other.nvars {
            return Err(Error::SignatureMismatch(self.nvars, other.nvars));
        }
        let mut out = Operator::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let prod = ca.mul(cb);
                for (mono, k) in compose_monomials(ma, mb) {
                    out.add_term(mono, &prod.scale(&k));
                }
            }
        }
        Ok(out)
    }

    /// Graded commutator, taken over homogeneous components.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        if self.nvars != other.nvars {
            return Err(Error::SignatureMismatch(self.nvars, other.nvars));
        }
        let mut out = Operator::zero(self.nvars);
        let right = other.homogeneous_parts();
        for (da, a) in self.homogeneous_parts() {
            for (db, b) in &right {
                let ab = a.compose(b)?;
                let ba = b.compose(&a)?;
                if (da * db).rem_euclid(2) == 1 {
                    out.add_assign(&ab.add(&ba));
                } else {
                    out.add_assign(&ab.sub(&ba));
                }
            }
        }
        Ok(out)
    }

    /// Evaluates the operator on an element.
    pub fn apply(&self, a: &Element) -> Result<Element> {
        if self.nvars != a.nvars() {
            return Err(Error::SignatureMismatch(self.nvars, a.nvars()));
        }
        let mut out = Element::zero(self.nvars);
        for (op, c) in &self.terms {
            for (mono, d) in a.terms() {
                let Some((neg, reduced)) = apply_monomial(op, mono) else { continue };
                let (coeff, mono2) = reduced;
                let Some((flip, prod)) = op.mul.mul(&mono2) else { continue };
                let mut k = c.mul(d).scale(&coeff);
                if neg ^ flip {
                    k = k.neg();
                }
                out.add_term(prod, &k);
            }
        }
        Ok(out)
    }

    /// The order `k` part as a polyvector.
    pub fn symbol(&self, k: usize) -> Result<Polyvector> {
        if let Ok(order) = self.order() {
            if order > k {
                return Err(Error::OrderTooLow { order, k });
            }
        }
        Ok(Polyvector {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(m, _)| m.order() == k).map(|(m, c)| (m.clone(), c.clone())).collect(),
        })
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        fmt_terms(&self.terms, names, false)
    }
}

/// Derivative part of `op` applied to `mono`: sign, coefficient, result.
fn apply_monomial(op: &OpMonomial, mono: &Monomial) -> Option<(bool, (Rational, Monomial))> {
    let mut w = mono.eta;
    let mut neg = false;
    for j in op.deta.iter().rev() {
        if !w.contains(j) {
            return None;
        }
        neg ^= w.count_below(j) % 2 == 1;
        w = w.without(j);
    }
    let mut coeff = BigInt::one();
    let mut y = mono.y.clone();
    for (i, b) in op.dy.iter().enumerate() {
        if y[i] < *b {
            return None;
        }
        coeff *= falling(y[i], *b);
        y[i] -= b;
    }
    Some((neg, (Rational::from_integer(coeff), Monomial { y, eta: w })))
}

fn fmt_terms(terms: &BTreeMap<OpMonomial, HSeries>, names: &[String], sym: bool) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    terms
        .iter()
        .rev()
        .map(|(m, c)| match c.as_constant() {
            Some(r) if r.is_one() => m.fmt_with(names, sym),
            _ => format!("({c})*{}", m.fmt_with(names, sym)),
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&default_names(self.nvars)))
    }
}

/// Graded-commutative symbols `y, η, ξ = σ(∂_y), π = σ(∂_η)`, stored with the
/// same keys as operators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyvector {
    nvars: usize,
    terms: BTreeMap<OpMonomial, HSeries>,
}

/// Which generator a derivative is taken with respect to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Gen {
    Y(usize),
    Eta(usize),
    Xi(usize),
    Pi(usize),
}

impl Polyvector {
    pub fn zero(m: usize) -> Self {
        Polyvector { nvars: m, terms: BTreeMap::new() }
    }

    pub fn from_monomial(mono: OpMonomial, c: HSeries) -> Self {
        let mut p = Self::zero(mono.nvars());
        add_into(&mut p.terms, mono, &c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (OpMonomial, HSeries)>>(m: usize, terms: I) -> Self {
        let mut p = Self::zero(m);
        for (mono, c) in terms {
            add_into(&mut p.terms, mono, &c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpMonomial, &HSeries)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Polyvector) -> Polyvector {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            add_into(&mut out.terms, m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Polyvector) -> Polyvector {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, factor: &Rational) -> Polyvector {
        Polyvector::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), c.scale(factor))))
    }

    /// The common arity (number of `ξ, π` factors).
    pub fn arity(&self) -> Result<usize> {
        let mut it = self.terms.keys().map(OpMonomial::order);
        let Some(first) = it.next() else { return Ok(0) };
        if it.all(|a| a == first) {
            Ok(first)
        } else {
            Err(Error::ArityMismatch)
        }
    }

    pub fn degree(&self) -> Option<i32> {
        let mut degs = self.terms.keys().map(OpMonomial::degree);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn homogeneous_parts(&self) -> BTreeMap<i32, Polyvector> {
        let mut out: BTreeMap<i32, Polyvector> = BTreeMap::new();
        for (mono, c) in &self.terms {
            add_into(&mut out.entry(mono.degree()).or_insert_with(|| Polyvector::zero(self.nvars)).terms, mono.clone(), c);
        }
        out
    }

    /// The operator with the same normal-ordered monomials.
    pub fn lift(&self) -> Operator {
        Operator { nvars: self.nvars, terms: self.terms.clone() }
    }

    /// Graded-commutative product.
    pub fn mul(&self, other: &Polyvector) -> Result<Polyvector> {
        if self.nvars != other.nvars {
            return Err(Error::SignatureMismatch(self.nvars, other.nvars));
        }
        let mut out = Polyvector::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some((neg, mono)) = symbol_product(a, b) {
                    let c = ca.mul(cb);
                    add_into(&mut out.terms, mono, &if neg { c.neg() } else { c });
                }
            }
        }
        Ok(out)
    }

    fn derivative(&self, g: Gen, right: bool) -> Polyvector {
        let mut out = Polyvector::zero(self.nvars);
        for (mono, c) in &self.terms {
            let s = mono.mul.eta;
            let t = mono.deta;
            let mut m2 = mono.clone();
            let (factor, neg): (u32, bool) = match g {
                Gen::Y(i) => {
                    let e = mono.mul.y[i];
                    if e == 0 {
                        continue;
                    }
                    m2.mul.y[i] -= 1;
                    (e, false)
                }
                Gen::Xi(i) => {
                    let e = mono.dy[i];
                    if e == 0 {
                        continue;
                    }
                    m2.dy[i] -= 1;
                    (e, false)
                }
                Gen::Eta(i) => {
                    if !s.contains(i) {
                        continue;
                    }
                    m2.mul.eta = s.without(i);
                    let swaps = if right { s.count_above(i) + t.len() } else { s.count_below(i) };
                    (1, swaps % 2 == 1)
                }
                Gen::Pi(i) => {
                    if !t.contains(i) {
                        continue;
                    }
                    m2.deta = t.without(i);
                    let swaps = if right { t.count_above(i) } else { s.len() + t.count_below(i) };
                    (1, swaps % 2 == 1)
                }
            };
            let k = Rational::from_integer(BigInt::from(if neg { -i64::from(factor) } else { i64::from(factor) }));
            add_into(&mut out.terms, m2, &c.scale(&k));
        }
        out
    }

    /// Left derivative in `ξ_i`.
    pub fn d_xi(&self, i: usize) -> Polyvector {
        self.derivative(Gen::Xi(i), false)
    }

    /// Left derivative in `π_i`.
    pub fn d_pi(&self, i: usize) -> Polyvector {
        self.derivative(Gen::Pi(i), false)
    }

    /// The arity zero part read as an element of the algebra.
    pub fn arity_zero_part(&self) -> Element {
        Element::from_terms(self.nvars, self.terms.iter().filter(|(m, _)| m.order() == 0).map(|(m, c)| (m.mul.clone(), c.clone())))
    }

    /// Bracket induced by `{ξ_i, y_i} = 1` and `{π_i, η_i} = {η_i, π_i} = 1`,
    /// a right derivation in the first slot and a left one in the second.
    pub fn schouten(&self, other: &Polyvector) -> Result<Polyvector> {
        if self.nvars != other.nvars {
            return Err(Error::SignatureMismatch(self.nvars, other.nvars));
        }
        self.arity()?;
        other.arity()?;
        let mut out = Polyvector::zero(self.nvars);
        for i in 0..self.nvars {
            let pairs = [
                (Gen::Xi(i), Gen::Y(i), false),
                (Gen::Y(i), Gen::Xi(i), true),
                (Gen::Pi(i), Gen::Eta(i), false),
                (Gen::Eta(i), Gen::Pi(i), false),
            ];
            for (a, b, negate) in pairs {
                let lhs = self.derivative(a, true);
                if lhs.is_zero() {
                    continue;
                }
                let rhs = other.derivative(b, false);
                let term = lhs.mul(&rhs)?;
                out = if negate { out.sub(&term) } else { out.add(&term) };
            }
        }
        Ok(out)
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        fmt_terms(&self.terms, names, true)
    }
}

impl fmt::Display for Polyvector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&default_names(self.nvars)))
    }
}

/// `y^a η_S ξ^b π_T · y^c η_U ξ^d π_V` in the free graded-commutative algebra.
fn symbol_product(a: &OpMonomial, b: &OpMonomial) -> Option<(bool, OpMonomial)> {
    let (f1, mul) = a.mul.mul(&b.mul)?;
    let f2 = merge_sign(a.deta, b.deta)?;
    let f3 = (a.deta.len() * b.mul.eta.len()) % 2 == 1;
    let dy = a.dy.iter().zip(&b.dy).map(|(p, q)| p + q).collect();
    Some((f1 ^ f2 ^ f3, OpMonomial { mul, dy, deta: a.deta.union(b.deta) }))
}

pub fn op_apply(d: &Operator, a: &Element) -> Result<Element> {
    d.apply(a)
}

pub fn op_compose(d1: &Operator, d2: &Operator) -> Result<Operator> {
    d1.compose(d2)
}

pub fn op_commutator(d1: &Operator, d2: &Operator) -> Result<Operator> {
    d1.commutator(d2)
}

pub fn op_order(d: &Operator) -> Result<usize> {
    d.order()
}

pub fn symbol(d: &Operator, k: usize) -> Result<Polyvector> {
    d.symbol(k)
}

pub fn schouten(p1: &Polyvector, p2: &Polyvector) -> Result<Polyvector> {
    p1.schouten(p2)
}
