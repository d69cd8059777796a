//! Quantisations `Δ = sum_j Δ_j h^(j-1)` with `Δ_j` of order at most `j`,
//! the master equation residual, the tangent vector `h^2 d/dh`, the
//! differential on the centre, nondegeneracy and filtration bookkeeping.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_traits::{One, Zero};

use crate::coefficients::{int, HSeries, Rational, DEFAULT_TRUNCATION};
use crate::derham::{canonical_symplectic, nu};
use crate::diffops::{op_monomials, OpMonomial, Operator, Polyvector};
use crate::error::{Error, Result};
use crate::gca::{CritLocus, Element};
use crate::linalg::Matrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quantisation {
    nvars: usize,
    coeffs: BTreeMap<usize, Operator>,
    /// Level beyond which coefficients are unknown; `None` means exact.
    pub g_trunc: Option<usize>,
    trunc: i32,
}

impl Quantisation {
    pub fn zero(m: usize) -> Self {
        Quantisation { nvars: m, coeffs: BTreeMap::new(), g_trunc: None, trunc: DEFAULT_TRUNCATION }
    }

    /// Validates `j >= 2`, `h`-free coefficients, order at most `j` and
    /// degree one.
    pub fn new(m: usize, coeffs: BTreeMap<usize, Operator>) -> Result<Self> {
        let mut out = Self::zero(m);
        for (j, op) in coeffs {
            if op.nvars() != m {
                return Err(Error::SignatureMismatch(op.nvars(), m));
            }
            if op.is_zero() {
                continue;
            }
            if j < 2 {
                return Err(Error::InvalidQuantisation(format!("coefficient index {j} is below 2")));
            }
            if op.terms().any(|(_, c)| c.as_constant().is_none()) {
                return Err(Error::InvalidQuantisation(format!("coefficient {j} depends on h")));
            }
            let order = op.order()?;
            if order > j {
                return Err(Error::InvalidQuantisation(format!("coefficient {j} has order {order}")));
            }
            if op.degree() != Some(1) {
                return Err(Error::InvalidQuantisation(format!("coefficient {j} is not of degree 1")));
            }
            out.coeffs.insert(j, op);
        }
        Ok(out)
    }

    /// Reads coefficients off an operator series: the `h^e` part becomes `Δ_(e+1)`.
    pub fn from_series(op: &Operator) -> Result<Self> {
        let coeffs = op.hbar_exponents().into_iter().map(|e| ((e + 1).max(0) as usize, op.hbar_coefficient(e))).collect();
        if op.hbar_exponents().iter().any(|e| *e < 1) {
            return Err(Error::InvalidQuantisation("series has terms below h^1".into()));
        }
        Self::new(op.nvars(), coeffs)
    }

    pub fn with_trunc(mut self, trunc: i32) -> Self {
        self.trunc = trunc;
        self
    }

    pub fn trunc_order(&self) -> i32 {
        self.trunc
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, Operator> {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Operator {
        self.coeffs.get(&j).cloned().unwrap_or_else(|| Operator::zero(self.nvars))
    }

    /// `sum_j Δ_j h^(j-1)`.
    pub fn series(&self) -> Operator {
        let mut out = Operator::zero(self.nvars);
        for (j, op) in &self.coeffs {
            let h = HSeries::monomial(Rational::one(), *j as i32 - 1).with_trunc(self.trunc);
            out.add_assign(&op.scale_series(&h));
        }
        out
    }
}

/// `h sum_i ∂_{y_i} ∂_{η_i}`.
pub fn bv_quantisation(x: &CritLocus) -> Quantisation {
    let m = x.m();
    let mut d2 = Operator::zero(m);
    for i in 0..m {
        d2.add_assign(&Operator::dy(m, i).compose(&Operator::deta(m, i)).expect("same signature"));
    }
    Quantisation::new(m, BTreeMap::from([(2, d2)])).expect("the BV operator is a valid quantisation")
}

/// The Koszul differential as the operator `sum_i (∂_i f) ∂_{η_i}`.
pub fn delta_operator(x: &CritLocus) -> Operator {
    let m = x.m();
    let mut out = Operator::zero(m);
    for (i, p) in x.partials.iter().enumerate() {
        out.add_assign(&Operator::multiplication(p).compose(&Operator::deta(m, i)).expect("same signature"));
    }
    out
}

/// `[δ, Δ] + 1/2 [Δ, Δ]`.
pub fn kappa(x: &CritLocus, delta: &Quantisation) -> Result<Operator> {
    let d = delta.series();
    let first = delta_operator(x).commutator(&d)?;
    let second = d.commutator(&d)?.scale(&Rational::new(1.into(), 2.into()));
    Ok(first.add(&second))
}

/// A first order deformation `base + ε sum_j v_j h^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentElement {
    pub base: Quantisation,
    pub eps_part: BTreeMap<usize, Operator>,
}

impl TangentElement {
    pub fn eps_series(&self) -> Operator {
        let mut out = Operator::zero(self.base.nvars());
        for (j, op) in &self.eps_part {
            let h = HSeries::monomial(Rational::one(), *j as i32).with_trunc(self.base.trunc_order() + 1);
            out.add_assign(&op.scale_series(&h));
        }
        out
    }
}

/// `Δ + ε h^2 dΔ/dh`.
pub fn sigma_tangent(delta: &Quantisation) -> TangentElement {
    let eps_part = delta
        .coeffs()
        .iter()
        .filter(|(j, _)| **j > 1)
        .map(|(j, op)| (*j, op.scale(&int(*j as i64 - 1))))
        .collect();
    TangentElement { base: delta.clone(), eps_part }
}

/// `[δ + Δ, u]`, refusing when `Δ` does not solve the master equation.
pub fn centre_differential(x: &CritLocus, delta: &Quantisation, u: &Operator) -> Result<Operator> {
    if !kappa(x, delta)?.is_zero() {
        return Err(Error::NotMaurerCartan);
    }
    centre_differential_unchecked(x, delta, u)
}

/// `[δ + Δ, u]` without the master equation check.
pub fn centre_differential_unchecked(x: &CritLocus, delta: &Quantisation, u: &Operator) -> Result<Operator> {
    delta_operator(x).add(&delta.series()).commutator(u)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nondegeneracy {
    pub nondegenerate: bool,
    /// Determinant of the pairing matrix with η set to zero.
    pub determinant: Element,
}

/// Pairs the symbol of `Δ_2` against the generators `dy_i, dη_i` and checks
/// that the determinant, taken modulo the nilpotent η, is a nonzero constant.
pub fn is_nondegenerate(x: &CritLocus, delta: &Quantisation) -> Result<Nondegeneracy> {
    let m = x.m();
    let sym: Polyvector = delta.coeff(2).symbol(2)?;
    let derive = |p: &Polyvector, a: usize| if a < m { p.d_xi(a) } else { p.d_pi(a - m) };
    let matrix: Vec<Vec<Element>> = (0..2 * m)
        .map(|a| (0..2 * m).map(|b| derive(&derive(&sym, b), a).arity_zero_part().body()).collect())
        .collect();
    let determinant = determinant(&matrix, m)?;
    let nondegenerate = determinant.len() == 1
        && determinant.terms().all(|(mono, c)| mono.is_one() && c.as_constant().is_some_and(|r| !r.is_zero()));
    Ok(Nondegeneracy { nondegenerate, determinant })
}

/// Cofactor expansion along the first row; entries commute.
fn determinant(matrix: &[Vec<Element>], m: usize) -> Result<Element> {
    let n = matrix.len();
    if n == 0 {
        return Ok(Element::one(m));
    }
    let mut acc = Element::zero(m);
    for col in 0..n {
        if matrix[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Element>> = matrix[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, e)| e.clone()).collect())
            .collect();
        let term = matrix[0][col].gmul(&determinant(&minor, m)?)?;
        acc = if col % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiltrationKind {
    Ftilde,
    G,
    GconvF,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiltrationLabel {
    pub kind: FiltrationKind,
    pub level: i32,
}

impl FiltrationLabel {
    /// Whether an operator of order `order` at `h^e` lies in this piece.
    pub fn contains(&self, order: usize, e: i32) -> bool {
        let j = e + 1;
        let o = order as i32;
        if o > j {
            return false;
        }
        match self.kind {
            FiltrationKind::Ftilde => j >= self.level,
            FiltrationKind::G => o <= j - self.level,
            // union over i of G^i ∩ F~^(level - i)
            FiltrationKind::GconvF => (self.level - j..=j - o).next().is_some(),
        }
    }
}

/// Finite slice in which filtration pieces are counted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiltrationWindow {
    pub degrees: RangeInclusive<i32>,
    pub hbar: RangeInclusive<i32>,
    /// Bound on the y-degree of multiplication parts.
    pub weight_bound: Option<u32>,
}

/// Dimension per `(cohomological degree, h exponent)` of the piece
/// `label ∩ F~^p`, counted over normal-ordered monomials in the window.
pub fn filtration_dims(label: FiltrationLabel, p: i32, window: &FiltrationWindow, x: &CritLocus) -> Result<BTreeMap<(i32, i32), usize>> {
    let w = window
        .weight_bound
        .ok_or_else(|| Error::TruncationRequired("filtration dimensions need a weight bound".into()))?;
    let ftilde = FiltrationLabel { kind: FiltrationKind::Ftilde, level: p };
    let mut table = BTreeMap::new();
    for e in window.hbar.clone() {
        for d in window.degrees.clone() {
            table.insert((d, e), 0);
        }
        if e + 1 < 0 {
            continue;
        }
        for mono in op_monomials(x.m(), w, (e + 1) as usize) {
            let (o, d) = (mono.order(), mono.degree());
            if window.degrees.contains(&d) && label.contains(o, e) && ftilde.contains(o, e) {
                *table.get_mut(&(d, e)).expect("initialised") += 1;
            }
        }
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenReport {
    pub p: usize,
    pub k: usize,
    pub block_dim: usize,
    /// Distinct eigenvalues of `h^-1 nu` with their multiplicities.
    pub eigenvalues: Vec<(i64, usize)>,
    pub diagonalisable: bool,
    pub combined_eigenvalues: Vec<(i64, usize)>,
    pub combined_scalar: Option<Rational>,
    pub invertible: bool,
}

fn integer_spectrum(m: &Matrix, radius: i64) -> Vec<(i64, usize)> {
    (-radius..=radius)
        .filter_map(|lambda| {
            let dim = m.shifted(&int(lambda)).kernel_dim();
            (dim > 0).then_some((lambda, dim))
        })
        .collect()
}

/// On arity `p` symbols placed at `h^(p+k-1)`, computes the matrix of
/// `h^-1 nu(ω, Δ, -)` for the canonical pair on `x`, its integer spectrum,
/// and the sum with `∂_{h^-1} = -h^2 d/dh`.
pub fn nu_eigen_analysis(x: &CritLocus, p: usize, k: usize, weight_bound: Option<u32>) -> Result<EigenReport> {
    let w = weight_bound.ok_or_else(|| Error::TruncationRequired("eigen analysis needs a weight bound".into()))?;
    let m = x.m();
    let delta = bv_quantisation(x);
    let omega = canonical_symplectic(x);
    let basis: Vec<OpMonomial> = op_monomials(m, w, p).into_iter().filter(|b| b.order() == p).collect();
    let position: BTreeMap<&OpMonomial, usize> = basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let n = basis.len();
    let shift = (p + k) as i32 - 1;

    let mut nu_matrix = Matrix::zeros(n);
    let mut hbar_matrix = Matrix::zeros(n);
    for (col, b) in basis.iter().enumerate() {
        let lifted = Operator::from_monomial(b.clone(), HSeries::one());
        // nu is h-linear, so the h^shift factor is applied after the fact
        let image = nu(&omega, &delta, &lifted, x)?.hbar_coefficient(1);
        for (mono, c) in image.terms() {
            if mono.order() != p {
                continue;
            }
            let row = *position
                .get(mono)
                .ok_or_else(|| Error::TruncationRequired("the window is not closed under nu".into()))?;
            nu_matrix.entries[row][col] = c.coeff(0);
        }
        let rho = Operator::from_monomial(b.clone(), HSeries::monomial(Rational::one(), shift).with_trunc(shift + 4));
        let dh = rho.hbar_derivative_scaled().neg().hbar_coefficient(shift + 1);
        hbar_matrix.entries[col][col] = dh.coefficient(b).coeff(0);
    }
    let radius = (p + k) as i64 + 2;
    let eigenvalues = integer_spectrum(&nu_matrix, radius);
    let diagonalisable = eigenvalues.iter().map(|(_, d)| d).sum::<usize>() == n;
    let combined = nu_matrix.add(&hbar_matrix);
    let combined_eigenvalues = integer_spectrum(&combined, radius);
    Ok(EigenReport {
        p,
        k,
        block_dim: n,
        eigenvalues,
        diagonalisable,
        combined_eigenvalues,
        combined_scalar: combined.as_scalar(),
        invertible: combined.rank() == n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gca::make_crit_locus;

    fn locus(terms: &[(&[u32], i64)], m: usize) -> CritLocus {
        let f = Element::from_terms(
            m,
            terms.iter().map(|(e, c)| (crate::gca::Monomial { y: e.to_vec(), eta: crate::gca::EtaSet::EMPTY }, HSeries::from_int(*c))),
        );
        make_crit_locus(&f, m).unwrap()
    }

    #[test]
    fn bv_operator_shape() {
        let x = locus(&[(&[3, 0], 1), (&[0, 3], 1)], 2);
        let d = bv_quantisation(&x);
        assert_eq!(d.coeff(2).order().unwrap(), 2);
        assert_eq!(d.coeffs().len(), 1);
        assert!(kappa(&x, &d).unwrap().is_zero());
        assert!(kappa(&x, &Quantisation::zero(2)).unwrap().is_zero());
    }

    #[test]
    fn spurious_term_breaks_master_equation() {
        let x = locus(&[(&[2], 1)], 1);
        // degree -1, so not allowed as a coefficient at all
        let wrong_degree = Operator::eta(1, 0).compose(&Operator::dy(1, 0)).unwrap().compose(&Operator::dy(1, 0)).unwrap();
        assert!(Quantisation::new(1, BTreeMap::from([(2, wrong_degree)])).is_err());
        assert!(kappa(&x, &bv_quantisation(&x)).unwrap().is_zero());

        let x = locus(&[(&[2, 0], 1), (&[0, 2], 1)], 2);
        let extra = Operator::eta(2, 0).compose(&Operator::deta(2, 0)).unwrap().compose(&Operator::deta(2, 1)).unwrap();
        let d = Quantisation::new(2, BTreeMap::from([(2, bv_quantisation(&x).coeff(2).add(&extra))])).unwrap();
        assert!(!kappa(&x, &d).unwrap().is_zero());
        assert_eq!(centre_differential(&x, &d, &Operator::identity(2)), Err(Error::NotMaurerCartan));
    }

    #[test]
    fn tangent_vector() {
        let x = locus(&[(&[2], 1)], 1);
        let d = bv_quantisation(&x);
        let s = sigma_tangent(&d);
        assert_eq!(s.eps_series(), d.coeff(2).shift_hbar(2));
        assert_eq!(s.eps_series(), d.series().hbar_derivative_scaled());
        assert!(sigma_tangent(&Quantisation::zero(1)).eps_series().is_zero());
    }

    #[test]
    fn centre_differential_on_generators() {
        let x = locus(&[(&[2], 1)], 1);
        let d = bv_quantisation(&x);
        let y = Operator::y(1, 0);
        assert_eq!(centre_differential(&x, &d, &y).unwrap(), Operator::deta(1, 0).shift_hbar(1));
        let e = Operator::eta(1, 0);
        let expect = Operator::dy(1, 0).shift_hbar(1).add(&Operator::multiplication(&x.partials[0]));
        assert_eq!(centre_differential(&x, &d, &e).unwrap(), expect);
        assert!(centre_differential(&x, &d, &Operator::identity(1)).unwrap().is_zero());
    }

    #[test]
    fn nondegeneracy() {
        let x = locus(&[(&[3, 0], 1), (&[0, 3], 1)], 2);
        let cert = is_nondegenerate(&x, &bv_quantisation(&x)).unwrap();
        assert!(cert.nondegenerate);
        assert_eq!(cert.determinant, Element::one(2));
        let yy = Operator::dy(2, 0).compose(&Operator::dy(2, 1)).unwrap();
        let yy = Quantisation { nvars: 2, coeffs: BTreeMap::from([(2, yy)]), g_trunc: None, trunc: 8 };
        assert!(!is_nondegenerate(&x, &yy).unwrap().nondegenerate);
        assert!(!is_nondegenerate(&x, &Quantisation::zero(2)).unwrap().nondegenerate);
    }

    #[test]
    fn eigen_examples() {
        let x = locus(&[(&[2], 1)], 1);
        let r = nu_eigen_analysis(&x, 1, 2, Some(1)).unwrap();
        assert_eq!(r.eigenvalues.iter().map(|e| e.0).collect::<Vec<_>>(), vec![1]);
        assert_eq!(r.combined_scalar, Some(int(-1)));
        assert!(r.invertible);
        let r = nu_eigen_analysis(&x, 3, 1, Some(1)).unwrap();
        assert_eq!(r.combined_scalar, Some(int(0)));
        assert!(!r.invertible);
        let r = nu_eigen_analysis(&x, 0, 3, Some(1)).unwrap();
        assert_eq!(r.eigenvalues.iter().map(|e| e.0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(r.combined_scalar, Some(int(-2)));
    }

    #[test]
    #[allow(clippy::reversed_empty_ranges)]
    fn filtration_needs_a_bound() {
        let x = locus(&[(&[2], 1)], 1);
        let window = FiltrationWindow { degrees: -1..=1, hbar: -1..=2, weight_bound: None };
        let label = FiltrationLabel { kind: FiltrationKind::G, level: 1 };
        assert!(matches!(filtration_dims(label, 2, &window, &x), Err(Error::TruncationRequired(_))));
        let empty = FiltrationWindow { degrees: 1..=0, hbar: 0..=2, weight_bound: Some(2) };
        assert!(filtration_dims(label, 2, &empty, &x).unwrap().values().all(|d| *d == 0));
    }
}
