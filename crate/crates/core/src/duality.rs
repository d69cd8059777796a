//! The transpose anti-automorphism of operators in the constant volume
//! chart, and the involution `Δ*(h) = -Δ^t(-h)` on quantisations.

use std::collections::BTreeMap;

use num_traits::One;

use crate::coefficients::{int, HSeries, Rational};
use crate::diffops::{op_monomials, OpMonomial, Operator};
use crate::error::{Error, Result};
use crate::gca::{CritLocus, Element};
use crate::linalg::Matrix;
use crate::quantise::Quantisation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenKind {
    MulY,
    MulEta,
    DY,
    DEta,
}

impl GenKind {
    pub const ALL: [GenKind; 4] = [GenKind::MulY, GenKind::MulEta, GenKind::DY, GenKind::DEta];

    pub fn name(self) -> &'static str {
        match self {
            GenKind::MulY => "mul_y",
            GenKind::MulEta => "mul_eta",
            GenKind::DY => "d_y",
            GenKind::DEta => "d_eta",
        }
    }
}

/// Signs `g^t = ±g` on generators. The divergence correction vanishes for a
/// constant volume form and is kept only for completeness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignProfile {
    pub gen_signs: BTreeMap<GenKind, i8>,
    pub divergence_term: Element,
}

impl SignProfile {
    pub fn from_signs(m: usize, signs: [i8; 4]) -> Self {
        SignProfile { gen_signs: GenKind::ALL.into_iter().zip(signs).collect(), divergence_term: Element::zero(m) }
    }

    pub fn sign(&self, g: GenKind) -> i8 {
        self.gen_signs.get(&g).copied().unwrap_or(1)
    }
}

fn signed(op: Operator, sign: i8) -> Operator {
    if sign < 0 {
        op.neg()
    } else {
        op
    }
}

/// Transpose of a single normal-ordered monomial: the generator word
/// reversed, each generator signed, with the Koszul sign of the reversal.
fn transpose_monomial(mono: &OpMonomial, profile: &SignProfile) -> Result<Operator> {
    let m = mono.nvars();
    let mut gens: Vec<Operator> = Vec::new();
    for (i, e) in mono.mul.y.iter().enumerate() {
        for _ in 0..*e {
            gens.push(signed(Operator::y(m, i), profile.sign(GenKind::MulY)));
        }
    }
    for i in mono.mul.eta.iter() {
        gens.push(signed(Operator::eta(m, i), profile.sign(GenKind::MulEta)));
    }
    for (i, e) in mono.dy.iter().enumerate() {
        for _ in 0..*e {
            gens.push(signed(Operator::dy(m, i), profile.sign(GenKind::DY)));
        }
    }
    for i in mono.deta.iter() {
        gens.push(signed(Operator::deta(m, i), profile.sign(GenKind::DEta)));
    }
    let odd = mono.mul.eta.len() + mono.deta.len();
    let mut acc = Operator::identity(m);
    for g in gens.iter().rev() {
        acc = acc.compose(g)?;
    }
    if (odd * odd.saturating_sub(1) / 2) % 2 == 1 {
        acc = acc.neg();
    }
    if !profile.divergence_term.is_zero() && mono.order() > 0 {
        return Err(Error::InvalidQuantisation("nonzero divergence corrections are not supported".into()));
    }
    Ok(acc)
}

pub fn transpose(d: &Operator, profile: &SignProfile) -> Result<Operator> {
    let mut out = Operator::zero(d.nvars());
    for (mono, c) in d.terms() {
        out.add_assign(&transpose_monomial(mono, profile)?.scale_series(c));
    }
    Ok(out)
}

fn generators(m: usize) -> Vec<(GenKind, Operator)> {
    (0..m)
        .flat_map(|i| {
            [
                (GenKind::MulY, Operator::y(m, i)),
                (GenKind::MulEta, Operator::eta(m, i)),
                (GenKind::DY, Operator::dy(m, i)),
                (GenKind::DEta, Operator::deta(m, i)),
            ]
        })
        .collect()
}

fn profile_is_consistent(m: usize, profile: &SignProfile) -> Result<bool> {
    let gens = generators(m);
    for (kind, g) in &gens {
        let gt = transpose(g, profile)?;
        if transpose(&gt, profile)? != *g {
            return Ok(false);
        }
        let is_mul = matches!(kind, GenKind::MulY | GenKind::MulEta);
        if is_mul && gt != *g {
            return Ok(false);
        }
        if !is_mul && gt.symbol(1)? != g.neg().symbol(1)? {
            return Ok(false);
        }
    }
    // relations: (ab)^t = (-1)^{|a||b|} b^t a^t on every ordered pair
    for (_, a) in &gens {
        for (_, b) in &gens {
            let lhs = transpose(&a.compose(b)?, profile)?;
            let rhs = transpose(b, profile)?.compose(&transpose(a, profile)?)?;
            let odd = a.degree().unwrap_or(0) * b.degree().unwrap_or(0) % 2 != 0;
            if lhs != if odd { rhs.neg() } else { rhs } {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Searches all sixteen sign choices for the one compatible with the
/// commutation relations, fixing multiplications and acting by `-1` on
/// first order symbols.
pub fn solve_sign_profile(x: &CritLocus) -> Result<SignProfile> {
    let m = x.m();
    let mut found = Vec::new();
    for bits in 0u8..16 {
        let signs: [i8; 4] = std::array::from_fn(|i| if bits & (1 << i) != 0 { -1 } else { 1 });
        let profile = SignProfile::from_signs(m, signs);
        if profile_is_consistent(m, &profile)? {
            found.push(profile);
        }
    }
    if found.len() == 1 {
        Ok(found.remove(0))
    } else {
        Err(Error::NoConsistentProfile)
    }
}

/// `(Δ*)_j = -(-1)^(j-1) (Δ_j)^t`.
pub fn star(delta: &Quantisation, profile: &SignProfile) -> Result<Quantisation> {
    let mut coeffs = BTreeMap::new();
    for (j, op) in delta.coeffs() {
        let t = transpose(op, profile)?;
        coeffs.insert(*j, if j % 2 == 0 { t } else { t.neg() });
    }
    Ok(Quantisation::new(delta.nvars(), coeffs)?.with_trunc(delta.trunc_order()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SelfDualVerdict {
    Strict,
    /// `star(Δ) - Δ` as an operator series.
    Fails(Operator),
}

pub fn is_self_dual(delta: &Quantisation, profile: &SignProfile) -> Result<SelfDualVerdict> {
    let s = star(delta, profile)?;
    let residual = s.series().sub(&delta.series());
    Ok(if residual.is_zero() { SelfDualVerdict::Strict } else { SelfDualVerdict::Fails(residual) })
}

/// Dimension of the degree one slot of order `j - k` at `h^(j-1)` and of the
/// subspace fixed by `star` there, read on symbols.
pub fn gparity_fixed_dims(m: usize, j: usize, k: usize, weight_bound: u32, profile: &SignProfile) -> Result<(usize, usize)> {
    let order = j.checked_sub(k).ok_or_else(|| Error::InvalidQuantisation("slot order is negative".into()))?;
    let basis: Vec<OpMonomial> =
        op_monomials(m, weight_bound, order).into_iter().filter(|b| b.order() == order && b.degree() == 1).collect();
    let position: BTreeMap<&OpMonomial, usize> = basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let n = basis.len();
    let mut matrix = Matrix::zeros(n);
    let factor = if j.is_multiple_of(2) { Rational::one() } else { -Rational::one() };
    for (col, b) in basis.iter().enumerate() {
        let t = transpose(&Operator::from_monomial(b.clone(), HSeries::one()), profile)?.scale(&factor);
        for (mono, c) in t.symbol(order)?.terms() {
            let row = *position.get(mono).ok_or_else(|| Error::InvalidQuantisation("transpose left the slot".into()))?;
            matrix.entries[row][col] = c.coeff(0);
        }
    }
    let fixed = matrix.shifted(&int(1)).kernel_dim();
    Ok((n, fixed))
}
