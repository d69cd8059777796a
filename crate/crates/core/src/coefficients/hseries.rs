use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::{format_rational, int, Rational};

/// Exponents at or above this are dropped unless a caller asks otherwise.
pub const DEFAULT_TRUNCATION: i32 = 8;

/// A Laurent polynomial in `h` with exact rational coefficients.
///
/// Exponents `>= trunc_order` are discarded; when that happens the
/// `truncated` flag is raised and travels through every later operation.
/// Equality compares coefficients only.
#[derive(Clone, Debug)]
pub struct HSeries {
    coeffs: BTreeMap<i32, Rational>,
    min_exp: i32,
    trunc: i32,
    truncated: bool,
}

impl PartialEq for HSeries {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for HSeries {}

impl Default for HSeries {
    fn default() -> Self {
        Self::zero()
    }
}

impl HSeries {
    pub fn zero() -> Self {
        Self::zero_with_trunc(DEFAULT_TRUNCATION)
    }

    pub fn zero_with_trunc(trunc: i32) -> Self {
        HSeries { coeffs: BTreeMap::new(), min_exp: 0, trunc, truncated: false }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(int(n))
    }

    /// `h`
    pub fn hbar() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    /// `c * h^exp`
    pub fn monomial(c: Rational, exp: i32) -> Self {
        let mut s = Self::zero();
        s.min_exp = exp.min(0);
        s.insert(exp, c);
        s
    }

    pub fn from_coeffs<I: IntoIterator<Item = (i32, Rational)>>(coeffs: I, trunc: i32) -> Self {
        let mut s = Self::zero_with_trunc(trunc);
        for (k, c) in coeffs {
            s.min_exp = s.min_exp.min(k);
            s.add_at(k, &c);
        }
        s
    }

    pub fn with_trunc(mut self, trunc: i32) -> Self {
        self.trunc = trunc;
        let dropped: Vec<i32> = self.coeffs.range(trunc..).map(|(k, _)| *k).collect();
        if !dropped.is_empty() {
            self.truncated = true;
            for k in dropped {
                self.coeffs.remove(&k);
            }
        }
        self
    }

    fn insert(&mut self, exp: i32, c: Rational) {
        if c.is_zero() {
            return;
        }
        if exp >= self.trunc {
            self.truncated = true;
            return;
        }
        self.coeffs.insert(exp, c);
    }

    fn add_at(&mut self, exp: i32, c: &Rational) {
        if c.is_zero() {
            return;
        }
        if exp >= self.trunc {
            self.truncated = true;
            return;
        }
        let entry = self.coeffs.entry(exp).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn trunc_order(&self) -> i32 {
        self.trunc
    }

    pub fn min_exp(&self) -> i32 {
        self.min_exp
    }

    pub fn coeff(&self, exp: i32) -> Rational {
        self.coeffs.get(&exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &Rational)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    /// Lowest exponent carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn degree(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    /// The constant coefficient when the series is a constant, `None` otherwise.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => self.coeffs.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, other: &HSeries) -> HSeries {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &HSeries) {
        if other.trunc < self.trunc {
            *self = std::mem::take(self).with_trunc(other.trunc);
        }
        self.min_exp = self.min_exp.min(other.min_exp);
        self.truncated |= other.truncated;
        for (k, c) in &other.coeffs {
            self.add_at(*k, c);
        }
    }

    pub fn sub(&self, other: &HSeries) -> HSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> HSeries {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, factor: &Rational) -> HSeries {
        if factor.is_zero() {
            let mut z = self.clone();
            z.coeffs.clear();
            return z;
        }
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= factor;
        }
        out
    }

    /// Multiplication by `h^k`.
    pub fn shift(&self, k: i32) -> HSeries {
        let mut out = HSeries::zero_with_trunc(self.trunc);
        out.min_exp = self.min_exp + k;
        out.truncated = self.truncated;
        for (e, c) in &self.coeffs {
            out.insert(e + k, c.clone());
        }
        out
    }

    /// Truncated Cauchy product; the result keeps the smaller truncation order.
    pub fn mul(&self, other: &HSeries) -> HSeries {
        let mut out = HSeries::zero_with_trunc(self.trunc.min(other.trunc));
        out.min_exp = self.min_exp + other.min_exp;
        out.truncated = self.truncated || other.truncated;
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                out.add_at(a + b, &(ca * cb));
            }
        }
        out
    }

    /// `h^2 d/dh`: sends `c h^k` to `k c h^(k+1)`.
    pub fn hbar_derivative_scaled(&self) -> HSeries {
        let mut out = HSeries::zero_with_trunc(self.trunc);
        out.min_exp = self.min_exp + 1;
        out.truncated = self.truncated;
        for (k, c) in &self.coeffs {
            out.insert(k + 1, c * int(i64::from(*k)));
        }
        out
    }

    /// Substitution `h -> -h`.
    pub fn negate_hbar(&self) -> HSeries {
        let mut out = self.clone();
        for (k, c) in out.coeffs.iter_mut() {
            if k.rem_euclid(2) == 1 {
                *c = -c.clone();
            }
        }
        out
    }

    /// Value at a nonzero rational `h`.
    pub fn evaluate(&self, at: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for (k, c) in &self.coeffs {
            acc += c * pow_rational(at, *k);
        }
        acc
    }
}

pub(crate) fn pow_rational(base: &Rational, exp: i32) -> Rational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

impl fmt::Display for HSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().rev() {
            let negative = *c < Rational::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.is_one();
            match *k {
                0 => write!(f, "{}", format_rational(&mag))?,
                1 if unit => write!(f, "h")?,
                1 => write!(f, "{}*h", format_rational(&mag))?,
                _ if unit => write!(f, "h^{}", k)?,
                _ => write!(f, "{}*h^{}", format_rational(&mag), k)?,
            }
        }
        Ok(())
    }
}
