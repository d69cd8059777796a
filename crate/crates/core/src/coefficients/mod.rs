//! Exact scalars: rationals, truncated Laurent series in `h`, and rank
//! computations over the rational function field `Q(h)`.

mod hseries;
mod poly;
mod rank;

pub use hseries::{HSeries, DEFAULT_TRUNCATION};
pub use poly::UniPoly;
pub use rank::{bareiss_rank, rank_over_hbar_field, rank_with_certificate, RankCertificate, SPECIALISATION_PRIMES};

use num_bigint::BigInt;
use num_traits::Zero;

/// Arbitrary precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `p/q`, or just `p` for integers. Used by every serialised report.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Inverse of [`format_rational`]; accepts an optional leading sign.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}
