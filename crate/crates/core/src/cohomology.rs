//! Finite truncations of the twisted complex `(O_X, δ + h Δ)` and of the
//! Koszul complex, their cohomology dimensions, and Milnor numbers computed
//! independently from the Jacobian ideal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::coefficients::{int, rank_with_certificate, HSeries, RankCertificate, Rational};
use crate::diffops::Operator;
use crate::error::{Error, Result};
use crate::gca::{exponent_vectors, CritLocus, Element, EtaSet, Monomial};
use crate::linalg::{Echelon, SparseVec};
use crate::quantise::{bv_quantisation, delta_operator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruncationMode {
    /// Monomials of quasi-homogeneous weight at most the level; `η_i` has
    /// weight `1 - w_i`.
    WeightGraded,
    /// Monomials of degree at most the level, with `y_i` of degree 1 and
    /// `η_i` of the degree of `∂_i f`.
    DegreeTruncated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationSpec {
    pub mode: TruncationMode,
    pub weight_or_degree_bound: u32,
    pub stabilisation_window: u32,
}

impl TruncationSpec {
    pub fn new(mode: TruncationMode, bound: u32) -> Self {
        TruncationSpec { mode, weight_or_degree_bound: bound, stabilisation_window: 2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CohomologyField {
    QAtHbarOne,
    QOfHbar,
    /// The classical complex, `h = 0`.
    Q,
}

impl fmt::Display for CohomologyField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CohomologyField::QAtHbarOne => "Q",
            CohomologyField::QOfHbar => "Q(hbar)",
            CohomologyField::Q => "Q",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyReport {
    pub dims_by_degree: BTreeMap<i32, usize>,
    pub field: CohomologyField,
    pub truncation: TruncationSpec,
    pub stabilised: bool,
    pub euler_characteristic: i64,
    /// The level at which the dimensions settled.
    pub level: u32,
    /// Dimensions at every level tried.
    pub history: Vec<(u32, BTreeMap<i32, usize>)>,
    pub certificates: Vec<RankCertificate>,
}

impl CohomologyReport {
    pub fn total_dim(&self) -> usize {
        self.dims_by_degree.values().sum()
    }
}

/// Monomials spanning the truncation at `level`.
fn truncated_basis(x: &CritLocus, mode: TruncationMode, level: u32) -> Result<Vec<Monomial>> {
    let m = x.m();
    let mut out = Vec::new();
    match mode {
        TruncationMode::WeightGraded => {
            let weights = x
                .signature
                .weights
                .as_ref()
                .ok_or_else(|| Error::TruncationRequired("weight grading needs a quasi-homogeneous potential".into()))?;
            let cap = int(i64::from(level));
            let min_w = weights.iter().min().expect("m >= 1").clone();
            let max_y = (&cap / &min_w).floor().to_integer();
            let max_y: u32 = max_y.try_into().unwrap_or(u32::MAX);
            for s in EtaSet::all_subsets(m) {
                let eta_weight: Rational = s.iter().map(|i| Rational::one() - &weights[i]).sum();
                for y in exponent_vectors(m, max_y) {
                    let w: Rational = y.iter().zip(weights).map(|(e, wi)| wi * int(i64::from(*e))).sum();
                    if w + &eta_weight <= cap {
                        out.push(Monomial { y, eta: s });
                    }
                }
            }
        }
        TruncationMode::DegreeTruncated => {
            let degs = x.partial_degrees();
            for s in EtaSet::all_subsets(m) {
                let eta_deg: u32 = s.iter().map(|i| degs[i]).sum();
                if eta_deg > level {
                    continue;
                }
                for y in exponent_vectors(m, level - eta_deg) {
                    out.push(Monomial { y, eta: s });
                }
            }
        }
    }
    Ok(out)
}

fn group_by_degree(basis: &[Monomial]) -> BTreeMap<i32, Vec<&Monomial>> {
    let mut out: BTreeMap<i32, Vec<&Monomial>> = BTreeMap::new();
    for b in basis {
        out.entry(b.degree()).or_default().push(b);
    }
    out
}

/// Rows of `d` on `sources`, in coordinates `targets`.
fn image_rows(sources: &[&Monomial], targets: &BTreeMap<&Monomial, usize>, d: &Operator) -> Result<Vec<Vec<HSeries>>> {
    let mut rows = Vec::with_capacity(sources.len());
    for mono in sources {
        let image = d.apply(&Element::from_monomial((*mono).clone(), HSeries::one()))?;
        let mut row = vec![HSeries::zero(); targets.len()];
        for (m2, c) in image.terms() {
            let col = *targets
                .get(m2)
                .ok_or_else(|| Error::TruncationRequired("truncation is not a subcomplex".into()))?;
            row[col] = c.clone();
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Cohomology dimensions of `d` on the span of `basis`, with coboundaries
/// drawn from the larger span `ahead` and intersected back. Both spans
/// must be closed under `d`.
fn truncated_cohomology(
    basis: &[Monomial],
    ahead: &[Monomial],
    d: &Operator,
    seed: u64,
    certificates: &mut Vec<RankCertificate>,
) -> Result<BTreeMap<i32, usize>> {
    let small = group_by_degree(basis);
    let large = group_by_degree(ahead);
    let mut rank = |rows: &[Vec<HSeries>]| {
        let cert = rank_with_certificate(rows, seed);
        let r = cert.rank;
        certificates.push(cert);
        r
    };
    let mut out = BTreeMap::new();
    for (deg, monos) in &small {
        let next: BTreeMap<&Monomial, usize> = large
            .get(&(deg + 1))
            .map(|v| v.iter().enumerate().map(|(i, m)| (*m, i)).collect())
            .unwrap_or_default();
        let cocycles = monos.len() - rank(&image_rows(monos, &next, d)?);
        let coboundaries = match large.get(&(deg - 1)) {
            Some(prev) => {
                // columns of the current truncation come last, so that the
                // rank drop on removing them is the intersection dimension
                let here: BTreeMap<&Monomial, usize> = large[deg].iter().enumerate().map(|(i, m)| (*m, i)).collect();
                let rows = image_rows(prev, &here, d)?;
                let inside: Vec<bool> = large[deg].iter().map(|m| monos.contains(m)).collect();
                let outside: Vec<Vec<HSeries>> = rows
                    .iter()
                    .map(|r| r.iter().zip(&inside).filter(|(_, keep)| !**keep).map(|(c, _)| c.clone()).collect())
                    .collect();
                rank(&rows) - rank(&outside)
            }
            None => 0,
        };
        out.insert(*deg, cocycles - coboundaries);
    }
    Ok(out)
}

fn stabilised_dims(x: &CritLocus, trunc: &TruncationSpec, d: &Operator, field: CohomologyField, seed: u64) -> Result<CohomologyReport> {
    let window = trunc.stabilisation_window.max(1) as usize;
    let mut history: Vec<(u32, BTreeMap<i32, usize>)> = Vec::new();
    let mut certificates = Vec::new();
    // δ preserves weight and Δ lowers it, so weight truncations need no
    // lookahead; degree truncations do when f is not homogeneous
    let lookahead = match trunc.mode {
        TruncationMode::WeightGraded => 0,
        TruncationMode::DegreeTruncated => x.partial_degrees().into_iter().max().unwrap_or(1),
    };
    for level in 0..=trunc.weight_or_degree_bound {
        let basis = truncated_basis(x, trunc.mode, level)?;
        let ahead = truncated_basis(x, trunc.mode, level + lookahead)?;
        let dims = truncated_cohomology(&basis, &ahead, d, seed, &mut certificates)?;
        history.push((level, dims));
        if history.len() >= window && history[history.len() - window..].iter().all(|(_, h)| *h == history[history.len() - 1].1) {
            let dims: BTreeMap<i32, usize> = history[history.len() - 1].1.iter().filter(|(_, v)| **v > 0).map(|(k, v)| (*k, *v)).collect();
            let euler = dims.iter().map(|(k, v)| if k % 2 == 0 { *v as i64 } else { -(*v as i64) }).sum();
            return Ok(CohomologyReport {
                dims_by_degree: dims,
                field,
                truncation: *trunc,
                stabilised: true,
                euler_characteristic: euler,
                level,
                history,
                certificates,
            });
        }
    }
    Err(Error::NotStabilised { bound: trunc.weight_or_degree_bound })
}

/// Cohomology over `Q(h)` of `(O_X, δ + h Δ_BV)`.
pub fn twisted_derham_dims(x: &CritLocus, trunc: &TruncationSpec, seed: u64) -> Result<CohomologyReport> {
    let d = delta_operator(x).add(&bv_quantisation(x).series());
    stabilised_dims(x, trunc, &d, CohomologyField::QOfHbar, seed)
}

/// Cohomology of the Koszul complex `(O_X, δ)`.
pub fn koszul_dims_at_hbar_zero(x: &CritLocus, trunc: &TruncationSpec, seed: u64) -> Result<CohomologyReport> {
    stabilised_dims(x, trunc, &delta_operator(x), CohomologyField::Q, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MilnorOptions {
    pub stabilisation_window: u32,
    pub cap: u32,
}

impl Default for MilnorOptions {
    fn default() -> Self {
        MilnorOptions { stabilisation_window: 2, cap: 30 }
    }
}

/// Degree reverse lexicographic comparison.
fn grevlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| {
        for (x, y) in a.iter().zip(b).rev() {
            if x != y {
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

/// `dim Q[y] / (∂_1 f, .., ∂_m f)`.
///
/// At each degree `D` the span of `u * ∂_i f` up to degree `D + 1` is put in
/// echelon form with columns sorted largest monomial first. The count of
/// monomials of degree at most `D` that are not leading monomials is
/// accepted once it has not changed for the stabilisation window and every
/// monomial of degree `D` is a leading monomial.
pub fn milnor_number(x: &CritLocus, opts: &MilnorOptions) -> Result<usize> {
    let m = x.m();
    if x.f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let degs = x.partial_degrees();
    let window = opts.stabilisation_window.max(1) as usize;
    let mut counts: Vec<usize> = Vec::new();
    for d in 0..=opts.cap {
        let top = d + 1;
        let mut monos = exponent_vectors(m, top);
        monos.sort_by(|a, b| grevlex(b, a));
        let col: BTreeMap<&Vec<u32>, usize> = monos.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut ech = Echelon::new();
        for (i, p) in x.partials.iter().enumerate() {
            if p.is_zero() || degs[i] > top {
                continue;
            }
            for u in exponent_vectors(m, top - degs[i]) {
                let mut row = SparseVec::new();
                for (pm, pc) in p.terms() {
                    let e: Vec<u32> = pm.y.iter().zip(&u).map(|(a, b)| a + b).collect();
                    let c = pc.coeff(0);
                    if !c.is_zero() {
                        row.insert(col[&e], c);
                    }
                }
                ech.insert(row);
            }
        }
        let low: Vec<&Vec<u32>> = monos.iter().filter(|v| v.iter().sum::<u32>() <= d).collect();
        let standard = low.iter().filter(|v| !ech.is_pivot(col[**v])).count();
        let top_reduces = monos.iter().filter(|v| v.iter().sum::<u32>() == d).all(|v| ech.is_pivot(col[v]));
        counts.push(standard);
        if top_reduces && counts.len() >= window && counts[counts.len() - window..].iter().all(|c| *c == standard) {
            return Ok(standard);
        }
    }
    Err(Error::NonIsolated { cap: opts.cap })
}
