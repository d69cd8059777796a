use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{int, HSeries, Rational, UniPoly};
use crate::linalg::{self, SparseVec};

/// Candidate evaluation points for `h`.
pub const SPECIALISATION_PRIMES: [i64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// How a rank over `Q(h)` was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankCertificate {
    pub rank: usize,
    pub points: [i64; 2],
    pub ranks_at_points: [usize; 2],
    pub fallback_used: bool,
}

/// Rank of a matrix with entries in `Q[h, 1/h]`, viewed over `Q(h)`.
pub fn rank_over_hbar_field(rows: &[Vec<HSeries>], seed: u64) -> usize {
    rank_with_certificate(rows, seed).rank
}

/// Specialises `h` at two distinct primes picked by `seed`. If the two
/// specialised ranks disagree the rank is recomputed symbolically by
/// fraction-free elimination over `Q[h]`.
pub fn rank_with_certificate(rows: &[Vec<HSeries>], seed: u64) -> RankCertificate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked: Vec<i64> = SPECIALISATION_PRIMES.choose_multiple(&mut rng, 2).copied().collect();
    let points = [picked[0], picked[1]];
    let ranks_at_points = [rank_at(rows, points[0]), rank_at(rows, points[1])];
    if ranks_at_points[0] == ranks_at_points[1] {
        RankCertificate { rank: ranks_at_points[0], points, ranks_at_points, fallback_used: false }
    } else {
        RankCertificate { rank: bareiss_rank(rows), points, ranks_at_points, fallback_used: true }
    }
}

fn rank_at(rows: &[Vec<HSeries>], point: i64) -> usize {
    let at = int(point);
    let specialised = rows.iter().map(|row| {
        row.iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .map(|(j, e)| (j, e.evaluate(&at)))
            .filter(|(_, v)| !v.is_zero())
            .collect::<SparseVec>()
    });
    linalg::rank(specialised)
}

/// Rank over `Q(h)` by Bareiss elimination on polynomial entries. Each row is
/// first multiplied by a power of `h` to clear negative exponents.
pub fn bareiss_rank(rows: &[Vec<HSeries>]) -> usize {
    let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut m: Vec<Vec<UniPoly>> = rows
        .iter()
        .map(|row| {
            let low = row.iter().filter_map(HSeries::valuation).min().unwrap_or(0).min(0);
            (0..ncols)
                .map(|j| row.get(j).map(|e| to_poly(e, -low)).unwrap_or_else(UniPoly::zero))
                .collect()
        })
        .collect();
    let nrows = m.len();
    let mut k = 0;
    let mut prev = UniPoly::one();
    for col in 0..ncols {
        if k == nrows {
            break;
        }
        let Some(pivot) = (k..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(k, pivot);
        for i in k + 1..nrows {
            for j in col + 1..ncols {
                let num = m[k][col].mul(&m[i][j]).sub(&m[i][col].mul(&m[k][j]));
                m[i][j] = num.div_exact(&prev);
            }
            m[i][col] = UniPoly::zero();
        }
        prev = m[k][col].clone();
        k += 1;
    }
    k
}

fn to_poly(e: &HSeries, shift: i32) -> UniPoly {
    let Some(top) = e.degree() else {
        return UniPoly::zero();
    };
    let mut coeffs = vec![Rational::zero(); (top + shift + 1) as usize];
    for (k, c) in e.iter() {
        coeffs[(k + shift) as usize] = c.clone();
    }
    UniPoly::from_coeffs(coeffs)
}
