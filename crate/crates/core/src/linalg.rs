//! Sparse exact linear algebra over `Q`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::coefficients::Rational;

/// Sparse vector indexed by column.
pub type SparseVec = BTreeMap<usize, Rational>;

fn axpy(target: &mut SparseVec, factor: &Rational, source: &SparseVec) {
    for (k, v) in source {
        let entry = target.entry(*k).or_insert_with(Rational::zero);
        *entry -= factor * v;
        if entry.is_zero() {
            target.remove(k);
        }
    }
}

/// Row echelon form built one vector at a time. Every stored row has a
/// distinct leading column, the smallest index at which it is nonzero.
///
/// Each stored row remembers which combination of inserted vectors it is,
/// so right-hand sides can be solved for.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, (SparseVec, SparseVec)>,
    inserted: usize,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Leading columns of the stored rows.
    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.rows.contains_key(&col)
    }

    /// Reduces `v` against the stored rows. Returns the remainder and the
    /// combination of inserted vectors that was subtracted.
    fn reduce(&self, mut v: SparseVec) -> (SparseVec, SparseVec) {
        let mut combo = SparseVec::new();
        let mut cursor = 0;
        loop {
            let next = v.range(cursor..).next().map(|(k, c)| (*k, c.clone()));
            let Some((col, coef)) = next else { break };
            if let Some((row, row_combo)) = self.rows.get(&col) {
                let factor = coef / &row[&col];
                axpy(&mut v, &factor, row);
                axpy(&mut combo, &factor, row_combo);
            }
            cursor = col + 1;
        }
        (v, combo)
    }

    /// Adds `v`; returns `true` when it was independent of what came before.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let index = self.inserted;
        self.inserted += 1;
        let (rem, mut combo) = self.reduce(v);
        let Some(lead) = rem.keys().next().copied() else {
            return false;
        };
        // rem = v + sum(combo_k v_k)
        combo.insert(index, Rational::one());
        self.rows.insert(lead, (rem, combo));
        true
    }

    /// Whether `v` lies in the span of the inserted vectors.
    pub fn contains(&self, v: SparseVec) -> bool {
        self.reduce(v).0.is_empty()
    }

    /// Coefficients `x` with `sum x_i v_i = target`, if any.
    pub fn express(&self, target: SparseVec) -> Option<SparseVec> {
        let (rem, combo) = self.reduce(target);
        if !rem.is_empty() {
            return None;
        }
        // 0 = target + sum(combo_k v_k)
        let mut x = SparseVec::new();
        for (k, c) in combo {
            if !c.is_zero() {
                x.insert(k, -c);
            }
        }
        Some(x)
    }
}

pub fn rank<I: IntoIterator<Item = SparseVec>>(rows: I) -> usize {
    let mut ech = Echelon::new();
    for r in rows {
        ech.insert(r);
    }
    ech.rank()
}

/// Solves `sum_j x_j columns[j] = target` exactly.
pub fn solve(columns: &[SparseVec], target: &SparseVec) -> Option<SparseVec> {
    let mut ech = Echelon::new();
    for c in columns {
        ech.insert(c.clone());
    }
    ech.express(target.clone())
}

/// Dense square matrix helper, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub n: usize,
    pub entries: Vec<Vec<Rational>>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, entries: vec![vec![Rational::zero(); n]; n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i][i] = Rational::one();
        }
        m
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.entries[i][j] += &other.entries[i][j];
            }
        }
        out
    }

    pub fn shifted(&self, lambda: &Rational) -> Matrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out.entries[i][i] -= lambda;
        }
        out
    }

    pub fn rank(&self) -> usize {
        rank(self.entries.iter().map(|row| {
            row.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect()
        }))
    }

    pub fn kernel_dim(&self) -> usize {
        self.n - self.rank()
    }

    /// `Some(c)` when the matrix equals `c` times the identity.
    pub fn as_scalar(&self) -> Option<Rational> {
        if self.n == 0 {
            return None;
        }
        let c = self.entries[0][0].clone();
        for i in 0..self.n {
            for j in 0..self.n {
                let expect = if i == j { c.clone() } else { Rational::zero() };
                if self.entries[i][j] != expect {
                    return None;
                }
            }
        }
        Some(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::int;

    fn v(entries: &[(usize, i64)]) -> SparseVec {
        entries.iter().map(|(k, c)| (*k, int(*c))).collect()
    }

    #[test]
    fn rank_of_dependent_set() {
        assert_eq!(rank(vec![v(&[(0, 1), (1, 2)]), v(&[(0, 2), (1, 4)]), v(&[(2, 1)])]), 2);
    }

    #[test]
    fn solve_finds_combination() {
        let cols = vec![v(&[(0, 1), (1, 1)]), v(&[(1, 1)]), v(&[(0, 2), (1, 3)])];
        let target = v(&[(0, 3), (1, 5)]);
        let x = solve(&cols, &target).expect("solvable");
        let mut acc = SparseVec::new();
        for (j, c) in &x {
            let neg = -c.clone();
            axpy(&mut acc, &neg, &cols[*j]);
        }
        assert_eq!(acc, target);
        assert!(solve(&cols, &v(&[(2, 1)])).is_none());
    }

    #[test]
    fn pivots_are_leading_columns() {
        let mut e = Echelon::new();
        e.insert(v(&[(1, 1), (3, 1)]));
        e.insert(v(&[(1, 1), (2, 1)]));
        assert!(e.is_pivot(1));
        assert!(e.is_pivot(2));
        assert!(!e.is_pivot(3));
    }

    #[test]
    fn scalar_detection() {
        let m = Matrix::identity(3);
        assert_eq!(m.as_scalar(), Some(int(1)));
        assert_eq!(m.shifted(&int(1)).kernel_dim(), 3);
    }
}
