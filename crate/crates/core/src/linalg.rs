//! Exact linear algebra for boundary matrices.
//!
//! Integer matrices are reduced to Smith normal form in two phases: a sparse
//! phase that repeatedly eliminates a row and column through a unit pivot,
//! then a dense `BigInt` phase on whatever is left. Mod-2 ranks use the usual
//! column reduction on sparse bit columns. Small dense matrices over `ℚ` or
//! `GF(2)` are handled by [`DenseMatrix`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::qlin::Rat;

/// A sparse integer matrix stored by columns; each column lists
/// `(row, value)` pairs with nonzero values.
#[derive(Clone, Debug, Default)]
pub struct SparseIntMatrix {
    pub rows: usize,
    pub cols: Vec<Vec<(usize, i64)>>,
}

impl SparseIntMatrix {
    pub fn new(rows: usize, cols: Vec<Vec<(usize, i64)>>) -> Self {
        SparseIntMatrix { rows, cols }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }
}

/// Nonzero invariant factors of an integer matrix, in divisibility order.
/// Their count is the rank over `ℚ`.
pub fn smith_invariants(m: &SparseIntMatrix) -> Vec<BigInt> {
    let mut rows: Vec<BTreeMap<usize, i128>> = vec![BTreeMap::new(); m.rows];
    let mut colsets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.ncols()];
    for (c, col) in m.cols.iter().enumerate() {
        for &(r, v) in col {
            if v != 0 {
                *rows[r].entry(c).or_insert(0) += v as i128;
                colsets[c].insert(r);
            }
        }
    }
    let mut units = 0usize;
    let mut order: Vec<usize> = (0..m.ncols()).collect();
    order.sort_by_key(|c| colsets[*c].len());
    let mut overflow = false;
    loop {
        let mut progress = false;
        for &c in &order {
            if colsets[c].is_empty() {
                continue;
            }
            let pivot = colsets[c]
                .iter()
                .copied()
                .filter(|r| rows[*r].get(&c).is_some_and(|v| v.abs() == 1))
                .min_by_key(|r| rows[*r].len());
            let Some(p) = pivot else { continue };
            if !eliminate(&mut rows, &mut colsets, p, c) {
                overflow = true;
                break;
            }
            units += 1;
            progress = true;
        }
        if overflow || !progress {
            break;
        }
    }
    let live_rows: Vec<usize> = (0..m.rows).filter(|r| !rows[*r].is_empty()).collect();
    let live_cols: Vec<usize> = (0..m.ncols()).filter(|c| !colsets[*c].is_empty()).collect();
    let col_pos: HashMap<usize, usize> = live_cols.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut dense = vec![vec![BigInt::zero(); live_cols.len()]; live_rows.len()];
    for (i, r) in live_rows.iter().enumerate() {
        for (c, v) in &rows[*r] {
            dense[i][col_pos[c]] = BigInt::from(*v);
        }
    }
    let mut out = vec![BigInt::one(); units];
    out.extend(dense_smith(dense));
    out.sort();
    out
}

/// Clears column `c` through the unit pivot at row `p`, then drops row `p`
/// and column `c`. Returns false on arithmetic overflow.
fn eliminate(rows: &mut [BTreeMap<usize, i128>], colsets: &mut [BTreeSet<usize>], p: usize, c: usize) -> bool {
    let pivot_row: Vec<(usize, i128)> = rows[p].iter().map(|(k, v)| (*k, *v)).collect();
    let a = rows[p][&c];
    let others: Vec<usize> = colsets[c].iter().copied().filter(|r| *r != p).collect();
    for r in others {
        let k = rows[r][&c] * a;
        for &(cc, v) in &pivot_row {
            let Some(kv) = k.checked_mul(v) else { return false };
            let entry = rows[r].entry(cc).or_insert(0);
            let Some(nv) = entry.checked_sub(kv) else { return false };
            if nv == 0 {
                rows[r].remove(&cc);
                colsets[cc].remove(&r);
            } else {
                *entry = nv;
                colsets[cc].insert(r);
            }
        }
    }
    for &(cc, _) in &pivot_row {
        colsets[cc].remove(&p);
    }
    rows[p].clear();
    colsets[c].clear();
    true
}

/// Invariant factors of a dense matrix by elimination with pivots of least
/// absolute value.
fn dense_smith(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let nr = a.len();
    let nc = if nr == 0 { 0 } else { a[0].len() };
    let mut out = Vec::new();
    let mut t = 0;
    while t < nr.min(nc) {
        // least nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..nr {
            for j in t..nc {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..nr {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..nc {
                    let v = &a[t][j] * &q;
                    a[i][j] -= v;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..nc {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().skip(t) {
                    let v = &row[t] * &q;
                    row[j] -= v;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                // the pivot must divide the whole trailing block
                let bad = (t + 1..nr).find(|&i| (t + 1..nc).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
                match bad {
                    None => break,
                    Some(i) => {
                        for j in t..nc {
                            let v = a[i][j].clone();
                            a[t][j] += v;
                        }
                        continue;
                    }
                }
            }
            // move the least remaining entry of row/column t into the pivot
            let mut best = (t, t);
            for i in t..nr {
                if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..nc {
                if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        out.push(a[t][t].abs());
        t += 1;
    }
    out
}

/// Rank over `GF(2)` of a matrix given by the row indices of its odd entries,
/// one list per column.
pub fn rank_gf2(cols: &[Vec<usize>]) -> usize {
    let mut lows: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut rank = 0;
    for col in cols {
        let mut v: Vec<usize> = col.clone();
        v.sort_unstable();
        // cancel duplicate entries
        let mut dedup: Vec<usize> = Vec::with_capacity(v.len());
        for x in v {
            if dedup.last() == Some(&x) {
                dedup.pop();
            } else {
                dedup.push(x);
            }
        }
        let mut v = dedup;
        while let Some(&low) = v.last() {
            match lows.get(&low) {
                Some(other) => v = xor_sorted(&v, other),
                None => {
                    lows.insert(low, v);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Field operations for [`DenseMatrix`].
pub trait Field: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn inv(&self) -> Self;
    fn from_i64(v: i64) -> Self;
}

impl Field for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn inv(&self) -> Self {
        self.recip()
    }
    fn from_i64(v: i64) -> Self {
        crate::qlin::int(v)
    }
}

/// The field with two elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gf2(pub bool);

impl Field for Gf2 {
    fn zero() -> Self {
        Gf2(false)
    }
    fn one() -> Self {
        Gf2(true)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
    fn add(&self, o: &Self) -> Self {
        Gf2(self.0 ^ o.0)
    }
    fn sub(&self, o: &Self) -> Self {
        Gf2(self.0 ^ o.0)
    }
    fn mul(&self, o: &Self) -> Self {
        Gf2(self.0 & o.0)
    }
    fn inv(&self) -> Self {
        assert!(self.0, "inverse of zero");
        *self
    }
    fn from_i64(v: i64) -> Self {
        Gf2(v.rem_euclid(2) == 1)
    }
}

/// A dense matrix over a field, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<F: Field> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<F>>,
}

impl<F: Field> DenseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![vec![F::zero(); cols]; rows] }
    }

    /// Builds a matrix from its columns.
    pub fn from_cols(rows: usize, cols: &[Vec<F>]) -> Self {
        let mut m = DenseMatrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, v) in c.iter().enumerate() {
                m.data[i][j] = v.clone();
            }
        }
        m
    }

    pub fn col(&self, j: usize) -> Vec<F> {
        self.data.iter().map(|r| r[j].clone()).collect()
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        self.data
            .iter()
            .map(|row| row.iter().zip(v).fold(F::zero(), |acc, (a, b)| acc.add(&a.mul(b))))
            .collect()
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (DenseMatrix<F>, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.data[i][c].is_zero()) else { continue };
            m.data.swap(r, p);
            let inv = m.data[r][c].inv();
            for v in m.data[r].iter_mut() {
                *v = v.mul(&inv);
            }
            for i in 0..m.rows {
                if i != r && !m.data[i][c].is_zero() {
                    let k = m.data[i][c].clone();
                    for j in 0..m.cols {
                        let d = k.mul(&m.data[r][j]);
                        m.data[i][j] = m.data[i][j].sub(&d);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of the kernel, as column vectors.
    pub fn nullspace(&self) -> Vec<Vec<F>> {
        let (m, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![F::zero(); self.cols];
                v[f] = F::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = F::zero().sub(&m.data[r][f]);
                }
                v
            })
            .collect()
    }
}

/// Rank of the matrix whose columns are `vecs`, each of length `len`.
pub fn rank_of_vectors<F: Field>(len: usize, vecs: &[Vec<F>]) -> usize {
    if vecs.is_empty() || len == 0 {
        return 0;
    }
    DenseMatrix::from_cols(len, vecs).rank()
}

/// Converts an invariant factor to `u64` for reporting.
pub fn factor_to_u64(b: &BigInt) -> u64 {
    b.to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::int;
    use proptest::prelude::*;

    fn dense_to_sparse(rows: usize, m: &[Vec<i64>]) -> SparseIntMatrix {
        let ncols = if rows == 0 { 0 } else { m[0].len() };
        let cols = (0..ncols)
            .map(|j| (0..rows).filter(|&i| m[i][j] != 0).map(|i| (i, m[i][j])).collect())
            .collect();
        SparseIntMatrix::new(rows, cols)
    }

    fn bigs(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|x| BigInt::from(*x)).collect()
    }

    #[test]
    fn smith_of_small_matrices() {
        let m = dense_to_sparse(2, &[vec![2, 0], vec![0, 3]]);
        assert_eq!(smith_invariants(&m), bigs(&[1, 6]));
        let m = dense_to_sparse(2, &[vec![2, 4], vec![4, 8]]);
        assert_eq!(smith_invariants(&m), bigs(&[2]));
        let m = dense_to_sparse(3, &[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        assert_eq!(smith_invariants(&m), bigs(&[1, 1, 2]));
        let empty = SparseIntMatrix::new(3, vec![]);
        assert!(smith_invariants(&empty).is_empty());
    }

    #[test]
    fn gf2_rank() {
        assert_eq!(rank_gf2(&[vec![0, 1], vec![1, 2], vec![0, 2]]), 2);
        assert_eq!(rank_gf2(&[vec![0, 0]]), 0);
        assert_eq!(rank_gf2(&[vec![3], vec![3], vec![1, 3]]), 2);
    }

    #[test]
    fn dense_rank_and_kernel() {
        let m = DenseMatrix::from_cols(2, &[vec![int(1), int(2)], vec![int(2), int(4)], vec![int(0), int(1)]]);
        assert_eq!(m.rank(), 2);
        let k = m.nullspace();
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).iter().all(Field::is_zero));
        let g = DenseMatrix::from_cols(2, &[vec![Gf2(true), Gf2(true)], vec![Gf2(true), Gf2(true)]]);
        assert_eq!(g.rank(), 1);
    }

    fn naive_rank(m: &[Vec<i64>]) -> usize {
        let rows = m.len();
        if rows == 0 {
            return 0;
        }
        let cols: Vec<Vec<Rat>> = (0..m[0].len()).map(|j| (0..rows).map(|i| int(m[i][j])).collect()).collect();
        rank_of_vectors(rows, &cols)
    }

    proptest! {
        #[test]
        fn smith_rank_matches_rational_rank(entries in prop::collection::vec(-3i64..=3, 12)) {
            let m: Vec<Vec<i64>> = entries.chunks(4).map(|c| c.to_vec()).collect();
            let inv = smith_invariants(&dense_to_sparse(3, &m));
            prop_assert_eq!(inv.len(), naive_rank(&m));
            for w in inv.windows(2) {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }

        #[test]
        fn smith_product_is_gcd_of_maximal_minors_for_square(entries in prop::collection::vec(-4i64..=4, 4)) {
            let (a, b, c, d) = (entries[0], entries[1], entries[2], entries[3]);
            let m = vec![vec![a, b], vec![c, d]];
            let inv = smith_invariants(&dense_to_sparse(2, &m));
            let det = (a * d - b * c).abs();
            if det != 0 {
                let prod: BigInt = inv.iter().product();
                prop_assert_eq!(prod, BigInt::from(det));
            }
        }
    }
}
