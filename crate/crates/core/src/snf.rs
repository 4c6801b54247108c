//! Smith normal form of sparse integer matrices.
//!
//! Unit pivots are eliminated first on the sparse representation, picking
//! short rows and sparse columns. Whatever is left is reduced densely with
//! big integers. Sparse elimination runs in `i64` and restarts over big
//! integers on overflow.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Entry type for sparse elimination.
pub trait Coef: Clone + Debug + PartialEq + Send + Sync {
    fn nil() -> Self;
    fn is_nil(&self) -> bool;
    fn is_unit(&self) -> bool;
    /// Inverse of a unit.
    fn unit_inv(&self) -> Self;
    fn mul(&self, b: &Self) -> Option<Self>;
    fn sub(&self, b: &Self) -> Option<Self>;
    fn to_big(&self) -> BigInt;
}

impl Coef for i64 {
    fn nil() -> Self {
        0
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn unit_inv(&self) -> Self {
        *self
    }
    fn mul(&self, b: &Self) -> Option<Self> {
        self.checked_mul(*b)
    }
    fn sub(&self, b: &Self) -> Option<Self> {
        self.checked_sub(*b)
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Coef for BigInt {
    fn nil() -> Self {
        BigInt::zero()
    }
    fn is_nil(&self) -> bool {
        self.sign() == num_bigint::Sign::NoSign
    }
    fn is_unit(&self) -> bool {
        self.abs().is_one()
    }
    fn unit_inv(&self) -> Self {
        self.clone()
    }
    fn mul(&self, b: &Self) -> Option<Self> {
        Some(self * b)
    }
    fn sub(&self, b: &Self) -> Option<Self> {
        Some(self - b)
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// An element of the field with two elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct F2(pub bool);

impl Coef for F2 {
    fn nil() -> Self {
        F2(false)
    }
    fn is_nil(&self) -> bool {
        !self.0
    }
    fn is_unit(&self) -> bool {
        self.0
    }
    fn unit_inv(&self) -> Self {
        *self
    }
    fn mul(&self, b: &Self) -> Option<Self> {
        Some(F2(self.0 & b.0))
    }
    fn sub(&self, b: &Self) -> Option<Self> {
        Some(F2(self.0 ^ b.0))
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(self.0 as u8)
    }
}

/// Sparse row-major matrix. Rows are sorted by column and hold no zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<C> {
    pub ncols: usize,
    pub rows: Vec<Vec<(u32, C)>>,
}

impl SparseMatrix<i64> {
    /// Builds from `(row, col, value)` triples, summing repeats.
    pub fn from_triples(nrows: usize, ncols: usize, triples: &[(usize, usize, i64)]) -> Self {
        let mut rows: Vec<Vec<(u32, i64)>> = vec![Vec::new(); nrows];
        for &(r, c, v) in triples {
            rows[r].push((c as u32, v));
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|p| p.0);
            let mut merged: Vec<(u32, i64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|p| p.1 != 0);
            *row = merged;
        }
        SparseMatrix { ncols, rows }
    }

    pub fn from_dense(a: &[Vec<i64>]) -> Self {
        let ncols = a.first().map_or(0, |r| r.len());
        let mut t = Vec::new();
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                t.push((i, j, v));
            }
        }
        Self::from_triples(a.len(), ncols, &t)
    }

    pub fn to_big(&self) -> SparseMatrix<BigInt> {
        SparseMatrix {
            ncols: self.ncols,
            rows: self.rows.iter().map(|r| r.iter().map(|(c, v)| (*c, BigInt::from(*v))).collect()).collect(),
        }
    }

    pub fn to_f2(&self) -> SparseMatrix<F2> {
        SparseMatrix {
            ncols: self.ncols,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().filter(|p| p.1 % 2 != 0).map(|p| (p.0, F2(true))).collect())
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<BigInt>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![BigInt::zero(); self.ncols];
                for (c, v) in r {
                    d[*c as usize] = BigInt::from(*v);
                }
                d
            })
            .collect()
    }
}

/// `target - f * pivot` on sorted sparse rows.
fn combine<C: Coef>(target: &[(u32, C)], f: &C, pivot: &[(u32, C)]) -> Option<Vec<(u32, C)>> {
    let mut out = Vec::with_capacity(target.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < pivot.len() {
        let ci = target.get(i).map_or(u32::MAX, |p| p.0);
        let cj = pivot.get(j).map_or(u32::MAX, |p| p.0);
        if ci < cj {
            out.push(target[i].clone());
            i += 1;
        } else {
            let prod = f.mul(&pivot[j].1)?;
            let v = if ci == cj {
                let v = target[i].1.sub(&prod)?;
                i += 1;
                v
            } else {
                C::nil().sub(&prod)?
            };
            if !v.is_nil() {
                out.push((cj, v));
            }
            j += 1;
        }
    }
    Some(out)
}

/// Eliminates unit pivots. Returns the number eliminated and the leftover
/// nonempty rows, or `None` on arithmetic overflow.
fn eliminate_units<C: Coef>(m: &SparseMatrix<C>) -> Option<(usize, Vec<Vec<(u32, C)>>)> {
    let mut rows = m.rows.clone();
    let nrows = rows.len();
    let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); m.ncols];
    for (r, row) in rows.iter().enumerate() {
        for (c, _) in row {
            col_rows[*c as usize].push(r as u32);
        }
    }
    let mut alive = vec![true; nrows];
    let mut heap: BinaryHeap<Reverse<(usize, u32)>> = BinaryHeap::new();
    for (r, row) in rows.iter().enumerate() {
        if !row.is_empty() {
            heap.push(Reverse((row.len(), r as u32)));
        }
    }
    let mut stamp = vec![u32::MAX; nrows];
    let mut rank = 0;
    while let Some(Reverse((len, r))) = heap.pop() {
        let ru = r as usize;
        if !alive[ru] || rows[ru].len() != len || len == 0 {
            continue;
        }
        let best = rows[ru]
            .iter()
            .filter(|(_, v)| v.is_unit())
            .min_by_key(|(c, _)| (col_rows[*c as usize].len(), *c))
            .cloned();
        let Some((c, p)) = best else { continue };
        let pivot = std::mem::take(&mut rows[ru]);
        alive[ru] = false;
        rank += 1;
        let pinv = p.unit_inv();
        let users = std::mem::take(&mut col_rows[c as usize]);
        for r2 in users {
            let r2u = r2 as usize;
            if !alive[r2u] || stamp[r2u] == r {
                continue;
            }
            stamp[r2u] = r;
            let Ok(pos) = rows[r2u].binary_search_by_key(&c, |p| p.0) else { continue };
            let f = rows[r2u][pos].1.mul(&pinv)?;
            let new = combine(&rows[r2u], &f, &pivot)?;
            for (cc, _) in &new {
                if *cc != c && rows[r2u].binary_search_by_key(cc, |p| p.0).is_err() {
                    col_rows[*cc as usize].push(r2);
                }
            }
            rows[r2u] = new;
            if !rows[r2u].is_empty() {
                heap.push(Reverse((rows[r2u].len(), r2)));
            }
        }
    }
    let rest = rows.into_iter().zip(alive).filter(|(r, a)| *a && !r.is_empty()).map(|(r, _)| r).collect();
    Some((rank, rest))
}

/// Invariant factors of a dense matrix, as a divisibility chain.
pub fn dense_invariant_factors(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let nr = a.len();
    let nc = a.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut t = 0;
    while t < nr.min(nc) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..nr {
            for j in t..nc {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..nr {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..nc {
                    let d = &q * &a[t][j];
                    a[i][j] -= d;
                }
                if !a[i][t].is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..nc {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for i in t..nr {
                    let d = &q * &a[i][t];
                    a[i][j] -= d;
                }
                if !a[t][j].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                move_min_to_pivot(&mut a, t);
                continue;
            }
            // divisibility of the trailing block
            let bad = (t + 1..nr).find(|&i| (t + 1..nc).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            match bad {
                Some(i) => {
                    for j in t..nc {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        out.push(a[t][t].abs());
        t += 1;
    }
    out
}

fn move_min_to_pivot(a: &mut [Vec<BigInt>], t: usize) {
    let nr = a.len();
    let nc = a[0].len();
    let mut best = (t, t);
    for i in t..nr {
        for j in t..nc {
            let cur = &a[best.0][best.1];
            if !a[i][j].is_zero() && (cur.is_zero() || a[i][j].abs() < cur.abs()) {
                best = (i, j);
            }
        }
    }
    a.swap(t, best.0);
    for row in a.iter_mut() {
        row.swap(t, best.1);
    }
}

/// Diagonal of the Smith normal form (nonzero part) and rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snf {
    pub rank: usize,
    /// Nonzero diagonal entries, each dividing the next.
    pub diagonal: Vec<BigInt>,
}

impl Snf {
    /// Diagonal entries greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diagonal.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotStrategy {
    /// Sparse unit elimination, then dense reduction of the remainder.
    Sparse,
    /// Dense reduction of the whole matrix.
    Dense,
}

fn finish(rank: usize, rest: Vec<Vec<(u32, BigInt)>>) -> Snf {
    let mut cols: Vec<u32> = rest.iter().flat_map(|r| r.iter().map(|p| p.0)).collect();
    cols.sort_unstable();
    cols.dedup();
    let dense: Vec<Vec<BigInt>> = rest
        .iter()
        .map(|r| {
            let mut d = vec![BigInt::zero(); cols.len()];
            for (c, v) in r {
                d[cols.binary_search(c).unwrap()] = v.clone();
            }
            d
        })
        .collect();
    let tail = dense_invariant_factors(dense);
    let mut diagonal = vec![BigInt::one(); rank];
    diagonal.extend(tail);
    Snf { rank: diagonal.len(), diagonal }
}

pub fn smith_normal_form(m: &SparseMatrix<i64>, strategy: PivotStrategy) -> Snf {
    match strategy {
        PivotStrategy::Dense => {
            let diagonal = dense_invariant_factors(m.to_dense());
            Snf { rank: diagonal.len(), diagonal }
        }
        PivotStrategy::Sparse => match eliminate_units(m) {
            Some((rank, rest)) => {
                let rest = rest.into_iter().map(|r| r.into_iter().map(|(c, v)| (c, BigInt::from(v))).collect()).collect();
                finish(rank, rest)
            }
            None => {
                let (rank, rest) = eliminate_units(&m.to_big()).expect("big integers do not overflow");
                finish(rank, rest)
            }
        },
    }
}

/// Rank over F2.
pub fn rank_f2(m: &SparseMatrix<i64>) -> usize {
    let (rank, rest) = eliminate_units(&m.to_f2()).expect("F2 does not overflow");
    debug_assert!(rest.is_empty());
    rank
}
