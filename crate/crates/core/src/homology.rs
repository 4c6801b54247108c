//! Homology of the signed complex, one Alexander grading at a time.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::ChainComplex;
use crate::grid::Rational;
use crate::snf::{rank_f2, smith_normal_form, PivotStrategy, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coeff {
    Z,
    Z2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyBlock {
    pub alexander: Rational,
    /// Number of generators in the grading.
    pub dim: usize,
    /// Free rank over Z, or dimension over F2.
    pub rank: usize,
    /// Invariant factors above one (always empty over F2).
    pub torsion: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedHomology {
    pub grid_n: usize,
    pub m: usize,
    pub coeff: Coeff,
    /// Ascending Alexander grading; gradings with no generators are absent.
    pub blocks: Vec<HomologyBlock>,
}

impl GradedHomology {
    pub fn total_rank(&self) -> usize {
        self.blocks.iter().map(|b| b.rank).sum()
    }

    pub fn rank_at(&self, a: Rational) -> usize {
        self.blocks.iter().find(|b| b.alexander == a).map_or(0, |b| b.rank)
    }

    pub fn torsion_at(&self, a: Rational) -> Vec<BigInt> {
        self.blocks.iter().find(|b| b.alexander == a).map_or(Vec::new(), |b| b.torsion.clone())
    }

    /// Nonzero ranks by grading.
    pub fn rank_map(&self) -> BTreeMap<Rational, usize> {
        self.blocks.iter().filter(|b| b.rank > 0).map(|b| (b.alexander, b.rank)).collect()
    }

    /// Torsion multiset by grading, for gradings with torsion.
    pub fn torsion_map(&self) -> BTreeMap<Rational, Vec<BigInt>> {
        self.blocks
            .iter()
            .filter(|b| !b.torsion.is_empty())
            .map(|b| (b.alexander, b.torsion.clone()))
            .collect()
    }

    /// Same groups in every grading, ignoring empty blocks and `dim`.
    pub fn same_groups(&self, other: &GradedHomology) -> bool {
        self.rank_map() == other.rank_map() && self.torsion_map() == other.torsion_map()
    }
}

/// Boundary restricted to each Alexander block, as `(row = target, col =
/// source)` sparse matrices.
pub fn block_matrices(c: &ChainComplex, entries: &[(u32, u32, i64)]) -> Vec<(Rational, SparseMatrix<i64>)> {
    let blocks = c.blocks();
    let mut local = vec![(0usize, 0usize); c.len()];
    for (b, (_, gens)) in blocks.iter().enumerate() {
        for (k, &g) in gens.iter().enumerate() {
            local[g] = (b, k);
        }
    }
    let mut triples: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); blocks.len()];
    for &(from, to, v) in entries {
        let (bf, kf) = local[from as usize];
        let (bt, kt) = local[to as usize];
        assert_eq!(bf, bt, "boundary leaves its Alexander grading");
        triples[bf].push((kt, kf, v));
    }
    blocks
        .iter()
        .zip(triples)
        .map(|((a, gens), t)| (*a, SparseMatrix::from_triples(gens.len(), gens.len(), &t)))
        .collect()
}

/// Homology per Alexander grading. `entries` is the signed boundary as
/// `(from, to, coefficient)`.
pub fn homology(c: &ChainComplex, entries: &[(u32, u32, i64)], coeff: Coeff) -> GradedHomology {
    let mats = block_matrices(c, entries);
    let blocks = mats
        .par_iter()
        .map(|(a, m)| block_homology(*a, m, coeff))
        .collect();
    GradedHomology { grid_n: c.cover.n(), m: c.cover.m, coeff, blocks }
}

/// Homology of a single block with square boundary matrix `m`.
pub fn block_homology(alexander: Rational, m: &SparseMatrix<i64>, coeff: Coeff) -> HomologyBlock {
    let dim = m.rows.len();
    match coeff {
        Coeff::Z => {
            let snf = smith_normal_form(m, PivotStrategy::Sparse);
            HomologyBlock { alexander, dim, rank: dim - 2 * snf.rank, torsion: snf.torsion() }
        }
        Coeff::Z2 => HomologyBlock { alexander, dim, rank: dim - 2 * rank_f2(m), torsion: Vec::new() },
    }
}

/// Outcome of comparing a homology computed on a larger grid with one on a
/// smaller grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    /// Difference of grid sizes.
    pub k: usize,
    /// Ranks and torsion multiplied by `2^k` grading by grading.
    pub doubling: bool,
    /// Doubling after a global Alexander shift, if one works (smallest in
    /// absolute value).
    pub doubling_shift: Option<Rational>,
    /// The larger homology is the smaller tensored with `k` copies of a rank
    /// two group supported in Alexander gradings `0` and `-1`.
    pub tensor_two_gradings: bool,
    /// Total ranks and torsion counts agree up to the factor `2^k`.
    pub totals: bool,
    pub report: String,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.doubling || self.tensor_two_gradings
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Expected groups of `h2` tensored `k` times with a rank two group whose
/// generators sit in gradings `0` and `-step`.
fn convolve(h2: &GradedHomology, k: usize, step: Rational) -> (BTreeMap<Rational, usize>, BTreeMap<Rational, Vec<BigInt>>) {
    let mut ranks = BTreeMap::new();
    let mut tors: BTreeMap<Rational, Vec<BigInt>> = BTreeMap::new();
    for b in &h2.blocks {
        for j in 0..=k {
            let a = b.alexander - step * Rational::from_integer(j as i64);
            let mult = binomial(k, j);
            if b.rank > 0 {
                *ranks.entry(a).or_insert(0) += b.rank * mult;
            }
            for t in &b.torsion {
                for _ in 0..mult {
                    tors.entry(a).or_default().push(t.clone());
                }
            }
        }
    }
    for v in tors.values_mut() {
        v.sort();
    }
    (ranks, tors)
}

fn sorted_torsion(h: &GradedHomology) -> BTreeMap<Rational, Vec<BigInt>> {
    let mut t = h.torsion_map();
    for v in t.values_mut() {
        v.sort();
    }
    t
}

fn scaled(h: &GradedHomology, factor: usize, shift: Rational) -> (BTreeMap<Rational, usize>, BTreeMap<Rational, Vec<BigInt>>) {
    let ranks = h.rank_map().into_iter().map(|(a, r)| (a + shift, r * factor)).collect();
    let tors = sorted_torsion(h)
        .into_iter()
        .map(|(a, t)| {
            let mut v: Vec<BigInt> = t.iter().flat_map(|x| std::iter::repeat_n(x.clone(), factor)).collect();
            v.sort();
            (a + shift, v)
        })
        .collect();
    (ranks, tors)
}

/// Compares `h1` (grid size `n1`) with `h2` (grid size `n2 <= n1`).
pub fn check_stable_equivalence(h1: &GradedHomology, h2: &GradedHomology) -> Verdict {
    assert!(h1.grid_n >= h2.grid_n, "first argument must come from the larger grid");
    let k = h1.grid_n - h2.grid_n;
    let factor = 1usize << k;
    let target = (h1.rank_map(), sorted_torsion(h1));
    let doubling = scaled(h2, factor, Rational::from_integer(0)) == target;
    // shifts that could align the supports
    let mut doubling_shift = None;
    if let (Some(a1), Some(a2)) = (h1.rank_map().keys().next().copied(), h2.rank_map().keys().next().copied()) {
        let s = a1 - a2;
        if scaled(h2, factor, s) == target {
            doubling_shift = Some(s);
        }
    }
    let tensor_two_gradings = convolve(h2, k, Rational::from_integer(1)) == target;
    let tor_count = |h: &GradedHomology| h.blocks.iter().map(|b| b.torsion.len()).sum::<usize>();
    let totals = h1.total_rank() == factor * h2.total_rank() && tor_count(h1) == factor * tor_count(h2);
    let fmt = |h: &GradedHomology| {
        h.rank_map()
            .iter()
            .map(|(a, r)| format!("{}:{}", crate::grid::format_rational(a), r))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let report = format!(
        "n={} ranks [{}]; n={} ranks [{}]; doubling={} shifted={:?} two-grading tensor={} totals={}",
        h1.grid_n,
        fmt(h1),
        h2.grid_n,
        fmt(h2),
        doubling,
        doubling_shift.map(|s| crate::grid::format_rational(&s)),
        tensor_two_gradings,
        totals
    );
    Verdict { k, doubling, doubling_shift, tensor_two_gradings, totals, report }
}

/// Checks the universal coefficient relation between a Z and a Z2
/// computation: `dim_F2 = rank_Z + 2 #(even invariant factors)` per block.
pub fn coefficients_consistent(hz: &GradedHomology, h2: &GradedHomology) -> bool {
    hz.blocks.len() == h2.blocks.len()
        && hz.blocks.iter().zip(&h2.blocks).all(|(z, f)| {
            let even = z.torsion.iter().filter(|t| t.is_even()).count();
            z.alexander == f.alexander && f.rank == z.rank + 2 * even
        })
}
