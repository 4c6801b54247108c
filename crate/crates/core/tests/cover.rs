mod common;

use common::*;
use covergrid::complex::{alexander_cover, enumerate_generators, enumerate_rectangles, rect_domain};
use covergrid::cover::vh_correspondence;
use covergrid::{ChainComplex, CoverDiagram, Cuts, GridDiagram, Rational};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vertical(g: &GridDiagram, m: usize) -> CoverDiagram {
    CoverDiagram::new(g, m, Cuts::Vertical).unwrap()
}

/// Ryser's formula for the permanent of a 0/1 matrix.
fn permanent(a: &[Vec<bool>]) -> i64 {
    let n = a.len();
    let mut total = 0i64;
    for subset in 1u32..(1 << n) {
        let mut prod = 1i64;
        for row in a {
            let s = (0..n).filter(|&j| subset >> j & 1 == 1 && row[j]).count() as i64;
            prod *= s;
            if prod == 0 {
                break;
            }
        }
        let sign = if (n as u32 - subset.count_ones()).is_multiple_of(2) { 1 } else { -1 };
        total += sign * prod;
    }
    total
}

/// Splits the projection of a cover generator into `m` base permutations by
/// repeatedly extracting a perfect matching (augmenting paths, random order).
fn random_decomposition(n: usize, m: usize, x: &[u8], rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut mult = vec![vec![0usize; n]; n];
    for (k, &i) in x.iter().enumerate() {
        mult[k % n][i as usize] += 1;
    }
    let mut out = Vec::new();
    for _ in 0..m {
        let mut row_of = vec![usize::MAX; n];
        let mut col_of = vec![usize::MAX; n];
        let mut cols: Vec<usize> = (0..n).collect();
        cols.shuffle(rng);
        for &c in &cols {
            let mut seen = vec![false; n];
            assert!(augment(c, &mult, &mut row_of, &mut col_of, &mut seen, rng), "regular multigraph has a matching");
        }
        for c in 0..n {
            mult[c][row_of[c]] -= 1;
        }
        out.push(row_of);
    }
    out
}

fn augment(
    c: usize,
    mult: &[Vec<usize>],
    row_of: &mut [usize],
    col_of: &mut [usize],
    seen: &mut [bool],
    rng: &mut ChaCha8Rng,
) -> bool {
    let n = mult.len();
    let mut rows: Vec<usize> = (0..n).filter(|&r| mult[c][r] > 0).collect();
    rows.shuffle(rng);
    for r in rows {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        if col_of[r] == usize::MAX || augment(col_of[r], mult, row_of, col_of, seen, rng) {
            row_of[c] = r;
            col_of[r] = c;
            return true;
        }
    }
    false
}

proptest! {
    #[test]
    fn rows_close_up(n in 2usize..=6, seed in any::<u64>(), m in 1usize..=4) {
        let cd = vertical(&random_knot(n, seed), m);
        for i in 0..n {
            for j in 0..n {
                for s in 0..m {
                    prop_assert_eq!(cd.sheet_walk(i, j, n, s), s);
                    prop_assert_eq!(cd.sheet_walk(i, j, 0, s), s);
                }
            }
        }
    }

    #[test]
    fn walk_and_congruence_agree(n in 2usize..=6, seed in any::<u64>(), m in 1usize..=4) {
        let g = random_knot(n, seed);
        let cd = vertical(&g, m);
        let ch = CoverDiagram::new(&g, m, Cuts::Horizontal).unwrap();
        for i in 0..n {
            for a in 0..m {
                for j in 0..n {
                    for b in 0..m {
                        let walk = cd.incidence(i, a, j, b);
                        prop_assert_eq!(walk, cd.incidence_formula(i, a, j, b));
                        prop_assert_eq!(walk, ch.incidence(i, a, j, b));
                    }
                }
            }
        }
    }

    #[test]
    fn decomposition_average_matches_closed_form(n in 2usize..=5, seed in any::<u64>(), m in 2usize..=3) {
        let g = random_knot(n, seed);
        let cd = vertical(&g, m);
        let gens = enumerate_generators(&cd);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..3 {
            let x = &gens[rng.gen_range(0..gens.len())];
            let want = alexander_cover(&cd, x);
            for _ in 0..20 {
                let parts = random_decomposition(n, m, x, &mut rng);
                let avg = parts.iter().map(|p| g.alexander_base(p)).sum::<Rational>() / Rational::from_integer(m as i64);
                prop_assert_eq!(avg, want);
            }
        }
    }

    #[test]
    fn generator_count_is_the_permanent(n in 2usize..=5, seed in any::<u64>(), m in 1usize..=2) {
        let cd = vertical(&random_knot(n, seed), m);
        prop_assert_eq!(enumerate_generators(&cd).len() as i64, permanent(&cd.incidence_matrix()));
    }
}

#[test]
fn unknot_walk_across_first_column() {
    let cd = vertical(&u2(), 2);
    for s in 0..2 {
        assert_eq!(cd.sheet_walk(0, 0, 1, s), s);
    }
}

#[test]
fn trivial_cover_and_column_zero() {
    let cd = vertical(&t5(), 1);
    assert!(cd.incidence_matrix().iter().flatten().all(|&b| b));
    let cd = vertical(&t5(), 3);
    for i in 0..5 {
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(cd.incidence(i, a, 0, b), a == b);
            }
        }
    }
}

#[test]
fn unknot_lifts_meet_two_alphas() {
    let cd = vertical(&u2(), 2);
    let mat = cd.incidence_matrix();
    for k in 0..4 {
        assert_eq!((0..4).filter(|&r| mat[r][k]).count(), 2);
    }
}

#[test]
fn generator_counts() {
    for (g, m) in [(u2(), 2), (u3(), 2), (t5(), 2), (u3(), 3)] {
        let cd = vertical(&g, m);
        assert_eq!(enumerate_generators(&cd).len() as i64, permanent(&cd.incidence_matrix()));
    }
    assert_eq!(enumerate_generators(&vertical(&t5(), 1)).len(), 120);
    let t52 = enumerate_generators(&vertical(&t5(), 2)).len();
    assert!(t52 <= 14400);
}

#[test]
fn doubled_projection_has_grading_zero() {
    let cd = vertical(&u2(), 2);
    // both sheets use the grading 0 base generator {(0,1),(1,0)}
    let x = enumerate_generators(&cd).into_iter().find(|x| x[0] == 1 && x[1] == 0 && x[2] == 1 && x[3] == 0);
    assert_eq!(alexander_cover(&cd, &x.unwrap()), Rational::from_integer(0));
    let base = vertical(&t5(), 1);
    for x in enumerate_generators(&base) {
        let perm: Vec<usize> = x.iter().map(|&i| i as usize).collect();
        assert_eq!(alexander_cover(&base, &x), t5().alexander_base(&perm));
    }
}

#[test]
fn rectangles_are_embedded_and_empty() {
    for (g, m) in [(u3(), 2), (t5(), 2), (u3(), 3)] {
        let cd = vertical(&g, m);
        let n = g.n;
        for x in enumerate_generators(&cd) {
            for r in enumerate_rectangles(&cd, &x) {
                let (w, h) = (r.w as usize, r.h as usize);
                assert!((1..n).contains(&w) && (1..n).contains(&h));
                let d = rect_domain(&cd, &x, r.sw as usize, w, h);
                let mut cells = d.support.clone();
                cells.dedup();
                assert_eq!(cells.len(), w * h);
                for &id in &d.support {
                    let (_, c, row) = cd.cell_from_id(id);
                    assert!(!cd.is_marked(c, row));
                }
                let diff: Vec<usize> = (0..x.len()).filter(|&k| x[k] != r.to[k]).collect();
                assert_eq!(diff, {
                    let mut v = vec![r.sw as usize, r.ne as usize];
                    v.sort();
                    v
                });
                assert_eq!(cd.beta_index(d.se), r.ne as usize);
                assert_eq!(cd.beta_index(d.nw), r.sw as usize);
                assert_eq!(r.to[r.ne as usize] as usize, d.se.i);
                assert_eq!(r.to[r.sw as usize] as usize, d.nw.i);
            }
        }
    }
}

#[test]
fn unknot_base_differential_vanishes() {
    let c = ChainComplex::build(&vertical(&u2(), 1)).unwrap();
    assert!(c.edges.is_empty());
}

#[test]
fn vertical_and_horizontal_complexes_coincide() {
    for (g, m) in [(u2(), 2), (t5(), 2), (u3(), 3)] {
        let cv = vertical(&g, m);
        let ch = CoverDiagram::new(&g, m, Cuts::Horizontal).unwrap();
        vh_correspondence(&cv, &ch).unwrap();
        let v = ChainComplex::build(&cv).unwrap();
        let h = ChainComplex::build(&ch).unwrap();
        assert_eq!(v.gens, h.gens);
        assert_eq!(v.alexander, h.alexander);
        let pairs = |c: &ChainComplex| {
            let mut p: Vec<(u32, u32)> = c.edges.iter().map(|e| (e.from, e.to)).collect();
            p.sort();
            p
        };
        assert_eq!(pairs(&v), pairs(&h));
    }
}
