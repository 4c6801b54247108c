//! An independent implementation of the classical grid complex (one sheet).

use std::collections::{BTreeMap, HashMap};

use covergrid::{GridDiagram, Rational};

use super::{permutations, rank_f2_dense};

/// Twice the weighted pair count, points given in doubled coordinates.
fn j2(a: &[(i64, i64, i64)], b: &[(i64, i64, i64)]) -> i64 {
    let mut t = 0;
    for &(ax, ay, wa) in a {
        for &(bx, by, wb) in b {
            if (bx - ax) * (by - ay) > 0 {
                t += wa * wb;
            }
        }
    }
    t
}

pub fn grading(g: &GridDiagram, x: &[usize]) -> Rational {
    let n = g.n as i64;
    let mut a: Vec<(i64, i64, i64)> = x.iter().enumerate().map(|(j, &i)| (2 * j as i64, 2 * i as i64, 2)).collect();
    let mut xo = Vec::new();
    for c in 0..g.n {
        let (cx, xr, or) = (2 * c as i64 + 1, 2 * g.x[c] as i64 + 1, 2 * g.o[c] as i64 + 1);
        a.push((cx, xr, -1));
        a.push((cx, or, -1));
        xo.push((cx, xr, 1));
        xo.push((cx, or, -1));
    }
    // A = (1/2) J(x - (X+O)/2, X-O) - (n-1)/2, with the points scaled by 2
    Rational::new(j2(&a, &xo), 4) - Rational::new(n - 1, 2)
}

pub struct Classical {
    pub gens: Vec<Vec<usize>>,
    pub grading: Vec<Rational>,
    /// Rectangle counts per ordered generator pair.
    pub rects: HashMap<(usize, usize), usize>,
}

pub fn classical(g: &GridDiagram) -> Classical {
    let n = g.n;
    let gens = permutations(n);
    let index: HashMap<Vec<usize>, usize> = gens.iter().cloned().enumerate().map(|(k, v)| (v, k)).collect();
    let marked = |c: usize, r: usize| g.x[c] == r || g.o[c] == r;
    let mut rects = HashMap::new();
    for (from, x) in gens.iter().enumerate() {
        for j1 in 0..n {
            for j2 in 0..n {
                if j1 == j2 {
                    continue;
                }
                let w = (j2 + n - j1) % n;
                let h = (x[j2] + n - x[j1]) % n;
                let cells_free = (0..w).all(|dx| (0..h).all(|dy| !marked((j1 + dx) % n, (x[j1] + dy) % n)));
                let inside = (0..n).any(|j| {
                    let dx = (j + n - j1) % n;
                    let dy = (x[j] + n - x[j1]) % n;
                    dx > 0 && dx < w && dy > 0 && dy < h
                });
                if cells_free && !inside {
                    let mut y = x.clone();
                    y.swap(j1, j2);
                    *rects.entry((from, index[&y])).or_insert(0) += 1;
                }
            }
        }
    }
    let grading = gens.iter().map(|x| grading(g, x)).collect();
    Classical { gens, grading, rects }
}

/// Dimension of homology over F2 in each grading.
pub fn f2_homology(c: &Classical) -> BTreeMap<Rational, usize> {
    let mut blocks: BTreeMap<Rational, Vec<usize>> = BTreeMap::new();
    for (k, a) in c.grading.iter().enumerate() {
        blocks.entry(*a).or_default().push(k);
    }
    let mut out = BTreeMap::new();
    for (a, members) in blocks {
        let pos: HashMap<usize, usize> = members.iter().enumerate().map(|(p, &k)| (k, p)).collect();
        let mut rows = vec![vec![false; members.len()]; members.len()];
        for (&(f, t), &count) in &c.rects {
            if let (Some(&pf), Some(&pt)) = (pos.get(&f), pos.get(&t)) {
                rows[pf][pt] ^= count % 2 == 1;
            }
        }
        let rank = rank_f2_dense(&rows);
        let h = members.len() - 2 * rank;
        if h > 0 {
            out.insert(a, h);
        }
    }
    out
}
