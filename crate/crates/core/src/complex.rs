//! Generators, Alexander gradings and empty rectangles of a lifted grid.

use rayon::prelude::*;

use crate::cover::{CoverDiagram, Point};
use crate::error::{Error, Result};
use crate::grid::{count_j, GridDiagram, HalfPoint, PointWeightSet, Rational};

/// A generator stores, for each beta lift `k = b n + j`, the row of its point.
pub type Generator = Box<[u8]>;

/// An empty rectangle, stored compactly. The south-west corner is the point
/// of `from` on beta lift `sw`; the north-east corner the one on `ne`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub from: u32,
    pub to: u32,
    pub sw: u16,
    pub ne: u16,
    pub w: u8,
    pub h: u8,
}

/// A rectangle found from a generator before the target is indexed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRect {
    pub sw: u16,
    pub ne: u16,
    pub w: u8,
    pub h: u8,
    pub to: Generator,
}

/// Fully expanded rectangle geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectDomain {
    pub sw: Point,
    pub se: Point,
    pub ne: Point,
    pub nw: Point,
    pub width: usize,
    pub height: usize,
    /// Cell ids, see [`CoverDiagram::cell_id`]; sorted.
    pub support: Vec<u32>,
}

/// Per-lattice-point values `J({p}, X - O)` for fast Alexander gradings.
#[derive(Debug, Clone)]
pub struct AlexanderTable {
    n: usize,
    m: usize,
    table: Vec<i64>,
    constant: i64,
}

impl AlexanderTable {
    pub fn new(g: &GridDiagram, m: usize) -> Self {
        let n = g.n;
        let xo = g.x_minus_o();
        let mut table = vec![0; n * n];
        for j in 0..n {
            for i in 0..n {
                let p = PointWeightSet::new().with(HalfPoint::lattice(j, i), 1);
                table[j * n + i] = count_j(&p, &xo);
            }
        }
        let constant = count_j(&g.x_plus_o(), &xo);
        AlexanderTable { n, m, table, constant }
    }

    pub fn grading(&self, x: &[u8]) -> Rational {
        let n = self.n;
        let s: i64 = x.iter().enumerate().map(|(k, &i)| self.table[(k % n) * n + i as usize]).sum();
        let m = self.m as i64;
        Rational::new(2 * s - m * self.constant, 4 * m) - Rational::new(n as i64 - 1, 2)
    }
}

/// `(1/2m) J(pi(x) - (m/2)(X+O), X-O) - (n-1)/2`.
pub fn alexander_cover(cd: &CoverDiagram, x: &[u8]) -> Rational {
    AlexanderTable::new(&cd.base, cd.m).grading(x)
}

/// `alpha_index_table[k * n + i]` is the alpha lift through the point of beta
/// lift `k` at row `i`.
fn alpha_index_table(cd: &CoverDiagram) -> Vec<usize> {
    let n = cd.n();
    let mut t = vec![0; cd.lifts() * n];
    for k in 0..cd.lifts() {
        for i in 0..n {
            t[k * n + i] = cd.alpha_index(cd.beta_point(k, i));
        }
    }
    t
}

/// All generators in lexicographic order of their row arrays.
pub fn enumerate_generators(cd: &CoverDiagram) -> Vec<Generator> {
    let n = cd.n();
    let l = cd.lifts();
    let table = alpha_index_table(cd);
    let recurse = |first_row: usize| {
        let mut out = Vec::new();
        let mut used = vec![false; l];
        let mut cur = vec![0u8; l];
        let a0 = table[first_row];
        used[a0] = true;
        cur[0] = first_row as u8;
        backtrack(1, n, l, &table, &mut used, &mut cur, &mut out);
        out
    };
    (0..n).into_par_iter().map(recurse).collect::<Vec<_>>().into_iter().flatten().collect()
}

fn backtrack(
    k: usize,
    n: usize,
    l: usize,
    table: &[usize],
    used: &mut [bool],
    cur: &mut [u8],
    out: &mut Vec<Generator>,
) {
    if k == l {
        out.push(cur.to_vec().into_boxed_slice());
        return;
    }
    for i in 0..n {
        let a = table[k * n + i];
        if !used[a] {
            used[a] = true;
            cur[k] = i as u8;
            backtrack(k + 1, n, l, table, used, cur, out);
            used[a] = false;
        }
    }
}

/// Empty rectangles starting at `x`, ordered by south-west lift, width,
/// height.
pub fn enumerate_rectangles(cd: &CoverDiagram, x: &[u8]) -> Vec<RawRect> {
    let n = cd.n();
    let mut occ = vec![u16::MAX; cd.m * n * n];
    for (k, &i) in x.iter().enumerate() {
        occ[cd.point_id(cd.beta_point(k, i as usize))] = k as u16;
    }
    let mut out = Vec::new();
    for (k, &i0) in x.iter().enumerate() {
        let p = cd.beta_point(k, i0 as usize);
        for w in 1..n {
            for h in 1..n {
                let dy = h - 1;
                let row = (p.i + dy) % n;
                if (0..w).any(|dx| cd.is_marked(p.j + dx, row)) {
                    break;
                }
                if dy > 0 {
                    let blocked = (1..w).any(|dx| {
                        let s = cd.region_sheet(p.j, p.i, p.s, dx, dy);
                        let q = Point { j: (p.j + dx) % n, i: row, s };
                        occ[cd.point_id(q)] != u16::MAX
                    });
                    if blocked {
                        break;
                    }
                }
                let s = cd.region_sheet(p.j, p.i, p.s, w, h);
                let q = Point { j: (p.j + w) % n, i: (p.i + h) % n, s };
                let ne = occ[cd.point_id(q)];
                if ne != u16::MAX {
                    let mut y = x.to_vec();
                    y[k] = q.i as u8;
                    y[ne as usize] = p.i as u8;
                    out.push(RawRect {
                        sw: k as u16,
                        ne,
                        w: w as u8,
                        h: h as u8,
                        to: y.into_boxed_slice(),
                    });
                }
            }
        }
    }
    out
}

/// The empty rectangle from `x` with south-west corner on beta lift `sw` and
/// the given size, if there is one.
pub fn find_rectangle(cd: &CoverDiagram, x: &[u8], sw: usize, w: usize, h: usize) -> Option<RawRect> {
    let n = cd.n();
    if w == 0 || h == 0 || w >= n || h >= n {
        return None;
    }
    let p = cd.beta_point(sw, x[sw] as usize);
    for dx in 0..w {
        for dy in 0..h {
            if cd.is_marked(p.j + dx, p.i + dy) {
                return None;
            }
        }
    }
    let mut occ = vec![u16::MAX; cd.m * n * n];
    for (k, &i) in x.iter().enumerate() {
        occ[cd.point_id(cd.beta_point(k, i as usize))] = k as u16;
    }
    let at = |dx: usize, dy: usize| Point {
        j: (p.j + dx) % n,
        i: (p.i + dy) % n,
        s: cd.region_sheet(p.j, p.i, p.s, dx, dy),
    };
    for dx in 1..w {
        for dy in 1..h {
            if occ[cd.point_id(at(dx, dy))] != u16::MAX {
                return None;
            }
        }
    }
    let q = at(w, h);
    let ne = occ[cd.point_id(q)];
    if ne == u16::MAX {
        return None;
    }
    let mut y = x.to_vec();
    y[sw] = q.i as u8;
    y[ne as usize] = p.i as u8;
    Some(RawRect { sw: sw as u16, ne, w: w as u8, h: h as u8, to: y.into_boxed_slice() })
}

/// Expands a rectangle whose south-west corner is the point of `x` on beta
/// lift `sw`.
pub fn rect_domain(cd: &CoverDiagram, x: &[u8], sw: usize, w: usize, h: usize) -> RectDomain {
    let n = cd.n();
    let p = cd.beta_point(sw, x[sw] as usize);
    let at = |dx: usize, dy: usize| Point {
        j: (p.j + dx) % n,
        i: (p.i + dy) % n,
        s: cd.region_sheet(p.j, p.i, p.s, dx, dy),
    };
    let mut support = Vec::with_capacity(w * h);
    for dx in 0..w {
        for dy in 0..h {
            let c = at(dx, dy);
            support.push(cd.cell_id(c.s, c.j, c.i));
        }
    }
    support.sort_unstable();
    RectDomain { sw: p, se: at(w, 0), ne: at(w, h), nw: at(0, h), width: w, height: h, support }
}

/// The complex of a cover: generators, gradings, and the unsigned boundary
/// as an edge list grouped by source.
#[derive(Debug, Clone)]
pub struct ChainComplex {
    pub cover: CoverDiagram,
    pub gens: Vec<Generator>,
    pub alexander: Vec<Rational>,
    /// Sorted by `from`; within a source in enumeration order.
    pub edges: Vec<Rect>,
    /// Edges out of generator `g` are `edges[out[g]..out[g + 1]]`.
    pub out: Vec<usize>,
}

impl ChainComplex {
    pub fn build(cd: &CoverDiagram) -> Result<Self> {
        let gens = enumerate_generators(cd);
        if gens.len() >= u32::MAX as usize {
            return Err(Error::Unsupported("too many generators".into()));
        }
        let table = AlexanderTable::new(&cd.base, cd.m);
        let alexander: Vec<Rational> = gens.par_iter().map(|x| table.grading(x)).collect();
        let per_source: Vec<Result<Vec<Rect>>> = gens
            .par_iter()
            .enumerate()
            .map(|(from, x)| {
                enumerate_rectangles(cd, x)
                    .into_iter()
                    .map(|r| {
                        let to = gens
                            .binary_search(&r.to)
                            .map_err(|_| Error::Internal("rectangle target is not a generator".into()))?;
                        if alexander[to] != alexander[from] {
                            return Err(Error::GradingViolation { from, to });
                        }
                        Ok(Rect { from: from as u32, to: to as u32, sw: r.sw, ne: r.ne, w: r.w, h: r.h })
                    })
                    .collect()
            })
            .collect();
        let mut edges = Vec::new();
        let mut out = vec![0];
        for r in per_source {
            edges.extend(r?);
            out.push(edges.len());
        }
        Ok(ChainComplex { cover: cd.clone(), gens, alexander, edges, out })
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn index_of(&self, x: &[u8]) -> Option<usize> {
        self.gens.binary_search_by(|g| g[..].cmp(x)).ok()
    }

    pub fn out_edges(&self, g: usize) -> &[Rect] {
        &self.edges[self.out[g]..self.out[g + 1]]
    }

    pub fn domain(&self, e: &Rect) -> RectDomain {
        rect_domain(&self.cover, &self.gens[e.from as usize], e.sw as usize, e.w as usize, e.h as usize)
    }

    /// Distinct Alexander gradings, ascending, with their generator lists.
    pub fn blocks(&self) -> Vec<(Rational, Vec<usize>)> {
        let mut keys: Vec<Rational> = self.alexander.clone();
        keys.sort();
        keys.dedup();
        let mut blocks: Vec<(Rational, Vec<usize>)> = keys.into_iter().map(|a| (a, Vec::new())).collect();
        for (g, a) in self.alexander.iter().enumerate() {
            let pos = blocks.binary_search_by(|(b, _)| b.cmp(a)).unwrap();
            blocks[pos].1.push(g);
        }
        blocks
    }

    /// Unsigned boundary mod 2 as sorted `(from, to)` pairs with odd count.
    pub fn boundary_mod2(&self) -> Vec<(u32, u32)> {
        let mut pairs: Vec<(u32, u32)> = self.edges.iter().map(|e| (e.from, e.to)).collect();
        pairs.sort_unstable();
        let mut out = Vec::new();
        let mut idx = 0;
        while idx < pairs.len() {
            let mut end = idx;
            while end < pairs.len() && pairs[end] == pairs[idx] {
                end += 1;
            }
            if (end - idx) % 2 == 1 {
                out.push(pairs[idx]);
            }
            idx = end;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::Cuts;

    #[test]
    fn unknot_base_has_no_rectangles() {
        let cd = CoverDiagram::new(&GridDiagram::unknot2(), 1, Cuts::Vertical).unwrap();
        let c = ChainComplex::build(&cd).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.edges.is_empty());
    }

    #[test]
    fn base_generators_are_permutations() {
        let cd = CoverDiagram::new(&GridDiagram::trefoil5(), 1, Cuts::Vertical).unwrap();
        assert_eq!(enumerate_generators(&cd).len(), 120);
    }

    #[test]
    fn double_projection_grading() {
        let cd = CoverDiagram::new(&GridDiagram::unknot2(), 2, Cuts::Vertical).unwrap();
        // both projected copies are {(0,1),(1,0)}
        let x = [1u8, 0, 1, 0];
        if enumerate_generators(&cd).iter().any(|g| g[..] == x) {
            assert_eq!(alexander_cover(&cd, &x), Rational::from_integer(0));
        }
    }
}
