//! Sign assignments for the realized rectangles of a complex, found by
//! solving the square constraints over F2.
//!
//! A sign is attached to each ordered pair `(x, y)` joined by at least one
//! rectangle: the two rectangles with the same corners present the same
//! formal rectangle and share a sign. Writing `S = (-1)^t`, every pair of
//! two-step paths with equal endpoints and equal composite cell chain gives
//! `t1 + t2 + t3 + t4 = 1`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::xor::{XorEquation, XorSystem};

/// Variables of the sign problem: one per joined pair of generators.
#[derive(Debug, Clone)]
pub struct EdgeVariables {
    /// Variable of each edge of the complex.
    pub of_edge: Vec<u32>,
    /// `(from, to)` of each variable.
    pub pairs: Vec<(u32, u32)>,
}

impl EdgeVariables {
    pub fn new(c: &ChainComplex) -> Self {
        let mut of_edge = vec![0u32; c.edges.len()];
        let mut pairs = Vec::new();
        for g in 0..c.len() {
            let lo = c.out[g];
            let mut idx: Vec<usize> = (lo..c.out[g + 1]).collect();
            idx.sort_by_key(|&e| c.edges[e].to);
            let mut last = None;
            for e in idx {
                let to = c.edges[e].to;
                if last != Some(to) {
                    pairs.push((g as u32, to));
                    last = Some(to);
                }
                of_edge[e] = (pairs.len() - 1) as u32;
            }
        }
        EdgeVariables { of_edge, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Cell supports of all edges, stored flat.
#[derive(Debug, Clone)]
pub struct Supports {
    start: Vec<usize>,
    cells: Vec<u32>,
}

impl Supports {
    pub fn new(c: &ChainComplex) -> Self {
        let per: Vec<Vec<u32>> = c.edges.par_iter().map(|e| c.domain(e).support).collect();
        let mut start = Vec::with_capacity(per.len() + 1);
        let mut cells = Vec::new();
        start.push(0);
        for s in per {
            cells.extend(s);
            start.push(cells.len());
        }
        Supports { start, cells }
    }

    pub fn get(&self, e: usize) -> &[u32] {
        &self.cells[self.start[e]..self.start[e + 1]]
    }
}

/// A two-step path `x -> y -> z` through edges `e1`, `e2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Path {
    z: u32,
    composite: Vec<u32>,
    e1: u32,
    e2: u32,
}

fn merge_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Composite classes out of `x`: each inner list holds the edge pairs
/// decomposing one composite domain.
pub fn composite_classes(c: &ChainComplex, sup: &Supports, x: usize) -> Vec<Vec<(u32, u32)>> {
    let mut paths = Vec::new();
    for (i1, e1) in c.out_edges(x).iter().enumerate() {
        let k1 = c.out[x] + i1;
        let y = e1.to as usize;
        for (i2, e2) in c.out_edges(y).iter().enumerate() {
            let k2 = c.out[y] + i2;
            paths.push(Path {
                z: e2.to,
                composite: merge_sorted(sup.get(k1), sup.get(k2)),
                e1: k1 as u32,
                e2: k2 as u32,
            });
        }
    }
    paths.sort();
    let mut classes = Vec::new();
    let mut i = 0;
    while i < paths.len() {
        let mut j = i;
        while j < paths.len() && paths[j].z == paths[i].z && paths[j].composite == paths[i].composite {
            j += 1;
        }
        classes.push(paths[i..j].iter().map(|p| (p.e1, p.e2)).collect());
        i = j;
    }
    classes
}

/// The square constraints of a complex.
#[derive(Debug, Clone)]
pub struct SignProblem {
    pub vars: EdgeVariables,
    pub system: XorSystem,
    /// Number of two-step paths with nonzero contribution mod nothing, i.e.
    /// all realized composite paths.
    pub paths: usize,
}

pub fn generate_constraints(c: &ChainComplex) -> Result<SignProblem> {
    let vars = EdgeVariables::new(c);
    let sup = Supports::new(c);
    let per: Vec<Result<(Vec<XorEquation>, usize)>> = (0..c.len())
        .into_par_iter()
        .map(|x| {
            let mut eqs = Vec::new();
            let mut paths = 0;
            for class in composite_classes(c, &sup, x) {
                paths += class.len();
                if class.len() != 2 {
                    let z = c.edges[class[0].1 as usize].to as usize;
                    return Err(Error::CompositeClassSize { from: x, to: z, size: class.len() });
                }
                let v = |e: u32| vars.of_edge[e as usize];
                let (a, b) = (class[0], class[1]);
                eqs.push(XorEquation::new(vec![v(a.0), v(a.1), v(b.0), v(b.1)], true));
            }
            Ok((eqs, paths))
        })
        .collect();
    let mut equations = Vec::new();
    let mut paths = 0;
    for r in per {
        let (e, p) = r?;
        equations.extend(e);
        paths += p;
    }
    let n_vars = vars.len();
    Ok(SignProblem { vars, system: XorSystem { n_vars, equations }, paths })
}

/// Signs per variable and per edge.
#[derive(Debug, Clone)]
pub struct SignSolution {
    pub var_sign: Vec<i8>,
    pub edge_sign: Vec<i8>,
    /// Variables not fixed by gauge or constraints.
    pub free: usize,
    pub gauge_fixed: usize,
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn find(&mut self, mut a: u32) -> u32 {
        while self.0[a as usize] != a {
            let p = self.0[a as usize];
            self.0[a as usize] = self.0[p as usize];
            a = p;
        }
        a
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra as usize] = rb;
        true
    }
}

/// Solves the constraints. Variables on a spanning forest of the generator
/// graph are gauge-fixed to `+1`. With a seed the forest, the free variables
/// and a final gauge transformation are all drawn at random.
pub fn solve(c: &ChainComplex, problem: &SignProblem, seed: Option<u64>) -> Result<SignSolution> {
    let vars = &problem.vars;
    let mut order: Vec<u32> = (0..vars.len() as u32).collect();
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    if let Some(r) = rng.as_mut() {
        order.shuffle(r);
    }
    let mut uf = UnionFind((0..c.len() as u32).collect());
    let mut pinned = Vec::new();
    for v in order {
        let (a, b) = vars.pairs[v as usize];
        if uf.union(a, b) {
            pinned.push((v, false));
        }
    }
    let free_bits: Vec<bool> = match rng.as_mut() {
        Some(r) => (0..vars.len()).map(|_| r.gen()).collect(),
        None => vec![false; vars.len()],
    };
    let sol = problem.system.solve(&pinned, |v| free_bits[v as usize])?;
    let mut var_sign: Vec<i8> = sol.values.iter().map(|&t| if t { -1 } else { 1 }).collect();
    if let Some(r) = rng.as_mut() {
        let u: Vec<i8> = (0..c.len()).map(|_| if r.gen() { -1 } else { 1 }).collect();
        for (v, &(a, b)) in vars.pairs.iter().enumerate() {
            var_sign[v] *= u[a as usize] * u[b as usize];
        }
    }
    let edge_sign = vars.of_edge.iter().map(|&v| var_sign[v as usize]).collect();
    Ok(SignSolution { var_sign, edge_sign, free: sol.free.len(), gauge_fixed: pinned.len() })
}

/// Signs from the F2 system in one call.
pub fn solve_complex(c: &ChainComplex, seed: Option<u64>) -> Result<SignSolution> {
    let p = generate_constraints(c)?;
    solve(c, &p, seed)
}

/// Checks `d^2 = 0` over the integers for per-edge signs.
pub fn check_d_squared(c: &ChainComplex, edge_sign: &[i8]) -> Result<()> {
    (0..c.len()).into_par_iter().try_for_each(|x| {
        let mut acc: Vec<(u32, i64)> = Vec::new();
        for (i1, e1) in c.out_edges(x).iter().enumerate() {
            let s1 = edge_sign[c.out[x] + i1] as i64;
            let y = e1.to as usize;
            for (i2, e2) in c.out_edges(y).iter().enumerate() {
                acc.push((e2.to, s1 * edge_sign[c.out[y] + i2] as i64));
            }
        }
        acc.sort_unstable_by_key(|p| p.0);
        let mut i = 0;
        while i < acc.len() {
            let mut sum = 0;
            let mut j = i;
            while j < acc.len() && acc[j].0 == acc[i].0 {
                sum += acc[j].1;
                j += 1;
            }
            if sum != 0 {
                return Err(Error::DSquaredNonzero { from: x, to: acc[i].0 as usize, value: sum });
            }
            i = j;
        }
        Ok(())
    })
}

/// Signed boundary as `(from, to, coefficient)` with zero entries dropped.
pub fn signed_boundary(c: &ChainComplex, edge_sign: &[i8]) -> Vec<(u32, u32, i64)> {
    let mut out: Vec<(u32, u32, i64)> = Vec::new();
    for g in 0..c.len() {
        let mut row: Vec<(u32, i64)> =
            (c.out[g]..c.out[g + 1]).map(|e| (c.edges[e].to, edge_sign[e] as i64)).collect();
        row.sort_unstable_by_key(|p| p.0);
        let mut i = 0;
        while i < row.len() {
            let mut sum = 0;
            let mut j = i;
            while j < row.len() && row[j].0 == row[i].0 {
                sum += row[j].1;
                j += 1;
            }
            if sum != 0 {
                out.push((g as u32, row[i].0, sum));
            }
            i = j;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{CoverDiagram, Cuts};
    use crate::grid::{GridDiagram, Marking};

    #[test]
    fn unknot3_signs_square_to_zero() {
        let g = GridDiagram::unknot2().apply_stabilization(0, Marking::X);
        for m in 1..=3 {
            let cd = CoverDiagram::new(&g, m, Cuts::Vertical).unwrap();
            let c = ChainComplex::build(&cd).unwrap();
            let sol = solve_complex(&c, None).unwrap();
            check_d_squared(&c, &sol.edge_sign).unwrap();
        }
    }
}
