//! Checks for the stabilization map between the covers of a grid `G` and of
//! its stabilization `H`.
//!
//! Both diagrams are normalized so that in `H` the new column `c1` carries
//! `O1` at row `rho + 1` directly above `X1` at row `rho`. The distinguished
//! curves are `alpha_1` (row line `rho + 1`), `beta_1` (column line `c1`) and
//! `beta_2` (column line `c1 + 1`); `w_s` is their intersection in sheet `s`.
//! Only vertical cuts are used, so the lift `beta^s` lies in sheet `s`.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;

use crate::clifford::{edge_signs, formal_rect_of_edge, CurveFrame, FormalGen, FormalRect, Spinors};
use crate::complex::{find_rectangle, ChainComplex, Generator, Rect};
use crate::cover::{CoverDiagram, Cuts, Point};
use crate::error::{Error, Result};
use crate::grid::{format_rational, GridDiagram, Marking, Rational};
use crate::signs::{check_d_squared, signed_boundary};
use crate::snf::{smith_normal_form, PivotStrategy, SparseMatrix};

/// Position of the component on a lift of `alpha_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    /// on a lift of `beta_1`
    I,
    /// on a lift of `beta_2`
    J,
    N,
}

/// Tags indexed by the label of the `alpha_1` lift.
pub type TypeTag = Vec<Tag>;

pub fn tag_string(t: &[Tag]) -> String {
    t.iter()
        .map(|t| match t {
            Tag::I => 'I',
            Tag::J => 'J',
            Tag::N => 'N',
        })
        .collect()
}

/// A punctured rectangle: the strip of column `c1` in sheet `grid` between
/// row lines `bottom` and `top`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Punctured {
    pub grid: usize,
    pub bottom: usize,
    pub top: usize,
    pub to: Generator,
    pub sign: i8,
}

/// A domain contributing to the stabilization map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contribution {
    pub from: usize,
    pub to: Generator,
    pub sign: i8,
    /// grids of the hexagon factors, in the order they were applied
    pub hexagons: Vec<usize>,
    pub four_m_gon: bool,
}

/// A 4m-gon from `from`, with `mu(theta, a_k)` for every alpha edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourMGon {
    pub to: Generator,
    /// `(row of P, column of Q)` for each loop, starting in sheet 0
    pub loops: Vec<(usize, usize)>,
    pub edge_signs: Vec<i8>,
}

impl FourMGon {
    pub fn sign(&self) -> i8 {
        self.edge_signs[0]
    }

    pub fn edge_independent(&self) -> bool {
        self.edge_signs.iter().all(|&s| s == self.edge_signs[0])
    }
}

/// The normalized pair of covers with everything needed to build the map.
pub struct Stabilization {
    pub g: GridDiagram,
    pub h: GridDiagram,
    pub m: usize,
    pub c1: usize,
    pub rho: usize,
    /// `X2`, the other marking in the row of `O1`, sits just right of `O1`.
    pub x2_right: bool,
    pub cg: ChainComplex,
    pub ch: ChainComplex,
    pub frame: CurveFrame,
    spinors: Spinors,
    h_signs: Vec<i8>,
}

impl Stabilization {
    /// Stabilizes `g` at row `row`, moving the given marking, and normalizes.
    /// Moving `O` is handled on the diagram with `X` and `O` exchanged.
    pub fn new(g: &GridDiagram, m: usize, row: usize, moved: Marking) -> Result<Self> {
        g.validate()?;
        if row >= g.n {
            return Err(Error::Unsupported(format!("row {row} out of range")));
        }
        let g1 = match moved {
            Marking::X => g.clone(),
            Marking::O => g.swap_markings(),
        };
        let cstar = g1.stabilization_column(row, Marking::X);
        let h1 = g1.apply_stabilization(row, Marking::X);
        let (g, h) = (g1.rotate_half(), h1.rotate_half());
        let n = h.n;
        let c1 = n - 1 - cstar;
        let rho = n - 2 - row;
        if h.o[c1] != rho + 1 || h.x[c1] != rho {
            return Err(Error::Internal("stabilized column is not in normal form".into()));
        }
        let x2 = h.x_inv()[rho + 1];
        let x2_right = x2 == (c1 + 1) % n;
        if !x2_right && x2 != (c1 + n - 1) % n {
            return Err(Error::Internal("X2 is not adjacent to O1".into()));
        }
        let cg = ChainComplex::build(&CoverDiagram::new(&g, m, Cuts::Vertical)?)?;
        let ch = ChainComplex::build(&CoverDiagram::new(&h, m, Cuts::Vertical)?)?;
        let frame = CurveFrame::standard(&ch.cover);
        let spinors = Spinors::new(frame.len());
        let h_signs = edge_signs(&ch, &frame)?;
        Ok(Stabilization { g, h, m, c1, rho, x2_right, cg, ch, frame, spinors, h_signs })
    }

    fn nh(&self) -> usize {
        self.h.n
    }

    pub fn h_signs(&self) -> &[i8] {
        &self.h_signs
    }

    /// Beta lift index of `beta_1` in sheet `s`.
    pub fn beta1(&self, s: usize) -> usize {
        s * self.nh() + self.c1
    }

    pub fn beta2(&self, s: usize) -> usize {
        s * self.nh() + (self.c1 + 1) % self.nh()
    }

    pub fn w_point(&self, s: usize) -> Point {
        Point { j: self.c1, i: self.rho + 1, s }
    }

    pub fn contains_w(&self, x: &[u8], s: usize) -> bool {
        x[self.beta1(s)] as usize == self.rho + 1
    }

    pub fn contains_all_w(&self, x: &[u8]) -> bool {
        (0..self.m).all(|s| self.contains_w(x, s))
    }

    pub fn classify(&self, x: &[u8]) -> TypeTag {
        let cd = &self.ch.cover;
        let n = self.nh();
        let mut tag = vec![Tag::N; self.m];
        for (k, &i) in x.iter().enumerate() {
            if i as usize != self.rho + 1 {
                continue;
            }
            let p = cd.beta_point(k, i as usize);
            let a = cd.alpha_index(p) / n;
            tag[a] = if p.j == self.c1 {
                Tag::I
            } else if p.j == (self.c1 + 1) % n {
                Tag::J
            } else {
                Tag::N
            };
        }
        tag
    }

    fn col_to_h(&self, j: usize) -> usize {
        if j < self.c1 {
            j
        } else {
            j + 1
        }
    }

    fn row_to_h(&self, i: usize) -> usize {
        if i <= self.rho {
            i
        } else {
            i + 1
        }
    }

    /// Lattice point of the cover of `G` as a point of the cover of `H`.
    pub fn point_to_h(&self, p: Point) -> Point {
        Point { j: self.col_to_h(p.j), i: self.row_to_h(p.i), s: p.s }
    }

    /// The generator of `H` obtained by adding every `w_s`.
    pub fn psi_inverse(&self, x: &[u8]) -> Result<Generator> {
        let (cg, ch) = (&self.cg.cover, &self.ch.cover);
        let mut y = vec![u8::MAX; ch.lifts()];
        let mut put = |p: Point| {
            let k = ch.beta_index(p);
            y[k] = p.i as u8;
        };
        for (k, &i) in x.iter().enumerate() {
            put(self.point_to_h(cg.beta_point(k, i as usize)));
        }
        for s in 0..self.m {
            put(self.w_point(s));
        }
        if y.contains(&u8::MAX) {
            return Err(Error::Internal("identification of generators is not a bijection".into()));
        }
        Ok(y.into_boxed_slice())
    }

    /// Forgets the `w_s`; `None` unless `x` contains all of them.
    pub fn psi(&self, x: &[u8]) -> Option<Generator> {
        if !self.contains_all_w(x) {
            return None;
        }
        let (cg, ch) = (&self.cg.cover, &self.ch.cover);
        let mut y = vec![0u8; cg.lifts()];
        for (k, &i) in x.iter().enumerate() {
            let p = ch.beta_point(k, i as usize);
            if p.j == self.c1 {
                continue;
            }
            let j = if p.j < self.c1 { p.j } else { p.j - 1 };
            let row = if p.i <= self.rho { p.i } else { p.i - 1 };
            let q = Point { j, i: row, s: p.s };
            y[cg.beta_index(q)] = row as u8;
        }
        Some(y.into_boxed_slice())
    }

    fn formal(&self, x: &[u8]) -> FormalGen {
        FormalGen::of(&self.ch.cover, &self.frame, x)
    }

    fn sign_of(&self, x: &[u8], y: &[u8], r: &FormalRect) -> Result<i8> {
        self.spinors.rect_sign(&self.formal(x), &self.formal(y), r)
    }

    /// The punctured rectangle in sheet `k` starting at `x`, if any.
    pub fn punctured(&self, x: &[u8], k: usize) -> Result<Option<Punctured>> {
        let n = self.nh();
        let (b1, b2) = (self.beta1(k), self.beta2(k));
        let (i1, i2) = (x[b1] as usize, x[b2] as usize);
        let h = (i2 + n - i1) % n;
        let d = (self.rho + 1 + n - i1) % n;
        if d == 0 || d >= h {
            return Ok(None);
        }
        let mut y = x.to_vec();
        y[b1] = i2 as u8;
        y[b2] = i1 as u8;
        let cd = &self.ch.cover;
        let a_s = cd.alpha_index(Point { j: self.c1, i: i1, s: k });
        let a_n = cd.alpha_index(Point { j: self.c1, i: i2, s: k });
        let f = &self.frame;
        let r = FormalRect {
            s: f.alpha_slot[a_s],
            n: f.alpha_slot[a_n],
            w: f.beta_slot[b1],
            e: f.beta_slot[b2],
            o_s: f.alpha_or[a_s],
        };
        let sign = self.sign_of(x, &y, &r)?;
        Ok(Some(Punctured { grid: k, bottom: i1, top: i2, to: y.into_boxed_slice(), sign }))
    }

    /// The complementary rectangle of a punctured rectangle, as an edge of
    /// the complex of `H`, with its sign.
    pub fn complement(&self, a: &Punctured) -> Result<(Rect, i8)> {
        let n = self.nh();
        let y = self.ch.index_of(&a.to).ok_or_else(|| Error::Internal("punctured target missing".into()))?;
        let h = (a.bottom + n - a.top) % n;
        let b1 = self.beta1(a.grid);
        self.ch
            .out_edges(y)
            .iter()
            .enumerate()
            .find(|(_, e)| e.sw as usize == b1 && e.w == 1 && e.h as usize == h)
            .map(|(t, e)| (*e, self.h_signs[self.ch.out[y] + t]))
            .ok_or_else(|| Error::Internal("complementary rectangle missing".into()))
    }

    /// The punctured hexagon in sheet `k` from `x` with obtuse corner on
    /// `beta_1` at row line `corner`.
    pub fn hexagon(&self, x: &[u8], k: usize, corner: usize) -> Result<Option<(Generator, i8)>> {
        let n = self.nh();
        let Some(a) = self.punctured(x, k)? else {
            return Ok(None);
        };
        let h = (a.top + n - a.bottom) % n;
        let dc = (corner + n - a.bottom) % n;
        if dc == 0 || dc >= h {
            return Ok(None);
        }
        let cd = &self.ch.cover;
        let z = &a.to;
        let target_alpha = cd.alpha_index(Point { j: self.c1, i: corner, s: k });
        let Some(kp) = (0..z.len()).find(|&q| z[q] as usize == corner && cd.alpha_index(cd.beta_point(q, corner)) == target_alpha)
        else {
            return Ok(None);
        };
        let p = cd.beta_point(kp, corner);
        let w = (self.c1 + n - p.j) % n;
        if w == 0 || cd.region_sheet(p.j, p.i, p.s, w, 0) != k {
            return Ok(None);
        }
        let hr = (a.top + n - corner) % n;
        let Some(r) = find_rectangle(cd, z, kp, w, hr) else {
            return Ok(None);
        };
        if r.ne as usize != self.beta1(k) {
            return Ok(None);
        }
        let a_s = cd.alpha_index(p);
        let a_n = cd.alpha_index(Point { j: self.c1, i: a.top, s: k });
        let f = &self.frame;
        let fr = FormalRect {
            s: f.alpha_slot[a_s],
            n: f.alpha_slot[a_n],
            w: f.beta_slot[kp],
            e: f.beta_slot[r.ne as usize],
            o_s: f.alpha_or[a_s],
        };
        let s = self.sign_of(z, &r.to, &fr)?;
        Ok(Some((r.to, a.sign * s)))
    }

    /// The Type L domain from `x`, hexagons taken in the given grid order.
    pub fn type_l_ordered(&self, x: &[u8], order: &[usize]) -> Result<Option<(Generator, i8)>> {
        let mut z: Generator = x.into();
        let mut sign = 1;
        for &s in order {
            match self.hexagon(&z, s, self.rho + 1)? {
                Some((y, t)) => {
                    z = y;
                    sign *= t;
                }
                None => return Ok(None),
            }
        }
        Ok(self.contains_all_w(&z).then_some((z, sign)))
    }

    pub fn missing_w(&self, x: &[u8]) -> Vec<usize> {
        (0..self.m).filter(|&s| !self.contains_w(x, s)).collect()
    }

    /// Type L domain with the missing corners in increasing order.
    pub fn type_l(&self, x: &[u8]) -> Result<Option<(Generator, i8)>> {
        self.type_l_ordered(x, &self.missing_w(x))
    }

    /// The 4m-gon from `z`, if any. Loop `k` runs around the rectangle with
    /// north-west corner `w`, south-west corner the point of `z` on `beta_1`
    /// in sheet `k`, and north-east corner the point of `z` on the `alpha_1`
    /// lift through `w` in sheet `k + 1`.
    pub fn four_m_gon(&self, z: &[u8]) -> Result<Option<FourMGon>> {
        let n = self.nh();
        let m = self.m;
        let cd = &self.ch.cover;
        let top = self.rho + 1;
        let mut loops = Vec::with_capacity(m);
        let mut edges: Vec<(bool, usize)> = Vec::with_capacity(4 * m);
        let mut y = z.to_vec();
        for s in 0..m {
            let row_p = z[self.beta1(s)] as usize;
            if row_p == top {
                return Ok(None);
            }
            let next = (s + 1) % m;
            let a1 = cd.alpha_index(self.w_point(next));
            let Some(kr) = (0..z.len()).find(|&k| z[k] as usize == top && cd.alpha_index(cd.beta_point(k, top)) == a1)
            else {
                return Ok(None);
            };
            let r = cd.beta_point(kr, top);
            let col_q = r.j;
            if col_q == self.c1 {
                return Ok(None);
            }
            let width = (col_q + n - self.c1) % n;
            let height = (top + n - row_p) % n;
            for dx in 0..width {
                for dy in 0..height {
                    let (c, rr) = ((self.c1 + dx) % n, (row_p + dy) % n);
                    if cd.is_marked(c, rr) && !(c == self.c1 && rr == self.rho) {
                        return Ok(None);
                    }
                }
            }
            if cd.region_sheet(self.c1, row_p, s, width, height) != r.s {
                return Ok(None);
            }
            for dx in 1..width {
                for dy in 1..height {
                    let q = Point {
                        j: (self.c1 + dx) % n,
                        i: (row_p + dy) % n,
                        s: cd.region_sheet(self.c1, row_p, s, dx, dy),
                    };
                    if z[cd.beta_index(q)] as usize == q.i {
                        return Ok(None);
                    }
                }
            }
            y[self.beta1(s)] = top as u8;
            y[kr] = row_p as u8;
            edges.push((true, cd.alpha_index(Point { j: self.c1, i: row_p, s })));
            edges.push((false, kr));
            edges.push((true, a1));
            edges.push((false, self.beta1(next)));
            loops.push((row_p, col_q));
        }
        let fz = self.formal(z);
        let fy = self.formal(&y);
        let e = 4 * m;
        let f = &self.frame;
        let a_of = |k: usize| edges[(e - (2 * k) % e) % e];
        let b_of = |k: usize| edges[(2 * e - 2 * k - 1) % e];
        let o_of = |k: usize| {
            let idx = (e - (2 * k) % e) % e;
            let or = f.alpha_or[edges[idx].1];
            if idx.is_multiple_of(4) {
                or
            } else {
                -or
            }
        };
        let mut signs = Vec::with_capacity(2 * m);
        for k in 0..2 * m {
            let mut g = fz.clone();
            let mut prod: i8 = if m % 2 == 1 { 1 } else { -1 };
            for i in 1..2 * m {
                let r = FormalRect {
                    s: f.alpha_slot[a_of(k).1],
                    n: f.alpha_slot[a_of((k + i) % (2 * m)).1],
                    w: f.beta_slot[b_of((k + i - 1) % (2 * m)).1],
                    e: f.beta_slot[b_of((k + i) % (2 * m)).1],
                    o_s: o_of(k),
                };
                if g.sigma[r.s] != r.w || g.sigma[r.n] != r.e {
                    return Err(Error::Internal("finger move does not start at its corners".into()));
                }
                let eps_n = fy.eps[r.n];
                let eps_s = g.eps[r.s] * g.eps[r.n] * eps_n;
                let next = r.target(&g, eps_s, eps_n);
                prod *= self.spinors.rect_sign(&g, &next, &r)?;
                g = next;
            }
            if g != fy {
                return Err(Error::Internal("finger move does not end at the target".into()));
            }
            signs.push(prod);
        }
        Ok(Some(FourMGon { to: y.into_boxed_slice(), loops, edge_signs: signs }))
    }

    /// Type R domains from `x`: hexagons in increasing grid order, each with
    /// a corner other than `w`, followed by a 4m-gon.
    pub fn type_r(&self, x: &[u8]) -> Result<Vec<(Generator, i8, Vec<usize>, FourMGon)>> {
        let mut out = Vec::new();
        self.type_r_from(x, 0, 1, &mut Vec::new(), &mut out)?;
        Ok(out)
    }

    fn type_r_from(
        &self,
        z: &[u8],
        grid: usize,
        sign: i8,
        hex: &mut Vec<usize>,
        out: &mut Vec<(Generator, i8, Vec<usize>, FourMGon)>,
    ) -> Result<()> {
        if grid == self.m {
            if let Some(theta) = self.four_m_gon(z)? {
                out.push((theta.to.clone(), sign * theta.sign(), hex.clone(), theta));
            }
            return Ok(());
        }
        self.type_r_from(z, grid + 1, sign, hex, out)?;
        for corner in (0..self.nh()).filter(|&r| r != self.rho + 1) {
            if let Some((y, t)) = self.hexagon(z, grid, corner)? {
                hex.push(grid);
                self.type_r_from(&y, grid + 1, sign * t, hex, out)?;
                hex.pop();
            }
        }
        Ok(())
    }

    /// Signs of the edges of `G`, read off the corresponding formal
    /// rectangles of `H`.
    pub fn g_signs(&self) -> Result<Vec<i8>> {
        let (cg, ch) = (&self.cg.cover, &self.ch.cover);
        let lifted: Vec<Generator> = self.cg.gens.iter().map(|x| self.psi_inverse(x)).collect::<Result<_>>()?;
        let f = &self.frame;
        self.cg
            .edges
            .par_iter()
            .map(|e| {
                let d = self.cg.domain(e);
                let sw = self.point_to_h(d.sw);
                let ne = self.point_to_h(d.ne);
                let a_s = ch.alpha_index(sw);
                let r = FormalRect {
                    s: f.alpha_slot[a_s],
                    n: f.alpha_slot[ch.alpha_index(ne)],
                    w: f.beta_slot[ch.beta_index(sw)],
                    e: f.beta_slot[ch.beta_index(ne)],
                    o_s: f.alpha_or[a_s],
                };
                debug_assert_eq!(cg.beta_index(d.sw), e.sw as usize);
                self.sign_of(&lifted[e.from as usize], &lifted[e.to as usize], &r)
            })
            .collect()
    }
}

/// Matrix entries `(target, source, coefficient)` with zeros dropped.
pub type Entries = Vec<(usize, usize, i64)>;

fn collect(map: HashMap<(usize, usize), i64>) -> Entries {
    let mut v: Entries = map.into_iter().filter(|&(_, c)| c != 0).map(|((t, s), c)| (t, s, c)).collect();
    v.sort_unstable();
    v
}

/// `a * b` for matrices given as entries.
fn compose(a: &[(usize, usize, i64)], b: &[(usize, usize, i64)]) -> Entries {
    let mut by_row: HashMap<usize, Vec<(usize, i64)>> = HashMap::new();
    for &(t, s, c) in a {
        by_row.entry(s).or_default().push((t, c));
    }
    let mut out: HashMap<(usize, usize), i64> = HashMap::new();
    for &(mid, s, c) in b {
        if let Some(v) = by_row.get(&mid) {
            for &(t, c2) in v {
                *out.entry((t, s)).or_default() += c * c2;
            }
        }
    }
    collect(out)
}

fn signed(entries: &[(u32, u32, i64)]) -> Entries {
    let mut m: HashMap<(usize, usize), i64> = HashMap::new();
    for &(f, t, c) in entries {
        *m.entry((t as usize, f as usize)).or_default() += c;
    }
    collect(m)
}

/// The stabilization map, split into its two components.
#[derive(Debug, Clone, Default)]
pub struct StabMap {
    pub left: Entries,
    pub right: Entries,
    pub contributions: Vec<Contribution>,
}

/// Outcome of all checks, with counts.
#[derive(Debug, Clone, Default)]
pub struct StabReport {
    pub m: usize,
    pub x2_right: bool,
    pub g_generators: usize,
    pub h_generators: usize,
    pub tags: BTreeMap<String, usize>,
    pub punctured: usize,
    pub punctured_complement: bool,
    pub punctured_annulus: bool,
    pub hexagons: usize,
    pub four_m_gons: usize,
    pub four_m_gon_edge_independent: bool,
    pub jj_unique_four_m_gon: bool,
    pub type_l: usize,
    pub type_r: usize,
    pub order_independent: bool,
    pub simple_case_shapes: bool,
    pub type2_rectangles: usize,
    pub g_d_squared: bool,
    pub chain_map: bool,
    pub chain_map_failures: usize,
    pub left_shift: Option<Rational>,
    pub right_shift: Option<Rational>,
    pub alexander_homogeneous: bool,
    pub cone_acyclic: bool,
    pub q_consistent: bool,
    pub cq_free_on_special: bool,
    pub regular_have_rectangles: bool,
}

impl StabReport {
    pub fn lines(&self) -> Vec<(String, bool)> {
        let sh = |s: &Option<Rational>| s.map(|q| format_rational(&q)).unwrap_or_else(|| "-".into());
        let tags: Vec<String> = self.tags.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        vec![
            (format!("tags [{}] sum to {}", tags.join(" "), self.h_generators), self.tags.values().sum::<usize>() == self.h_generators),
            (format!("punctured rectangles: {}, complement sign -1", self.punctured), self.punctured_complement),
            ("punctured rectangle and complement cover the column once".into(), self.punctured_annulus),
            (format!("4m-gons: {}, sign independent of the edge", self.four_m_gons), self.four_m_gon_edge_independent),
            ("every (J..J) generator has exactly one 4m-gon".into(), self.jj_unique_four_m_gon),
            (format!("type L: {}, type R: {}, hexagons: {}, sign independent of order", self.type_l, self.type_r, self.hexagons), self.order_independent),
            (format!("X2 {} of O1: shape restrictions", if self.x2_right { "right" } else { "left" }), self.simple_case_shapes),
            (format!("G signs from H give d^2 = 0 ({} type 2 rectangles)", self.type2_rectangles), self.g_d_squared),
            (format!("chain map ({} failing entries)", self.chain_map_failures), self.chain_map),
            (format!("Alexander shifts: left {}, right {}", sh(&self.left_shift), sh(&self.right_shift)), self.alexander_homogeneous),
            ("mapping cone is acyclic".into(), self.cone_acyclic),
            ("Q function consistent".into(), self.q_consistent),
            ("H(C_Q) free on (I..I) and (J..J) generators".into(), self.cq_free_on_special),
            ("every regular generator has a done or undone rectangle".into(), self.regular_have_rectangles),
        ]
    }

    pub fn holds(&self) -> bool {
        self.lines().iter().all(|(_, ok)| *ok)
    }
}

impl Stabilization {
    /// Builds the map from the complex of `H` to two copies of that of `G`.
    pub fn build_map(&self) -> Result<StabMap> {
        let per: Vec<Result<Vec<Contribution>>> = (0..self.ch.len())
            .into_par_iter()
            .map(|xi| {
                let x = &self.ch.gens[xi];
                let mut v = Vec::new();
                if let Some((y, s)) = self.type_l(x)? {
                    v.push(Contribution { from: xi, to: y, sign: s, hexagons: self.missing_w(x), four_m_gon: false });
                }
                for (y, s, hex, _) in self.type_r(x)? {
                    v.push(Contribution { from: xi, to: y, sign: s, hexagons: hex, four_m_gon: true });
                }
                Ok(v)
            })
            .collect();
        let mut left = HashMap::new();
        let mut right = HashMap::new();
        let mut contributions = Vec::new();
        for r in per {
            for c in r? {
                let g = self.psi(&c.to).ok_or_else(|| Error::Internal("domain target lacks some w".into()))?;
                let gi = self.cg.index_of(&g).ok_or_else(|| Error::Internal("identified generator missing".into()))?;
                let map = if c.four_m_gon { &mut right } else { &mut left };
                *map.entry((gi, c.from)).or_insert(0i64) += c.sign as i64;
                contributions.push(c);
            }
        }
        Ok(StabMap { left: collect(left), right: collect(right), contributions })
    }

    /// `Q` up to a constant on each component of the graph of rectangles
    /// and 4m-gons; `Err` if the defining relation fails on a cycle.
    pub fn q_function(&self) -> Result<Vec<i64>> {
        let n = self.nh();
        let cd = &self.ch.cover;
        let weight = |cells: &mut dyn Iterator<Item = (usize, usize)>| -> i64 {
            cells.filter(|&(c, r)| c != self.c1 && r != self.rho + 1).count() as i64
        };
        let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); self.ch.len()];
        for e in &self.ch.edges {
            let d = self.ch.domain(e);
            let q = weight(&mut d.support.iter().map(|&id| {
                let (_, c, r) = cd.cell_from_id(id);
                (c, r)
            }));
            adj[e.from as usize].push((e.to as usize, -q));
            adj[e.to as usize].push((e.from as usize, q));
        }
        for (zi, z) in self.ch.gens.iter().enumerate() {
            if let Some(t) = self.four_m_gon(z)? {
                let mut q = 0;
                for &(row_p, col_q) in &t.loops {
                    let w = (col_q + n - self.c1) % n;
                    let h = (self.rho + 1 + n - row_p) % n;
                    q += weight(&mut (0..w).flat_map(|dx| (0..h).map(move |dy| ((self.c1 + dx) % n, (row_p + dy) % n))));
                }
                let yi = self.ch.index_of(&t.to).ok_or_else(|| Error::Internal("4m-gon target missing".into()))?;
                adj[zi].push((yi, -q));
                adj[yi].push((zi, q));
            }
        }
        let mut val: Vec<Option<i64>> = vec![None; self.ch.len()];
        for start in 0..self.ch.len() {
            if val[start].is_some() {
                continue;
            }
            val[start] = Some(0);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                let vu = val[u].unwrap();
                for &(v, d) in &adj[u] {
                    match val[v] {
                        None => {
                            val[v] = Some(vu + d);
                            queue.push_back(v);
                        }
                        Some(vv) if vv != vu + d => {
                            return Err(Error::QInconsistent(format!("generators {u} and {v}")));
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(val.into_iter().map(Option::unwrap).collect())
    }

    fn is_special(&self, t: &[Tag]) -> bool {
        t.iter().all(|&x| x == Tag::I) || t.iter().all(|&x| x == Tag::J)
    }

    /// Runs every check and reports counts.
    pub fn verify(&self) -> Result<StabReport> {
        let m = self.m;
        let n = self.nh();
        let mut rep = StabReport {
            m,
            x2_right: self.x2_right,
            g_generators: self.cg.len(),
            h_generators: self.ch.len(),
            ..Default::default()
        };
        check_d_squared(&self.ch, &self.h_signs)?;
        let tags: Vec<TypeTag> = self.ch.gens.iter().map(|x| self.classify(x)).collect();
        for t in &tags {
            *rep.tags.entry(tag_string(t)).or_default() += 1;
        }

        // punctured rectangles and their complements
        rep.punctured_complement = true;
        rep.punctured_annulus = true;
        for x in &self.ch.gens {
            for k in 0..m {
                if let Some(a) = self.punctured(x, k)? {
                    rep.punctured += 1;
                    let (r, s) = self.complement(&a)?;
                    rep.punctured_complement &= a.sign * s == -1;
                    let h = (a.top + n - a.bottom) % n;
                    let mut cells: Vec<u32> = (0..h).map(|d| self.ch.cover.cell_id(k, self.c1, a.bottom + d)).collect();
                    cells.extend(self.ch.domain(&r).support);
                    cells.sort_unstable();
                    let column: Vec<u32> = (0..n).map(|r| self.ch.cover.cell_id(k, self.c1, r)).collect::<Vec<_>>();
                    let mut column = column;
                    column.sort_unstable();
                    rep.punctured_annulus &= cells == column;
                }
            }
        }

        // 4m-gons
        rep.four_m_gon_edge_independent = true;
        rep.jj_unique_four_m_gon = true;
        for (x, t) in self.ch.gens.iter().zip(&tags) {
            let theta = self.four_m_gon(x)?;
            if let Some(th) = &theta {
                rep.four_m_gons += 1;
                rep.four_m_gon_edge_independent &= th.edge_independent();
            }
            if t.iter().all(|&x| x == Tag::J) {
                rep.jj_unique_four_m_gon &= theta.is_some();
            }
        }

        // type L and R, order independence
        let map = self.build_map()?;
        rep.order_independent = true;
        rep.simple_case_shapes = true;
        for c in &map.contributions {
            if c.four_m_gon {
                rep.type_r += 1;
            } else {
                rep.type_l += 1;
            }
            rep.hexagons += c.hexagons.len();
            if !self.x2_right && !c.hexagons.is_empty() {
                rep.simple_case_shapes = false;
            }
            if !c.four_m_gon && c.hexagons.len() > 1 {
                let x = &self.ch.gens[c.from];
                for order in permutations(&c.hexagons) {
                    if let Some((y, s)) = self.type_l_ordered(x, &order)? {
                        rep.order_independent &= y == c.to && s == c.sign;
                    }
                }
            }
        }

        // signs of G and the chain map identity
        let g_signs = self.g_signs()?;
        rep.g_d_squared = check_d_squared(&self.cg, &g_signs).is_ok();
        let merged = ((self.c1 + n - 1) % n, self.rho);
        rep.type2_rectangles = self
            .cg
            .edges
            .iter()
            .filter(|e| {
                self.cg.domain(e).support.iter().any(|&id| {
                    let (_, c, r) = self.cg.cover.cell_from_id(id);
                    (self.col_to_h(c), self.row_to_h(r)) == merged
                })
            })
            .count();
        let dg = signed(&signed_boundary(&self.cg, &g_signs));
        let dh = signed(&signed_boundary(&self.ch, &self.h_signs));
        let (fl, fr) = self.chain_map_defects(&dg, &dh, &map);
        let failures = fl.len() + fr.len();
        rep.chain_map_failures = failures;
        rep.chain_map = failures == 0;

        // Alexander shifts
        let shift = |e: &Entries| -> (Option<Rational>, bool) {
            let mut it = e.iter().map(|&(g, h, _)| self.cg.alexander[g] - self.ch.alexander[h]);
            match it.next() {
                None => (None, true),
                Some(s) => {
                    let ok = it.all(|t| t == s);
                    (Some(s), ok)
                }
            }
        };
        let (ls, lok) = shift(&map.left);
        let (rs, rok) = shift(&map.right);
        rep.left_shift = ls;
        rep.right_shift = rs;
        rep.alexander_homogeneous = lok && rok;

        rep.cone_acyclic = rep.chain_map && rep.alexander_homogeneous && self.cone_acyclic(&dg, &dh, &map, ls, rs);

        // Q filtration
        let q = self.q_function();
        rep.q_consistent = q.is_ok();
        let (free, regular) = self.cq_checks(&tags);
        rep.cq_free_on_special = free;
        rep.regular_have_rectangles = regular;
        Ok(rep)
    }

    /// Nonzero entries of `d_G F_L - F_L d_H` and `d_G F_R + F_R d_H`, as
    /// `(G generator, H generator, value)`.
    pub fn chain_map_defects(&self, dg: &Entries, dh: &Entries, map: &StabMap) -> (Entries, Entries) {
        let l = defects(&compose(dg, &map.left), &compose(&map.left, dh), 1);
        let r = defects(&compose(dg, &map.right), &compose(&map.right, dh), -1);
        (l, r)
    }

    /// Signed differentials of `G` and `H` as matrix entries.
    pub fn differentials(&self) -> Result<(Entries, Entries)> {
        let g_signs = self.g_signs()?;
        Ok((signed(&signed_boundary(&self.cg, &g_signs)), signed(&signed_boundary(&self.ch, &self.h_signs))))
    }

    fn cone_acyclic(&self, dg: &Entries, dh: &Entries, map: &StabMap, ls: Option<Rational>, rs: Option<Rational>) -> bool {
        let (nh, ng) = (self.ch.len(), self.cg.len());
        // cone generators: H, then the right copy of G, then the left copy
        let mut key: Vec<Rational> = self.ch.alexander.clone();
        let rs = rs.unwrap_or_default();
        let ls = ls.unwrap_or_default();
        key.extend(self.cg.alexander.iter().map(|a| a - rs));
        key.extend(self.cg.alexander.iter().map(|a| a - ls));
        let mut entries: Entries = Vec::new();
        entries.extend(dh.iter().map(|&(t, s, c)| (t, s, -c)));
        entries.extend(map.right.iter().map(|&(g, h, c)| (nh + g, h, c)));
        entries.extend(map.left.iter().map(|&(g, h, c)| (nh + ng + g, h, c)));
        entries.extend(dg.iter().map(|&(t, s, c)| (nh + t, nh + s, -c)));
        entries.extend(dg.iter().map(|&(t, s, c)| (nh + ng + t, nh + ng + s, c)));
        let mut groups: BTreeMap<Rational, Vec<usize>> = BTreeMap::new();
        for (i, k) in key.iter().enumerate() {
            groups.entry(*k).or_default().push(i);
        }
        let mut local = vec![0usize; key.len()];
        for members in groups.values() {
            for (li, &g) in members.iter().enumerate() {
                local[g] = li;
            }
        }
        let mut per: BTreeMap<Rational, Vec<(usize, usize, i64)>> = BTreeMap::new();
        for &(t, s, c) in &entries {
            if key[t] != key[s] {
                return false;
            }
            per.entry(key[t]).or_default().push((local[t], local[s], c));
        }
        groups.iter().all(|(k, members)| {
            let d = members.len();
            let trip = per.remove(k).unwrap_or_default();
            let mat = SparseMatrix::from_triples(d, d, &trip);
            let snf = smith_normal_form(&mat, PivotStrategy::Sparse);
            2 * snf.rank == d && snf.torsion().is_empty()
        })
    }

    /// Homology of the associated graded complex, and the regular-generator
    /// condition.
    fn cq_checks(&self, tags: &[TypeTag]) -> (bool, bool) {
        let cd = &self.ch.cover;
        let avoids_q = |e: &Rect| {
            self.ch.domain(e).support.iter().all(|&id| {
                let (_, c, r) = cd.cell_from_id(id);
                c == self.c1 || r == self.rho + 1
            })
        };
        let mut degree = vec![0usize; self.ch.len()];
        let mut kept = Vec::new();
        for (idx, e) in self.ch.edges.iter().enumerate() {
            if avoids_q(e) {
                degree[e.from as usize] += 1;
                degree[e.to as usize] += 1;
                kept.push((e.from, e.to, self.h_signs[idx] as i64));
            }
        }
        let regular_ok = tags.iter().zip(&degree).all(|(t, &d)| self.is_special(t) || d > 0);
        let hom = crate::homology::homology(&self.ch, &kept, crate::homology::Coeff::Z);
        let mut special: BTreeMap<Rational, usize> = BTreeMap::new();
        for (g, t) in tags.iter().enumerate() {
            if self.is_special(t) {
                *special.entry(self.ch.alexander[g]).or_default() += 1;
            }
        }
        let free = hom.blocks.iter().all(|b| b.torsion.is_empty() && b.rank == special.get(&b.alexander).copied().unwrap_or(0));
        (free, regular_ok)
    }
}

/// Entries where `a - sign * b` is nonzero.
fn defects(a: &[(usize, usize, i64)], b: &[(usize, usize, i64)], sign: i64) -> Entries {
    let mut m: HashMap<(usize, usize), i64> = HashMap::new();
    for &(t, s, c) in a {
        *m.entry((t, s)).or_default() += c;
    }
    for &(t, s, c) in b {
        *m.entry((t, s)).or_default() -= sign * c;
    }
    collect(m)
}

fn permutations(v: &[usize]) -> Vec<Vec<usize>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Sign of an edge of `H` recomputed from its formal rectangle.
pub fn h_edge_sign(st: &Stabilization, e: &Rect) -> Result<i8> {
    let r = formal_rect_of_edge(&st.ch, &st.frame, e);
    st.sign_of(&st.ch.gens[e.from as usize], &st.ch.gens[e.to as usize], &r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknot_to_three_by_three() {
        for row in 0..2 {
            let st = Stabilization::new(&GridDiagram::unknot2(), 2, row, Marking::X).unwrap();
            let rep = st.verify().unwrap();
            for (line, ok) in rep.lines() {
                assert!(ok, "row {row}: {line}");
            }
        }
    }

    #[test]
    fn psi_round_trip() {
        let st = Stabilization::new(&GridDiagram::unknot2(), 2, 1, Marking::X).unwrap();
        for x in &st.cg.gens {
            let y = st.psi_inverse(x).unwrap();
            assert!(st.ch.index_of(&y).is_some());
            assert_eq!(st.psi(&y).unwrap(), *x);
        }
    }
}
