//! The m-sheeted branched cover of a grid diagram.
//!
//! Each sheet is a copy of the grid torus. With vertical cuts, column `c` has
//! a cut between its two markings; moving east across it on row line `i`
//! shifts the sheet by `[O[c] < i] - [X[c] < i]`. Horizontal cuts are the
//! mirror image: moving north across row `rho` on column line `j` shifts the
//! sheet by `[X^{-1}(rho) < j] - [O^{-1}(rho) < j]`.
//!
//! Lifted curves are labelled by sheet: with vertical cuts `beta_j^b` lies in
//! sheet `b` and `alpha_i^a` is labelled by its sheet at column line 0; with
//! horizontal cuts the roles swap. A cell takes the sheet of its south-west
//! corner.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDiagram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cuts {
    Vertical,
    Horizontal,
}

/// A lattice point of the cover: column line, row line, geometric sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub j: usize,
    pub i: usize,
    pub s: usize,
}

#[derive(Debug, Clone)]
pub struct CoverDiagram {
    pub base: GridDiagram,
    pub m: usize,
    pub cuts: Cuts,
    /// Gluing sign per cut column (vertical) or cut row (horizontal).
    pub dir: Vec<i8>,
    /// Rows (resp. columns) strictly between the markings are `lo+1..=hi`.
    pub cut_span: Vec<(usize, usize)>,
    n: usize,
    /// `step[c * n + l]`: shift when crossing cut `c` on line `l`.
    step: Vec<i8>,
    /// `prefix[l * (n + 1) + t]`: total shift crossing cuts `0..t` on line `l`.
    prefix: Vec<i64>,
    marked: Vec<bool>,
}

impl CoverDiagram {
    pub fn new(base: &GridDiagram, m: usize, cuts: Cuts) -> Result<Self> {
        base.validate()?;
        if m == 0 {
            return Err(Error::Unsupported("m must be at least 1".into()));
        }
        let n = base.n;
        let (xi, oi) = (base.x_inv(), base.o_inv());
        let mut step = vec![0i8; n * n];
        let mut dir = vec![0i8; n];
        let mut cut_span = vec![(0, 0); n];
        for c in 0..n {
            // (position of X, position of O) along the cut
            let (px, po) = match cuts {
                Cuts::Vertical => (base.x[c], base.o[c]),
                Cuts::Horizontal => (xi[c], oi[c]),
            };
            cut_span[c] = (px.min(po), px.max(po));
            dir[c] = match cuts {
                Cuts::Vertical => if px > po { 1 } else { -1 },
                Cuts::Horizontal => if px < po { 1 } else { -1 },
            };
            for l in 0..n {
                let v = match cuts {
                    Cuts::Vertical => (po < l) as i8 - (px < l) as i8,
                    Cuts::Horizontal => (px < l) as i8 - (po < l) as i8,
                };
                step[c * n + l] = v;
            }
        }
        let mut prefix = vec![0i64; n * (n + 1)];
        for l in 0..n {
            for t in 0..n {
                prefix[l * (n + 1) + t + 1] = prefix[l * (n + 1) + t] + step[t * n + l] as i64;
            }
            if prefix[l * (n + 1) + n] != 0 {
                return Err(Error::Internal(format!("line {l} does not close up")));
            }
        }
        let mut marked = vec![false; n * n];
        for c in 0..n {
            marked[c * n + base.x[c]] = true;
            marked[c * n + base.o[c]] = true;
        }
        Ok(CoverDiagram { base: base.clone(), m, cuts, dir, cut_span, n, step, prefix, marked })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn md(&self, v: i64) -> usize {
        v.rem_euclid(self.m as i64) as usize
    }

    #[inline]
    pub fn is_marked(&self, c: usize, r: usize) -> bool {
        self.marked[(c % self.n) * self.n + r % self.n]
    }

    /// Sheet shift crossing column `c` eastward on row line `i`.
    #[inline]
    pub fn east_step(&self, i: usize, c: usize) -> i64 {
        match self.cuts {
            Cuts::Vertical => self.step[(c % self.n) * self.n + i % self.n] as i64,
            Cuts::Horizontal => 0,
        }
    }

    /// Sheet shift crossing row `rho` northward on column line `j`.
    #[inline]
    pub fn north_step(&self, j: usize, rho: usize) -> i64 {
        match self.cuts {
            Cuts::Vertical => 0,
            Cuts::Horizontal => self.step[(rho % self.n) * self.n + j % self.n] as i64,
        }
    }

    /// Sheet after walking `w` columns east from column line `j1` on row `i`.
    pub fn sheet_walk(&self, i: usize, j1: usize, w: usize, s: usize) -> usize {
        let d: i64 = (0..w).map(|t| self.east_step(i, j1 + t)).sum();
        self.md(s as i64 + d)
    }

    /// Sheet after walking `h` rows north from row line `i1` on column `j`.
    pub fn north_walk(&self, j: usize, i1: usize, h: usize, s: usize) -> usize {
        let d: i64 = (0..h).map(|t| self.north_step(j, i1 + t)).sum();
        self.md(s as i64 + d)
    }

    #[inline]
    fn east_prefix(&self, i: usize, j: usize) -> i64 {
        match self.cuts {
            Cuts::Vertical => self.prefix[(i % self.n) * (self.n + 1) + j],
            Cuts::Horizontal => 0,
        }
    }

    #[inline]
    fn north_prefix(&self, j: usize, i: usize) -> i64 {
        match self.cuts {
            Cuts::Vertical => 0,
            Cuts::Horizontal => self.prefix[(j % self.n) * (self.n + 1) + i],
        }
    }

    /// Geometric sheet of the lift `alpha_i^a` at column line `j < n`.
    #[inline]
    pub fn alpha_sheet(&self, i: usize, a: usize, j: usize) -> usize {
        self.md(a as i64 + self.east_prefix(i, j))
    }

    /// Geometric sheet of the lift `beta_j^b` at row line `i < n`.
    #[inline]
    pub fn beta_sheet(&self, j: usize, b: usize, i: usize) -> usize {
        self.md(b as i64 + self.north_prefix(j, i))
    }

    /// Label of the alpha lift through the point `(j, i)` in sheet `s`.
    #[inline]
    pub fn alpha_label(&self, i: usize, j: usize, s: usize) -> usize {
        self.md(s as i64 - self.east_prefix(i, j))
    }

    /// Label of the beta lift through the point `(j, i)` in sheet `s`.
    #[inline]
    pub fn beta_label(&self, j: usize, i: usize, s: usize) -> usize {
        self.md(s as i64 - self.north_prefix(j, i))
    }

    /// Whether `alpha_i^a` meets `beta_j^b`, by walking along the curves.
    pub fn incidence(&self, i: usize, a: usize, j: usize, b: usize) -> bool {
        match self.cuts {
            Cuts::Vertical => self.sheet_walk(i, 0, j, a) == b,
            Cuts::Horizontal => self.north_walk(j, 0, i, b) == a,
        }
    }

    /// Closed-form incidence: `b - a = O(r) - X(r) (mod m)` with `r` the
    /// rectangle `[0, j] x [0, i]`.
    pub fn incidence_formula(&self, i: usize, a: usize, j: usize, b: usize) -> bool {
        let g = &self.base;
        let o_r = (0..j).filter(|&c| g.o[c] < i).count() as i64;
        let x_r = (0..j).filter(|&c| g.x[c] < i).count() as i64;
        self.md(b as i64 - a as i64) == self.md(o_r - x_r)
    }

    /// Sheet at offset `(dx, dy)` inside a marking-free region whose
    /// south-west corner is `(j0, i0)` in sheet `s0`.
    #[inline]
    pub fn region_sheet(&self, j0: usize, i0: usize, s0: usize, dx: usize, dy: usize) -> usize {
        let mut d = 0i64;
        for t in 0..dx {
            d += self.east_step(i0, j0 + t);
        }
        for t in 0..dy {
            d += self.north_step(j0 + dx, i0 + t);
        }
        self.md(s0 as i64 + d)
    }

    /// Index of a lattice point for occupancy tables.
    #[inline]
    pub fn point_id(&self, p: Point) -> usize {
        (p.s * self.n + p.j) * self.n + p.i
    }

    #[inline]
    pub fn cell_id(&self, s: usize, c: usize, r: usize) -> u32 {
        ((s * self.n + c % self.n) * self.n + r % self.n) as u32
    }

    pub fn cell_from_id(&self, id: u32) -> (usize, usize, usize) {
        let id = id as usize;
        let n = self.n;
        (id / (n * n), (id / n) % n, id % n)
    }

    /// Number of lifted beta curves, `m n`.
    #[inline]
    pub fn lifts(&self) -> usize {
        self.m * self.n
    }

    /// Point of a generator on the beta lift `k = b n + j` at row `i`.
    #[inline]
    pub fn beta_point(&self, k: usize, i: usize) -> Point {
        let (b, j) = (k / self.n, k % self.n);
        Point { j, i, s: self.beta_sheet(j, b, i) }
    }

    /// Index `a n + i` of the alpha lift through a point.
    #[inline]
    pub fn alpha_index(&self, p: Point) -> usize {
        self.alpha_label(p.i, p.j, p.s) * self.n + p.i
    }

    /// Index `b n + j` of the beta lift through a point.
    #[inline]
    pub fn beta_index(&self, p: Point) -> usize {
        self.beta_label(p.j, p.i, p.s) * self.n + p.j
    }

    /// Incidence matrix between alpha lifts (rows, index `a n + i`) and beta
    /// lifts (columns, index `b n + j`).
    pub fn incidence_matrix(&self) -> Vec<Vec<bool>> {
        let (n, m) = (self.n, self.m);
        let mut mat = vec![vec![false; m * n]; m * n];
        for a in 0..m {
            for i in 0..n {
                for b in 0..m {
                    for j in 0..n {
                        mat[a * n + i][b * n + j] = self.incidence(i, a, j, b);
                    }
                }
            }
        }
        mat
    }
}

/// Checks that a vertical and a horizontal cover of the same grid have the
/// same incidence between labelled lifts, so generators correspond
/// one-to-one by their stored row assignments.
pub fn vh_correspondence(cv: &CoverDiagram, ch: &CoverDiagram) -> Result<()> {
    if cv.base != ch.base || cv.m != ch.m {
        return Err(Error::Unsupported("covers of different diagrams".into()));
    }
    let (n, m) = (cv.n, cv.m);
    for i in 0..n {
        for a in 0..m {
            for j in 0..n {
                for b in 0..m {
                    if cv.incidence(i, a, j, b) != ch.incidence(i, a, j, b) {
                        return Err(Error::IncidenceMismatch { i, a, j, b });
                    }
                }
            }
        }
    }
    Ok(())
}
