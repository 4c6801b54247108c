//! Grid diagrams on the torus.
//!
//! Columns run left to right, rows bottom to top, both 0-based. `x[c]` is the
//! row of the X marking in column `c`, likewise `o[c]`. The vertical circle
//! `beta_j` sits at `x = j`, the horizontal circle `alpha_i` at `y = i`, and
//! markings sit at cell centres.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rows,
    Columns,
}

/// Which marking moves during a stabilization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Marking {
    X,
    O,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridDiagram {
    pub n: usize,
    #[serde(rename = "X")]
    pub x: Vec<usize>,
    #[serde(rename = "O")]
    pub o: Vec<usize>,
}

/// A point with coordinates stored doubled, so cell centres are integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfPoint {
    pub x2: i64,
    pub y2: i64,
}

impl HalfPoint {
    pub fn lattice(j: usize, i: usize) -> Self {
        HalfPoint { x2: 2 * j as i64, y2: 2 * i as i64 }
    }

    pub fn centre(c: usize, r: usize) -> Self {
        HalfPoint { x2: 2 * c as i64 + 1, y2: 2 * r as i64 + 1 }
    }
}

/// Weighted formal sum of points. Repeated points are merged and zero
/// weights dropped on insertion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PointWeightSet {
    items: Vec<(HalfPoint, i64)>,
}

impl PointWeightSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, p: HalfPoint, w: i64) {
        if let Some(pos) = self.items.iter().position(|(q, _)| *q == p) {
            self.items[pos].1 += w;
            if self.items[pos].1 == 0 {
                self.items.swap_remove(pos);
            }
        } else if w != 0 {
            self.items.push((p, w));
        }
    }

    pub fn with(mut self, p: HalfPoint, w: i64) -> Self {
        self.add(p, w);
        self
    }

    pub fn extend_from(&mut self, other: &PointWeightSet, scale: i64) {
        for &(p, w) in &other.items {
            self.add(p, w * scale);
        }
    }

    pub fn items(&self) -> &[(HalfPoint, i64)] {
        &self.items
    }
}

/// Weighted count of pairs `(a, b)` with `b` strictly north-east or strictly
/// south-west of `a`.
pub fn count_j(a: &PointWeightSet, b: &PointWeightSet) -> i64 {
    let mut total = 0;
    for &(p, wp) in &a.items {
        for &(q, wq) in &b.items {
            if (q.x2 - p.x2) * (q.y2 - p.y2) > 0 {
                total += wp * wq;
            }
        }
    }
    total
}

impl GridDiagram {
    /// Builds and validates a diagram.
    pub fn new(x: Vec<usize>, o: Vec<usize>) -> Result<Self> {
        let g = GridDiagram { n: x.len(), x, o };
        g.validate()?;
        Ok(g)
    }

    pub fn unknot2() -> Self {
        GridDiagram { n: 2, x: vec![1, 0], o: vec![0, 1] }
    }

    /// The 5x5 trefoil with `X[c] = c + 2 mod 5`, `O[c] = c`.
    pub fn trefoil5() -> Self {
        GridDiagram { n: 5, x: (0..5).map(|c| (c + 2) % 5).collect(), o: (0..5).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || self.x.len() != n || self.o.len() != n {
            return Err(Error::NotPermutation(format!(
                "expected arrays of length n={n}, got {} and {}",
                self.x.len(),
                self.o.len()
            )));
        }
        for (name, p) in [("X", &self.x), ("O", &self.o)] {
            let mut seen = vec![false; n];
            for &r in p {
                if r >= n || seen[r] {
                    return Err(Error::NotPermutation(format!("{name} = {p:?}")));
                }
                seen[r] = true;
            }
        }
        if let Some(c) = (0..n).find(|&c| self.x[c] == self.o[c]) {
            return Err(Error::SharedCell(c));
        }
        let xi = self.x_inv();
        let oi = self.o_inv();
        if let Some(r) = (0..n).find(|&r| xi[r] == oi[r]) {
            return Err(Error::RowClash(r));
        }
        let k = self.component_count();
        if k != 1 {
            return Err(Error::MultiComponentLink(k));
        }
        Ok(())
    }

    /// Number of cycles of the column map `c -> X^{-1}(O[c])`. Assumes both
    /// arrays are permutations.
    pub fn component_count(&self) -> usize {
        let xi = self.x_inv();
        let mut seen = vec![false; self.n];
        let mut count = 0;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut c = start;
            while !seen[c] {
                seen[c] = true;
                c = xi[self.o[c]];
            }
        }
        count
    }

    pub fn x_inv(&self) -> Vec<usize> {
        invert(&self.x)
    }

    pub fn o_inv(&self) -> Vec<usize> {
        invert(&self.o)
    }

    /// `X - O` as a weighted set of cell centres.
    pub fn x_minus_o(&self) -> PointWeightSet {
        let mut s = PointWeightSet::new();
        for c in 0..self.n {
            s.add(HalfPoint::centre(c, self.x[c]), 1);
            s.add(HalfPoint::centre(c, self.o[c]), -1);
        }
        s
    }

    /// `X + O` as a weighted set of cell centres.
    pub fn x_plus_o(&self) -> PointWeightSet {
        let mut s = PointWeightSet::new();
        for c in 0..self.n {
            s.add(HalfPoint::centre(c, self.x[c]), 1);
            s.add(HalfPoint::centre(c, self.o[c]), 1);
        }
        s
    }

    /// Alexander grading of a base generator; `perm[j]` is the row of the
    /// point on `beta_j`.
    pub fn alexander_base(&self, perm: &[usize]) -> Rational {
        let mut pts = PointWeightSet::new();
        for (j, &i) in perm.iter().enumerate() {
            pts.add(HalfPoint::lattice(j, i), 1);
        }
        alexander_from_points(self, &pts, 1)
    }

    pub fn apply_cyclic_permutation(&self, axis: Axis, shift: i64) -> GridDiagram {
        let n = self.n as i64;
        let s = shift.rem_euclid(n) as usize;
        let mut g = self.clone();
        match axis {
            Axis::Columns => {
                for c in 0..self.n {
                    g.x[(c + s) % self.n] = self.x[c];
                    g.o[(c + s) % self.n] = self.o[c];
                }
            }
            Axis::Rows => {
                for c in 0..self.n {
                    g.x[c] = (self.x[c] + s) % self.n;
                    g.o[c] = (self.o[c] + s) % self.n;
                }
            }
        }
        g
    }

    /// Checks that line `i` and line `i + 1 (mod n)` along `axis` can be
    /// swapped: their marking spans must be disjoint or nested.
    pub fn commutation_legal(&self, axis: Axis, i: usize) -> bool {
        let (p, q) = self.commutation_spans(axis, i);
        spans_commute(p, q)
    }

    fn commutation_spans(&self, axis: Axis, i: usize) -> ((usize, usize), (usize, usize)) {
        let j = (i + 1) % self.n;
        let span = |a: usize, b: usize| (a.min(b), a.max(b));
        match axis {
            Axis::Columns => (span(self.x[i], self.o[i]), span(self.x[j], self.o[j])),
            Axis::Rows => {
                let (xi, oi) = (self.x_inv(), self.o_inv());
                (span(xi[i], oi[i]), span(xi[j], oi[j]))
            }
        }
    }

    pub fn apply_commutation(&self, axis: Axis, i: usize) -> Result<GridDiagram> {
        if i >= self.n || self.n < 2 || !self.commutation_legal(axis, i) {
            return Err(Error::IllegalCommutation { axis, index: i });
        }
        let j = (i + 1) % self.n;
        let mut g = self.clone();
        match axis {
            Axis::Columns => {
                g.x.swap(i, j);
                g.o.swap(i, j);
            }
            Axis::Rows => {
                let swap = |r: usize| if r == i { j } else if r == j { i } else { r };
                for c in 0..self.n {
                    g.x[c] = swap(self.x[c]);
                    g.o[c] = swap(self.o[c]);
                }
            }
        }
        Ok(g)
    }

    /// Stabilizes at row `r`. A new column is inserted next to the moved
    /// marking, on the side of the other marking of row `r`, and a new row is
    /// inserted directly below `r`. The moved marking drops into the new row;
    /// the new column holds the moved type in old row `r` and the other type in
    /// the new row.
    pub fn apply_stabilization(&self, r: usize, moved: Marking) -> GridDiagram {
        let n = self.n;
        assert!(r < n, "row {r} out of range");
        let (xi, oi) = (self.x_inv(), self.o_inv());
        let (a, b) = match moved {
            Marking::X => (xi[r], oi[r]),
            Marking::O => (oi[r], xi[r]),
        };
        let cstar = if b > a { a + 1 } else { a };
        let col = |j: usize| if j >= cstar { j + 1 } else { j };
        let row = |rho: usize| if rho >= r { rho + 1 } else { rho };
        let mut x = vec![0; n + 1];
        let mut o = vec![0; n + 1];
        for j in 0..n {
            x[col(j)] = row(self.x[j]);
            o[col(j)] = row(self.o[j]);
        }
        let (mv, other) = match moved {
            Marking::X => (&mut x, &mut o),
            Marking::O => (&mut o, &mut x),
        };
        mv[col(a)] = r;
        mv[cstar] = r + 1;
        other[cstar] = r;
        GridDiagram { n: n + 1, x, o }
    }

    /// Column of the new column created by [`apply_stabilization`].
    pub fn stabilization_column(&self, r: usize, moved: Marking) -> usize {
        let (xi, oi) = (self.x_inv(), self.o_inv());
        let (a, b) = match moved {
            Marking::X => (xi[r], oi[r]),
            Marking::O => (oi[r], xi[r]),
        };
        if b > a {
            a + 1
        } else {
            a
        }
    }

    pub fn transpose(&self) -> GridDiagram {
        GridDiagram { n: self.n, x: self.x_inv(), o: self.o_inv() }
    }

    /// Rotation by a half turn: `(c, r) -> (n-1-c, n-1-r)`.
    pub fn rotate_half(&self) -> GridDiagram {
        let n = self.n;
        let f = |p: &Vec<usize>| (0..n).map(|c| n - 1 - p[n - 1 - c]).collect();
        GridDiagram { n, x: f(&self.x), o: f(&self.o) }
    }

    pub fn swap_markings(&self) -> GridDiagram {
        GridDiagram { n: self.n, x: self.o.clone(), o: self.x.clone() }
    }
}

fn spans_commute(p: (usize, usize), q: (usize, usize)) -> bool {
    let disjoint = p.1 < q.0 || q.1 < p.0;
    let nested = (p.0 < q.0 && q.1 < p.1) || (q.0 < p.0 && p.1 < q.1);
    disjoint || nested
}

pub(crate) fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![usize::MAX; p.len()];
    for (i, &v) in p.iter().enumerate() {
        if v < inv.len() {
            inv[v] = i;
        }
    }
    inv
}

/// `(1/2m) J(P - (m/2)(X+O), X-O) - (n-1)/2` for a projected multiset `P`
/// carrying total weight `m n`.
pub(crate) fn alexander_from_points(g: &GridDiagram, pts: &PointWeightSet, m: usize) -> Rational {
    let m = m as i64;
    let mut a = PointWeightSet::new();
    a.extend_from(pts, 2);
    a.extend_from(&g.x_plus_o(), -m);
    let j = count_j(&a, &g.x_minus_o());
    Rational::new(j, 4 * m) - Rational::new(g.n as i64 - 1, 2)
}

pub fn format_rational(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Rational::new(p.trim().parse().map_err(|_| bad())?, q))
        }
        None => Ok(Rational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

impl fmt::Display for GridDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(f, "{}", self.n)?;
        writeln!(f, "X: {}", join(&self.x))?;
        writeln!(f, "O: {}", join(&self.o))
    }
}

impl FromStr for GridDiagram {
    type Err = Error;

    /// Parses the text form `n`, `X: ...`, `O: ...` and validates it.
    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))?
            .parse()
            .map_err(|_| Error::Parse("first line must be n".into()))?;
        let mut x = None;
        let mut o = None;
        for line in lines {
            let (key, rest) =
                line.split_once(':').ok_or_else(|| Error::Parse(format!("bad line {line:?}")))?;
            let vals = rest
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad entry {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            match key.trim() {
                "X" => x = Some(vals),
                "O" => o = Some(vals),
                k => return Err(Error::Parse(format!("unknown key {k:?}"))),
            }
        }
        let x = x.ok_or_else(|| Error::Parse("missing X line".into()))?;
        let o = o.ok_or_else(|| Error::Parse("missing O line".into()))?;
        if x.len() != n || o.len() != n {
            return Err(Error::NotPermutation(format!("expected {n} entries per line")));
        }
        GridDiagram::new(x, o)
    }
}
