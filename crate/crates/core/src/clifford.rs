//! Signs of formal rectangles from spinor lifts of signed permutations.
//!
//! A formal generator is a signed permutation `M e_a = eps_a f_sigma(a)`
//! from alpha slots to beta slots. Each one is lifted canonically to the Pin
//! group of a Clifford algebra with `e_k^2 = -1`, and a rectangle is the
//! Clifford vector whose reflection turns one generator into the other; its
//! sign is the scalar relating the two lifts.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::complex::ChainComplex;
use crate::cover::CoverDiagram;
use crate::error::{Error, Result};

/// Ordering and orientation of the lifted curves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveFrame {
    /// Slot of each alpha lift, indexed `a n + i`.
    pub alpha_slot: Vec<usize>,
    /// Slot of each beta lift, indexed `b n + j`.
    pub beta_slot: Vec<usize>,
    /// `+1` for east, `-1` for west.
    pub alpha_or: Vec<i8>,
    /// `+1` for north, `-1` for south.
    pub beta_or: Vec<i8>,
}

impl CurveFrame {
    /// Sheet-major order, alphas east, betas north.
    pub fn standard(cd: &CoverDiagram) -> Self {
        let l = cd.lifts();
        CurveFrame {
            alpha_slot: (0..l).collect(),
            beta_slot: (0..l).collect(),
            alpha_or: vec![1; l],
            beta_or: vec![1; l],
        }
    }

    pub fn len(&self) -> usize {
        self.alpha_slot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha_slot.is_empty()
    }

    pub fn reverse_alpha(mut self, idx: usize) -> Self {
        self.alpha_or[idx] = -self.alpha_or[idx];
        self
    }

    pub fn reverse_beta(mut self, idx: usize) -> Self {
        self.beta_or[idx] = -self.beta_or[idx];
        self
    }

    /// Reorders slots by the given permutations of alpha and beta slots.
    pub fn permuted(mut self, alpha_perm: &[usize], beta_perm: &[usize]) -> Self {
        for s in self.alpha_slot.iter_mut() {
            *s = alpha_perm[*s];
        }
        for s in self.beta_slot.iter_mut() {
            *s = beta_perm[*s];
        }
        self
    }
}

/// A signed permutation from alpha slots to beta slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormalGen {
    pub sigma: Vec<usize>,
    pub eps: Vec<i8>,
}

impl FormalGen {
    /// Formal generator of a complex generator under a frame.
    pub fn of(cd: &CoverDiagram, frame: &CurveFrame, x: &[u8]) -> Self {
        let l = x.len();
        let mut sigma = vec![0; l];
        let mut eps = vec![0; l];
        for (k, &i) in x.iter().enumerate() {
            let p = cd.beta_point(k, i as usize);
            let a = cd.alpha_index(p);
            let slot = frame.alpha_slot[a];
            sigma[slot] = frame.beta_slot[k];
            eps[slot] = frame.alpha_or[a] * frame.beta_or[k];
        }
        FormalGen { sigma, eps }
    }

    /// Slot of the alpha curve matched with beta slot `b`.
    pub fn alpha_of(&self, b: usize) -> usize {
        self.sigma.iter().position(|&s| s == b).expect("sigma is a permutation")
    }
}

/// A formal rectangle from `x`: the alpha slots `s`, `n` meet beta slots `w`,
/// `e` at the corners of `x` (`s`-`w` and `n`-`e`). `o_s` records whether the
/// orientation of `alpha_s` runs along the boundary from its `x` corner to
/// its `y` corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FormalRect {
    pub s: usize,
    pub n: usize,
    pub w: usize,
    pub e: usize,
    pub o_s: i8,
}

impl FormalRect {
    /// Target of the rectangle with the given terminal local signs on
    /// `alpha_s` and `alpha_n`.
    pub fn target(&self, x: &FormalGen, eps_s: i8, eps_n: i8) -> FormalGen {
        let mut y = x.clone();
        y.sigma[self.s] = self.e;
        y.sigma[self.n] = self.w;
        y.eps[self.s] = eps_s;
        y.eps[self.n] = eps_n;
        y
    }
}

/// Spinor module for a Clifford algebra on `n` generators with
/// `e_k^2 = -1`, realised with Jordan-Wigner matrices.
#[derive(Debug, Clone)]
pub struct Spinors {
    n: usize,
    dim: usize,
}

type State = Vec<Complex64>;

impl Spinors {
    pub fn new(n: usize) -> Self {
        let qubits = n.div_ceil(2).max(1);
        Spinors { n, dim: 1 << qubits }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out += c e_k psi`.
    fn add_e(&self, k: usize, c: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
        let q = k / 2;
        let low = (1usize << q) - 1;
        let i = Complex64::new(0.0, 1.0);
        for (s, &amp) in psi.iter().enumerate() {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let z = if (s & low).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            let t = s ^ (1 << q);
            let phase = if k.is_multiple_of(2) {
                Complex64::new(z, 0.0)
            } else if (s >> q) & 1 == 0 {
                i * z
            } else {
                -i * z
            };
            // e_k = i gamma_k
            out[t] += c * i * phase * amp;
        }
    }

    /// `(sum c_k e_k) psi`.
    pub fn apply_vector(&self, v: &[(usize, f64)], psi: &[Complex64]) -> State {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for &(k, c) in v {
            self.add_e(k, Complex64::new(c, 0.0), psi, &mut out);
        }
        out
    }

    /// Canonical lift of `x` applied to the vacuum.
    pub fn lift(&self, x: &FormalGen) -> State {
        assert_eq!(x.sigma.len(), self.n);
        let mut psi = vec![Complex64::new(0.0, 0.0); self.dim];
        psi[0] = Complex64::new(1.0, 0.0);
        // reflections for the signs, applied right to left
        for a in (0..self.n).rev() {
            if x.eps[a] < 0 {
                psi = self.apply_vector(&[(a, 1.0)], &psi);
            }
        }
        // transpositions T_1 ... T_r with P = T_1 ... T_r
        let mut sigma = x.sigma.clone();
        let mut word = Vec::new();
        for k in 0..self.n {
            let t = sigma[k];
            if t != k {
                word.push((k.min(t), k.max(t)));
                for v in sigma.iter_mut() {
                    if *v == k {
                        *v = t;
                    } else if *v == t {
                        *v = k;
                    }
                }
            }
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for &(a, b) in word.iter().rev() {
            psi = self.apply_vector(&[(a, r), (b, -r)], &psi);
        }
        psi
    }

    /// `Re <phi, psi>`.
    pub fn overlap(phi: &[Complex64], psi: &[Complex64]) -> f64 {
        phi.iter().zip(psi).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Sign of a formal rectangle from `x` with precomputed lifts.
    pub fn rect_sign_with(&self, x: &FormalGen, psi_x: &[Complex64], y: &FormalGen, psi_y: &[Complex64], r: &FormalRect) -> Result<i8> {
        let ex = x.eps[r.s];
        let t = (ex * y.eps[r.s]) as f64;
        let c = (r.o_s * ex) as f64 * std::f64::consts::FRAC_1_SQRT_2;
        let v = self.apply_vector(&[(r.w, c), (r.e, -c * t)], psi_x);
        let s = Self::overlap(psi_y, &v);
        if (s.abs() - 1.0).abs() > 1e-6 {
            return Err(Error::Internal(format!("rectangle lift does not connect the generators (overlap {s})")));
        }
        Ok(if s > 0.0 { 1 } else { -1 })
    }

    pub fn rect_sign(&self, x: &FormalGen, y: &FormalGen, r: &FormalRect) -> Result<i8> {
        self.rect_sign_with(x, &self.lift(x), y, &self.lift(y), r)
    }
}

/// Formal rectangle of an edge of the complex.
pub fn formal_rect_of_edge(c: &ChainComplex, frame: &CurveFrame, e: &crate::complex::Rect) -> FormalRect {
    let cd = &c.cover;
    let d = c.domain(e);
    let a_s = cd.alpha_index(d.sw);
    let a_n = cd.alpha_index(d.ne);
    FormalRect {
        s: frame.alpha_slot[a_s],
        n: frame.alpha_slot[a_n],
        w: frame.beta_slot[e.sw as usize],
        e: frame.beta_slot[e.ne as usize],
        // the south edge runs east from the x corner
        o_s: frame.alpha_or[a_s],
    }
}

/// Signs of all edges of a complex under a frame.
pub fn edge_signs(c: &ChainComplex, frame: &CurveFrame) -> Result<Vec<i8>> {
    let sp = Spinors::new(frame.len());
    let formal: Vec<FormalGen> = c.gens.iter().map(|x| FormalGen::of(&c.cover, frame, x)).collect();
    let lifts: Vec<State> = formal.par_iter().map(|f| sp.lift(f)).collect();
    c.edges
        .par_iter()
        .map(|e| {
            let r = formal_rect_of_edge(c, frame, e);
            let (f, t) = (e.from as usize, e.to as usize);
            sp.rect_sign_with(&formal[f], &lifts[f], &formal[t], &lifts[t], &r)
        })
        .collect()
}
