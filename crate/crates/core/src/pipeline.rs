//! End-to-end computation from a grid diagram to graded homology.

use std::time::Instant;

use crate::complex::ChainComplex;
use crate::cover::{CoverDiagram, Cuts};
use crate::error::Result;
use crate::grid::GridDiagram;
use crate::homology::{homology, Coeff, GradedHomology};
use crate::signs::{check_d_squared, signed_boundary, solve_complex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStats {
    pub generators: usize,
    pub edges: usize,
    pub runtime_ms: u128,
}

#[derive(Debug, Clone)]
pub struct Run {
    pub complex: ChainComplex,
    pub edge_sign: Vec<i8>,
    pub homology: GradedHomology,
    pub stats: RunStats,
}

/// Builds the cover and complex, solves for signs, checks `d^2 = 0`, and
/// computes homology.
pub fn run(g: &GridDiagram, m: usize, cuts: Cuts, coeff: Coeff, seed: Option<u64>) -> Result<Run> {
    let t = Instant::now();
    let cd = CoverDiagram::new(g, m, cuts)?;
    let complex = ChainComplex::build(&cd)?;
    let sol = solve_complex(&complex, seed)?;
    check_d_squared(&complex, &sol.edge_sign)?;
    let entries = signed_boundary(&complex, &sol.edge_sign);
    let homology = homology(&complex, &entries, coeff);
    let stats = RunStats {
        generators: complex.len(),
        edges: complex.edges.len(),
        runtime_ms: t.elapsed().as_millis(),
    };
    Ok(Run { complex, edge_sign: sol.edge_sign, homology, stats })
}

pub fn compute_homology(g: &GridDiagram, m: usize, cuts: Cuts, coeff: Coeff) -> Result<GradedHomology> {
    Ok(run(g, m, cuts, coeff, None)?.homology)
}
