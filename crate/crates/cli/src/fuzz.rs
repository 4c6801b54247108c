//! Random grids and move walks, with shrinking of failing walks.

use covergrid::homology::{homology, Coeff, GradedHomology};
use covergrid::signs::{check_d_squared, signed_boundary, solve_complex};
use covergrid::{Axis, ChainComplex, CoverDiagram, Cuts, GridDiagram, Marking};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::moves::{run_script, Move};
use crate::output::{grid_json, SCHEMA};

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub seed: u64,
    pub walks: usize,
    pub max_n: usize,
    pub max_m: usize,
    pub max_moves: usize,
    pub inject_fault: bool,
}

/// A random knot grid: `O` is `X` composed with a random n-cycle.
pub fn random_knot(n: usize, rng: &mut ChaCha8Rng) -> GridDiagram {
    let mut x: Vec<usize> = (0..n).collect();
    x.shuffle(rng);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut tau = vec![0; n];
    for k in 0..n {
        tau[order[k]] = order[(k + 1) % n];
    }
    let o = (0..n).map(|c| x[tau[c]]).collect();
    GridDiagram { n, x, o }
}

fn random_move(g: &GridDiagram, max_n: usize, rng: &mut ChaCha8Rng) -> Move {
    let axis = if rng.gen() { Axis::Rows } else { Axis::Columns };
    let legal: Vec<(Axis, usize)> = [Axis::Rows, Axis::Columns]
        .into_iter()
        .flat_map(|a| (0..g.n).filter(move |&i| g.commutation_legal(a, i)).map(move |i| (a, i)))
        .collect();
    loop {
        match rng.gen_range(0..3) {
            0 => return Move::Cyclic { axis, shift: rng.gen_range(1..g.n as i64) },
            1 if !legal.is_empty() => {
                let (axis, index) = legal[rng.gen_range(0..legal.len())];
                return Move::Commute { axis, index };
            }
            2 if g.n < max_n => {
                let moved = if rng.gen() { Marking::X } else { Marking::O };
                return Move::Stabilize { row: rng.gen_range(0..g.n), moved };
            }
            _ => {}
        }
    }
}

/// Homology with the sign of one edge flipped, for harness checks.
fn faulty_homology(g: &GridDiagram, m: usize) -> covergrid::Result<GradedHomology> {
    let cd = CoverDiagram::new(g, m, Cuts::Vertical)?;
    let c = ChainComplex::build(&cd)?;
    let mut signs = solve_complex(&c, None)?.edge_sign;
    if let Some(s) = signs.first_mut() {
        *s = -*s;
    }
    check_d_squared(&c, &signs)?;
    Ok(homology(&c, &signed_boundary(&c, &signs), Coeff::Z))
}

fn legal(g: &GridDiagram, script: &[Move]) -> bool {
    let mut cur = g.clone();
    for mv in script {
        match mv.apply(&cur) {
            Ok(next) => cur = next,
            Err(_) => return false,
        }
    }
    true
}

/// Removes moves one at a time while the walk still fails, until no single
/// removal keeps it failing. Scripts with a move that became illegal are
/// skipped.
fn shrink(g: &GridDiagram, mut script: Vec<Move>, fails: &dyn Fn(&GridDiagram, &[Move]) -> Option<String>) -> (Vec<Move>, String) {
    let mut reason = fails(g, &script).unwrap_or_default();
    let mut changed = true;
    while changed {
        changed = false;
        for k in 0..script.len() {
            let mut shorter = script.clone();
            shorter.remove(k);
            if !legal(g, &shorter) {
                continue;
            }
            if let Some(r) = fails(g, &shorter) {
                script = shorter;
                reason = r;
                changed = true;
                break;
            }
        }
    }
    (script, reason)
}

pub fn fuzz(cfg: &FuzzConfig) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut walks = Vec::new();
    let mut failures = Vec::new();
    for w in 0..cfg.walks {
        let n = rng.gen_range(2..=cfg.max_n);
        let m = rng.gen_range(1..=cfg.max_m);
        let g = random_knot(n, &mut rng);
        let len = rng.gen_range(1..=cfg.max_moves);
        let mut script = Vec::with_capacity(len);
        let mut cur = g.clone();
        for _ in 0..len {
            let mv = random_move(&cur, cfg.max_n, &mut rng);
            cur = mv.apply(&cur).expect("generated moves are legal");
            script.push(mv);
        }
        let inject = cfg.inject_fault;
        let fails = move |g: &GridDiagram, s: &[Move]| {
            let hom = move |h: &GridDiagram| {
                // the fault is injected into every diagram after the first
                if inject && h != g {
                    faulty_homology(h, m)
                } else {
                    covergrid::pipeline::compute_homology(h, m, Cuts::Vertical, Coeff::Z)
                }
            };
            run_script(g, s, &hom).1
        };
        let script_text: Vec<String> = script.iter().map(|m| m.to_string()).collect();
        let outcome = fails(&g, &script);
        walks.push(json!({"walk": w, "grid": grid_json(&g), "m": m, "script": script_text, "ok": outcome.is_none()}));
        if outcome.is_some() {
            let (small, reason) = shrink(&g, script.clone(), &fails);
            failures.push(json!({
                "walk": w,
                "grid": grid_json(&g),
                "m": m,
                "script": script_text,
                "shrunk": small.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                "reason": reason,
            }));
        }
    }
    json!({
        "schema": SCHEMA,
        "seed": cfg.seed,
        "walks": walks,
        "failures": failures,
        "passed": cfg.walks - failures.len(),
        "inject_fault": cfg.inject_fault,
    })
}
