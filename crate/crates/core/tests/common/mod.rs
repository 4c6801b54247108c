#![allow(dead_code)]

pub mod classical;

use covergrid::{GridDiagram, Marking};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn u2() -> GridDiagram {
    GridDiagram::unknot2()
}

pub fn u3() -> GridDiagram {
    u2().apply_stabilization(0, Marking::X)
}

pub fn t5() -> GridDiagram {
    GridDiagram::trefoil5()
}

/// Random knot grid of size `n`: `O` is `X` composed with a random n-cycle,
/// so the trace has a single component and no cell is shared.
pub fn random_knot(n: usize, seed: u64) -> GridDiagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<usize> = (0..n).collect();
    x.shuffle(&mut rng);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut tau = vec![0; n];
    for k in 0..n {
        tau[order[k]] = order[(k + 1) % n];
    }
    let o = (0..n).map(|c| x[tau[c]]).collect();
    GridDiagram::new(x, o).expect("cycle construction gives a knot")
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Rank over F2 of a dense 0/1 matrix, by plain row reduction on bit rows.
pub fn rank_f2_dense(rows: &[Vec<bool>]) -> usize {
    let mut rows: Vec<Vec<bool>> = rows.to_vec();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col]) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] {
                for (a, b) in row.iter_mut().zip(&pivot) {
                    *a ^= *b;
                }
            }
        }
        rank += 1;
    }
    rank
}
