//! Sparse linear systems over F2.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorEquation {
    /// Sorted, without repeats.
    pub vars: Vec<u32>,
    pub rhs: bool,
}

impl XorEquation {
    /// Builds an equation, cancelling repeated variables in pairs.
    pub fn new(mut vars: Vec<u32>, rhs: bool) -> Self {
        vars.sort_unstable();
        let mut out: Vec<u32> = Vec::with_capacity(vars.len());
        for v in vars {
            if out.last() == Some(&v) {
                out.pop();
            } else {
                out.push(v);
            }
        }
        XorEquation { vars: out, rhs }
    }

    pub fn holds(&self, value: &[bool]) -> bool {
        self.vars.iter().fold(false, |acc, &v| acc ^ value[v as usize]) == self.rhs
    }
}

#[derive(Debug, Clone, Default)]
pub struct XorSystem {
    pub n_vars: usize,
    pub equations: Vec<XorEquation>,
}

#[derive(Debug, Clone)]
pub struct XorSolution {
    pub values: Vec<bool>,
    /// Variables left undetermined by the equations and the pinned values.
    pub free: Vec<u32>,
    pub pivots: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Unknown,
    Known(bool),
    Pivot,
}

impl XorSystem {
    /// Solves with some variables pinned. Free variables take
    /// `default(var)`. Propagation handles equations with a single unknown;
    /// when it stalls the shortest remaining equation is used as a pivot.
    pub fn solve(&self, pinned: &[(u32, bool)], default: impl Fn(u32) -> bool) -> Result<XorSolution> {
        let nv = self.n_vars;
        let mut state = vec![State::Unknown; nv];
        let mut eqs: Vec<XorEquation> = self.equations.clone();
        let mut active = vec![true; eqs.len()];
        let mut occ: Vec<Vec<u32>> = vec![Vec::new(); nv];
        for (e, eq) in eqs.iter().enumerate() {
            for &v in &eq.vars {
                occ[v as usize].push(e as u32);
            }
        }
        let mut queue: Vec<u32> = Vec::new();
        let mut heap: BinaryHeap<Reverse<(usize, u32)>> = BinaryHeap::new();
        for (e, eq) in eqs.iter().enumerate() {
            heap.push(Reverse((eq.vars.len(), e as u32)));
        }
        let mut pivot_eqs: Vec<(u32, XorEquation)> = Vec::new();

        // Substitutes a known value into every active equation containing it.
        let assign = |v: u32,
                      val: bool,
                      state: &mut Vec<State>,
                      eqs: &mut Vec<XorEquation>,
                      active: &mut Vec<bool>,
                      occ: &Vec<Vec<u32>>,
                      queue: &mut Vec<u32>,
                      heap: &mut BinaryHeap<Reverse<(usize, u32)>>|
         -> Result<()> {
            state[v as usize] = State::Known(val);
            for &e in &occ[v as usize] {
                let eu = e as usize;
                if !active[eu] {
                    continue;
                }
                if let Ok(pos) = eqs[eu].vars.binary_search(&v) {
                    eqs[eu].vars.remove(pos);
                    eqs[eu].rhs ^= val;
                    match eqs[eu].vars.len() {
                        0 => {
                            active[eu] = false;
                            if eqs[eu].rhs {
                                return Err(Error::Inconsistent);
                            }
                        }
                        1 => queue.push(e),
                        l => heap.push(Reverse((l, e))),
                    }
                }
            }
            Ok(())
        };

        for &(v, val) in pinned {
            if let State::Known(old) = state[v as usize] {
                if old != val {
                    return Err(Error::Inconsistent);
                }
                continue;
            }
            assign(v, val, &mut state, &mut eqs, &mut active, &occ, &mut queue, &mut heap)?;
        }
        for (e, eq) in eqs.iter().enumerate() {
            if active[e] && eq.vars.is_empty() {
                if eq.rhs {
                    return Err(Error::Inconsistent);
                }
            } else if active[e] && eq.vars.len() == 1 {
                queue.push(e as u32);
            }
        }
        for (e, eq) in eqs.iter_mut().enumerate() {
            if eq.vars.is_empty() {
                active[e] = false;
            }
        }

        loop {
            while let Some(e) = queue.pop() {
                let eu = e as usize;
                if !active[eu] || eqs[eu].vars.len() != 1 {
                    continue;
                }
                let v = eqs[eu].vars[0];
                let val = eqs[eu].rhs;
                active[eu] = false;
                assign(v, val, &mut state, &mut eqs, &mut active, &occ, &mut queue, &mut heap)?;
            }
            // pick the shortest active equation as a pivot
            let mut picked = None;
            while let Some(Reverse((len, e))) = heap.pop() {
                let eu = e as usize;
                if active[eu] && eqs[eu].vars.len() == len {
                    picked = Some(e);
                    break;
                }
            }
            let Some(p) = picked else { break };
            let pu = p as usize;
            active[pu] = false;
            let peq = eqs[pu].clone();
            let v = peq.vars[0];
            state[v as usize] = State::Pivot;
            let users: Vec<u32> = occ[v as usize].clone();
            for e in users {
                let eu = e as usize;
                if !active[eu] || eqs[eu].vars.binary_search(&v).is_err() {
                    continue;
                }
                let merged = sym_diff(&eqs[eu].vars, &peq.vars);
                for &w in &merged {
                    if eqs[eu].vars.binary_search(&w).is_err() {
                        occ[w as usize].push(e);
                    }
                }
                eqs[eu].vars = merged;
                eqs[eu].rhs ^= peq.rhs;
                match eqs[eu].vars.len() {
                    0 => {
                        active[eu] = false;
                        if eqs[eu].rhs {
                            return Err(Error::Inconsistent);
                        }
                    }
                    1 => queue.push(e),
                    l => heap.push(Reverse((l, e))),
                }
            }
            pivot_eqs.push((v, peq));
        }

        let mut values = vec![false; nv];
        let mut free = Vec::new();
        for v in 0..nv {
            match state[v] {
                State::Known(b) => values[v] = b,
                State::Unknown => {
                    free.push(v as u32);
                    values[v] = default(v as u32);
                }
                State::Pivot => {}
            }
        }
        let pivots = pivot_eqs.len();
        for (v, eq) in pivot_eqs.into_iter().rev() {
            let mut val = eq.rhs;
            for &w in &eq.vars {
                if w != v {
                    val ^= values[w as usize];
                }
            }
            values[v as usize] = val;
        }
        Ok(XorSolution { values, free, pivots })
    }

    pub fn all_hold(&self, values: &[bool]) -> bool {
        self.equations.iter().all(|e| e.holds(values))
    }
}

fn sym_diff(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
