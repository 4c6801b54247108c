//! Move scripts and step-by-step invariance checks.

use std::fmt;
use std::str::FromStr;

use covergrid::homology::{check_stable_equivalence, Coeff, GradedHomology};
use covergrid::{Axis, Cuts, Error, GridDiagram, Marking};
use serde_json::{json, Value};

use crate::output::homology_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Cyclic { axis: Axis, shift: i64 },
    Commute { axis: Axis, index: usize },
    Stabilize { row: usize, moved: Marking },
}

impl Move {
    pub fn apply(&self, g: &GridDiagram) -> covergrid::Result<GridDiagram> {
        match *self {
            Move::Cyclic { axis, shift } => Ok(g.apply_cyclic_permutation(axis, shift)),
            Move::Commute { axis, index } => g.apply_commutation(axis, index),
            Move::Stabilize { row, moved } => {
                if row >= g.n {
                    return Err(Error::Parse(format!("row {row} out of range for n={}", g.n)));
                }
                Ok(g.apply_stabilization(row, moved))
            }
        }
    }
}

fn axis_name(a: Axis) -> &'static str {
    match a {
        Axis::Rows => "rows",
        Axis::Columns => "columns",
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Move::Cyclic { axis, shift } => write!(f, "cyclic {} {shift}", axis_name(axis)),
            Move::Commute { axis, index } => write!(f, "commute {} {index}", axis_name(axis)),
            Move::Stabilize { row, moved } => write!(f, "stabilize {row} {moved:?}"),
        }
    }
}

fn parse_axis(s: &str) -> covergrid::Result<Axis> {
    match s {
        "rows" | "row" => Ok(Axis::Rows),
        "columns" | "column" | "cols" | "col" => Ok(Axis::Columns),
        _ => Err(Error::Parse(format!("unknown axis {s:?}"))),
    }
}

fn parse_num<T: FromStr>(s: &str) -> covergrid::Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

impl FromStr for Move {
    type Err = Error;

    /// `cyclic rows 1`, `commute columns 2`, `stabilize 0 X`.
    fn from_str(s: &str) -> covergrid::Result<Move> {
        let words: Vec<&str> = s.split_whitespace().collect();
        match words.as_slice() {
            ["cyclic", a, k] => Ok(Move::Cyclic { axis: parse_axis(a)?, shift: parse_num(k)? }),
            ["commute", a, i] => Ok(Move::Commute { axis: parse_axis(a)?, index: parse_num(i)? }),
            ["stabilize", r, m] => {
                let moved = match *m {
                    "X" | "x" => Marking::X,
                    "O" | "o" => Marking::O,
                    _ => return Err(Error::Parse(format!("moved marking must be X or O, got {m:?}"))),
                };
                Ok(Move::Stabilize { row: parse_num(r)?, moved })
            }
            _ => Err(Error::Parse(format!("bad move {s:?}"))),
        }
    }
}

/// Moves separated by newlines or semicolons; `#` starts a comment.
pub fn parse_script(text: &str) -> covergrid::Result<Vec<Move>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(';'))
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}

/// Homology of one diagram, possibly with a deliberately corrupted sign.
pub type HomologyFn<'a> = dyn Fn(&GridDiagram) -> covergrid::Result<GradedHomology> + Sync + 'a;

pub fn standard_homology(m: usize, cuts: Cuts, coeff: Coeff) -> impl Fn(&GridDiagram) -> covergrid::Result<GradedHomology> + Sync {
    move |g| covergrid::pipeline::compute_homology(g, m, cuts, coeff)
}

#[derive(Debug)]
pub struct StepResult {
    pub ok: bool,
    pub json: Value,
}

/// Compares the homology before and after one move.
pub fn compare(mv: &Move, before: &GradedHomology, after: &GradedHomology) -> StepResult {
    if after.grid_n == before.grid_n {
        let ok = after.same_groups(before);
        let json = json!({"move": mv.to_string(), "ok": ok, "relation": "equal"});
        StepResult { ok, json }
    } else {
        let v = check_stable_equivalence(after, before);
        let ok = v.holds();
        let json = json!({
            "move": mv.to_string(),
            "ok": ok,
            "relation": "stable",
            "doubling": v.doubling,
            "tensor_two_gradings": v.tensor_two_gradings,
            "totals_doubled": v.totals,
        });
        StepResult { ok, json }
    }
}

/// Runs a script from `g`. Stops at the first failing step; the error, if
/// any, is that of the failing step.
pub fn run_script(g: &GridDiagram, script: &[Move], hom: &HomologyFn) -> (Vec<Value>, Option<String>) {
    let mut steps = Vec::new();
    let mut cur = g.clone();
    let mut before = match hom(&cur) {
        Ok(h) => h,
        Err(e) => return (steps, Some(format!("initial diagram: {e}"))),
    };
    for mv in script {
        let next = match mv.apply(&cur) {
            Ok(n) => n,
            Err(e) => return (steps, Some(format!("{mv}: {e}"))),
        };
        let after = match hom(&next) {
            Ok(h) => h,
            Err(e) => return (steps, Some(format!("{mv}: {e}"))),
        };
        let mut r = compare(mv, &before, &after);
        if !r.ok {
            r.json["before"] = homology_json(&before);
            r.json["after"] = homology_json(&after);
            steps.push(r.json);
            return (steps, Some(format!("{mv}: homology changed")));
        }
        steps.push(r.json);
        cur = next;
        before = after;
    }
    (steps, None)
}
