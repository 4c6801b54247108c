//! Input loading and JSON rendering.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use covergrid::grid::format_rational;
use covergrid::homology::{Coeff, GradedHomology};
use covergrid::{CoverDiagram, Cuts, GridDiagram};
use serde_json::{json, Value};

pub const SCHEMA: u32 = 1;

/// Reads a grid in the text form or as JSON, and validates it.
pub fn load_grid(path: &Path) -> anyhow::Result<GridDiagram> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_grid(&text)
}

pub fn parse_grid(text: &str) -> anyhow::Result<GridDiagram> {
    if text.trim_start().starts_with('{') {
        let g: GridDiagram = serde_json::from_str(text).map_err(|e| covergrid::Error::Parse(e.to_string()))?;
        if g.x.len() != g.n || g.o.len() != g.n {
            return Err(covergrid::Error::NotPermutation(format!("expected {} entries per array", g.n)).into());
        }
        g.validate()?;
        Ok(g)
    } else {
        Ok(text.parse()?)
    }
}

pub fn grid_json(g: &GridDiagram) -> Value {
    json!({"n": g.n, "X": g.x, "O": g.o})
}

pub fn coeff_name(c: Coeff) -> &'static str {
    match c {
        Coeff::Z => "Z",
        Coeff::Z2 => "Z2",
    }
}

pub fn cuts_name(c: Cuts) -> &'static str {
    match c {
        Cuts::Vertical => "vertical",
        Cuts::Horizontal => "horizontal",
    }
}

pub fn homology_json(h: &GradedHomology) -> Value {
    let blocks: Vec<Value> = h
        .blocks
        .iter()
        .map(|b| {
            json!({
                "A": format_rational(&b.alexander),
                "rank": b.rank,
                "torsion": b.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({"n": h.grid_n, "m": h.m, "coeff": coeff_name(h.coeff), "blocks": blocks, "total_rank": h.total_rank()})
}

/// Incidence and monodromy of a cover, for debugging.
pub fn cover_json(cd: &CoverDiagram) -> Value {
    let n = cd.n();
    let inc: Vec<Vec<u8>> = cd.incidence_matrix().iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect();
    // sheet shift crossing each cut, per line
    let shifts: Vec<Vec<i64>> = (0..n)
        .map(|c| {
            (0..n)
                .map(|l| match cd.cuts {
                    Cuts::Vertical => cd.east_step(l, c),
                    Cuts::Horizontal => cd.north_step(l, c),
                })
                .collect()
        })
        .collect();
    json!({
        "schema": SCHEMA,
        "grid": grid_json(&cd.base),
        "m": cd.m,
        "cuts": cuts_name(cd.cuts),
        "dir": cd.dir,
        "cut_span": cd.cut_span.iter().map(|&(lo, hi)| [lo, hi]).collect::<Vec<_>>(),
        "shift": shifts,
        "incidence": inc,
    })
}

/// Rows of a generator as a compact string, one digit per beta lift.
pub fn generator_key(x: &[u8]) -> String {
    x.iter().map(|&i| char::from_digit(i as u32, 36).unwrap_or('?')).collect()
}

pub fn write_or_print(value: &Value, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => emit(&text),
    }
}

/// Prints a line to stdout; a closed pipe is not an error.
pub fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
