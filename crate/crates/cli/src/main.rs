//! `covergrid`: knot Floer homology of lifted grid diagrams in cyclic
//! branched covers, from the command line.

mod fuzz;
mod moves;
mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use covergrid::grid::format_rational;
use covergrid::homology::Coeff;
use covergrid::signs::{check_d_squared, generate_constraints, solve};
use covergrid::stab::Stabilization;
use covergrid::{ChainComplex, CoverDiagram, Cuts, ErrorClass, Marking};
use serde_json::{json, Value};

use crate::output::*;

#[derive(Parser)]
#[command(name = "covergrid", version, about = "Knot Floer homology of grid diagrams lifted to cyclic branched covers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CutsArg {
    Vertical,
    Horizontal,
}

impl From<CutsArg> for Cuts {
    fn from(c: CutsArg) -> Cuts {
        match c {
            CutsArg::Vertical => Cuts::Vertical,
            CutsArg::Horizontal => Cuts::Horizontal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CoeffArg {
    #[value(name = "z", alias = "Z")]
    Z,
    #[value(name = "z2", alias = "Z2")]
    Z2,
}

impl From<CoeffArg> for Coeff {
    fn from(c: CoeffArg) -> Coeff {
        match c {
            CoeffArg::Z => Coeff::Z,
            CoeffArg::Z2 => Coeff::Z2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MovedArg {
    X,
    O,
}

#[derive(clap::Args)]
struct CoverArgs {
    /// Grid file, text (`n`, `X: ...`, `O: ...`) or JSON.
    #[arg(long)]
    grid: PathBuf,
    /// Number of sheets.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, value_enum, default_value_t = CutsArg::Vertical)]
    cuts: CutsArg,
}

impl CoverArgs {
    fn cover(&self) -> anyhow::Result<CoverDiagram> {
        check_m(self.m)?;
        Ok(CoverDiagram::new(&load_grid(&self.grid)?, self.m, self.cuts.into())?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check that a grid file describes a knot.
    Validate {
        #[arg(long)]
        grid: PathBuf,
    },
    /// Dump the incidence and sheet shifts of a cover.
    BuildCover {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generator count, per-grading census and edge counts.
    Complex {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for signs and check that the signed boundary squares to zero.
    Signs {
        #[command(flatten)]
        cover: CoverArgs,
        /// Draw the spanning forest, free variables and a gauge from this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Emit the sign of every edge.
        #[arg(long)]
        dump: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Homology per Alexander grading.
    Homology {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long, value_enum, default_value_t = CoeffArg::Z)]
        coeff: CoeffArg,
        #[arg(long)]
        seed: Option<u64>,
        /// Include wall-clock time in the output (makes it non-reproducible).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a move script and compare homology before and after each move.
    Invariance {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// File with one move per line: `cyclic rows 1`, `commute columns 2`,
        /// `stabilize 0 X`.
        #[arg(long, conflicts_with = "moves")]
        script: Option<PathBuf>,
        /// Moves inline, separated by `;`.
        #[arg(long)]
        moves: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stabilize a grid and check the map between the two complexes.
    StabCheck {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        row: usize,
        #[arg(long, value_enum, default_value_t = MovedArg::X)]
        moved: MovedArg,
        #[arg(long)]
        json: bool,
    },
    /// Random grids and random move walks.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        walks: usize,
        /// Largest grid size reached during a walk (at most 6).
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        /// Largest number of sheets (at most 3).
        #[arg(long, default_value_t = 2)]
        max_m: usize,
        #[arg(long, default_value_t = 4)]
        max_moves: usize,
        /// Flip one edge sign after every move, to check the harness itself.
        #[arg(long)]
        inject_fault: bool,
        /// Write one script file per failure into this directory.
        #[arg(long)]
        save_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure that maps to the invariance exit code.
#[derive(Debug)]
struct InvarianceFailure(String);

impl std::fmt::Display for InvarianceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invariance failure: {}", self.0)
    }
}

impl std::error::Error for InvarianceFailure {}

fn check_m(m: usize) -> anyhow::Result<()> {
    if m == 0 {
        return Err(covergrid::Error::Unsupported("m must be at least 1".into()).into());
    }
    Ok(())
}

fn census(c: &ChainComplex) -> Value {
    let mut per: BTreeMap<covergrid::Rational, usize> = BTreeMap::new();
    for a in &c.alexander {
        *per.entry(*a).or_default() += 1;
    }
    per.iter().map(|(a, k)| json!({"A": format_rational(a), "generators": k})).collect()
}

fn cmd_complex(args: &CoverArgs) -> anyhow::Result<Value> {
    let cd = args.cover()?;
    let c = ChainComplex::build(&cd)?;
    let pairs = c.boundary_mod2().len();
    Ok(json!({
        "schema": SCHEMA,
        "grid": grid_json(&cd.base),
        "m": cd.m,
        "cuts": cuts_name(cd.cuts),
        "generators": c.len(),
        "edges": c.edges.len(),
        "odd_pairs": pairs,
        "census": census(&c),
    }))
}

fn cmd_signs(args: &CoverArgs, seed: Option<u64>, dump: bool) -> anyhow::Result<Value> {
    let cd = args.cover()?;
    let c = ChainComplex::build(&cd)?;
    let p = generate_constraints(&c)?;
    let sol = solve(&c, &p, seed)?;
    check_d_squared(&c, &sol.edge_sign)?;
    let mut v = json!({
        "schema": SCHEMA,
        "grid": grid_json(&cd.base),
        "m": cd.m,
        "cuts": cuts_name(cd.cuts),
        "seed": seed,
        "order": "sheet-major, then index; alpha east, beta north",
        "variables": p.vars.len(),
        "equations": p.system.equations.len(),
        "gauge_fixed": sol.gauge_fixed,
        "free": sol.free,
        "d_squared_zero": true,
    });
    if dump {
        let edges: Vec<Value> = c
            .edges
            .iter()
            .zip(&sol.edge_sign)
            .map(|(e, s)| {
                let from = generator_key(&c.gens[e.from as usize]);
                json!({
                    "id": format!("{from}:{}:{}x{}", e.sw, e.w, e.h),
                    "to": generator_key(&c.gens[e.to as usize]),
                    "sign": s,
                })
            })
            .collect();
        v["edges"] = Value::Array(edges);
    }
    Ok(v)
}

fn cmd_homology(args: &CoverArgs, coeff: CoeffArg, seed: Option<u64>, timing: bool) -> anyhow::Result<Value> {
    check_m(args.m)?;
    let g = load_grid(&args.grid)?;
    let t = Instant::now();
    let r = covergrid::pipeline::run(&g, args.m, args.cuts.into(), coeff.into(), seed)?;
    let mut v = homology_json(&r.homology);
    v["schema"] = json!(SCHEMA);
    v["cuts"] = json!(cuts_name(args.cuts.into()));
    v["meta"] = json!({"generators": r.stats.generators, "edges": r.stats.edges});
    if timing {
        v["meta"]["runtime_ms"] = json!(t.elapsed().as_millis() as u64);
    }
    Ok(v)
}

fn cmd_invariance(grid: &PathBuf, m: usize, script: Option<&PathBuf>, inline: Option<&str>) -> anyhow::Result<Value> {
    check_m(m)?;
    let g = load_grid(grid)?;
    let text = match (script, inline) {
        (Some(p), _) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        (None, Some(s)) => s.to_string(),
        (None, None) => bail!(covergrid::Error::Parse("give --script or --moves".into())),
    };
    let moves = moves::parse_script(&text)?;
    let mut cur = g.clone();
    for mv in &moves {
        cur = mv.apply(&cur).with_context(|| format!("move {mv}"))?;
    }
    let hom = moves::standard_homology(m, Cuts::Vertical, Coeff::Z);
    let (steps, failure) = moves::run_script(&g, &moves, &hom);
    let v = json!({
        "schema": SCHEMA,
        "grid": grid_json(&g),
        "m": m,
        "steps": steps,
        "ok": failure.is_none(),
        "failure": failure,
    });
    Ok(v)
}

fn cmd_stab_check(grid: &PathBuf, m: usize, row: usize, moved: MovedArg, as_json: bool) -> anyhow::Result<bool> {
    check_m(m)?;
    let g = load_grid(grid)?;
    if row >= g.n {
        bail!(covergrid::Error::Parse(format!("row {row} out of range for n={}", g.n)));
    }
    let moved = match moved {
        MovedArg::X => Marking::X,
        MovedArg::O => Marking::O,
    };
    let st = Stabilization::new(&g, m, row, moved)?;
    let rep = st.verify()?;
    let lines = rep.lines();
    if as_json {
        let checks: Vec<Value> = lines.iter().map(|(l, ok)| json!({"check": l, "ok": ok})).collect();
        let v = json!({
            "schema": SCHEMA,
            "grid": grid_json(&g),
            "stabilized": grid_json(&st.h),
            "m": m,
            "row": row,
            "moved": format!("{moved:?}"),
            "checks": checks,
            "ok": rep.holds(),
        });
        emit(&serde_json::to_string_pretty(&v)?)?;
    } else {
        let mut text = format!("stabilized grid ({} generators, from {}):\n{}", rep.h_generators, rep.g_generators, st.h);
        for (l, ok) in &lines {
            text += &format!("{}  {l}\n", if *ok { "pass" } else { "FAIL" });
        }
        emit(text.trim_end())?;
    }
    Ok(rep.holds())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Validate { grid } => {
            let g = load_grid(&grid)?;
            let v = json!({"schema": SCHEMA, "grid": grid_json(&g), "valid": true, "components": 1});
            emit(&serde_json::to_string_pretty(&v)?)?;
        }
        Command::BuildCover { cover, out } => write_or_print(&cover_json(&cover.cover()?), out.as_deref())?,
        Command::Complex { cover, out } => write_or_print(&cmd_complex(&cover)?, out.as_deref())?,
        Command::Signs { cover, seed, dump, out } => write_or_print(&cmd_signs(&cover, seed, dump)?, out.as_deref())?,
        Command::Homology { cover, coeff, seed, timing, out } => {
            write_or_print(&cmd_homology(&cover, coeff, seed, timing)?, out.as_deref())?
        }
        Command::Invariance { grid, m, script, moves, out } => {
            let v = cmd_invariance(&grid, m, script.as_ref(), moves.as_deref())?;
            write_or_print(&v, out.as_deref())?;
            if let Some(f) = v["failure"].as_str() {
                return Err(InvarianceFailure(f.to_string()).into());
            }
        }
        Command::StabCheck { grid, m, row, moved, json } => {
            if !cmd_stab_check(&grid, m, row, moved, json)? {
                return Err(InvarianceFailure("stabilization checks failed".into()).into());
            }
        }
        Command::Fuzz { seed, walks, max_n, max_m, max_moves, inject_fault, save_dir, out } => {
            if !(2..=6).contains(&max_n) || !(1..=3).contains(&max_m) || max_moves == 0 {
                bail!(covergrid::Error::Unsupported("need 2 <= max-n <= 6, 1 <= max-m <= 3, max-moves >= 1".into()));
            }
            let cfg = fuzz::FuzzConfig { seed, walks, max_n, max_m, max_moves, inject_fault };
            let report = fuzz::fuzz(&cfg);
            if let Some(dir) = save_dir {
                fs::create_dir_all(&dir)?;
                for f in report["failures"].as_array().into_iter().flatten() {
                    let w = f["walk"].as_u64().unwrap_or(0);
                    let grid: covergrid::GridDiagram = serde_json::from_value(f["grid"].clone())?;
                    fs::write(dir.join(format!("walk-{w}.grid")), grid.to_string())?;
                    let lines: Vec<&str> = f["shrunk"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
                    fs::write(dir.join(format!("walk-{w}.moves")), format!("# m = {}\n{}\n", f["m"], lines.join("\n")))?;
                }
            }
            write_or_print(&report, out.as_deref())?;
        }
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<InvarianceFailure>().is_some() {
        return 4;
    }
    if let Some(ce) = e.downcast_ref::<covergrid::Error>() {
        return match ce.class() {
            ErrorClass::Validation => 2,
            ErrorClass::Solver => 3,
            ErrorClass::Invariance => 4,
            ErrorClass::Internal => 5,
        };
    }
    if e.downcast_ref::<std::io::Error>().is_some() || e.downcast_ref::<serde_json::Error>().is_some() {
        return 2;
    }
    5
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = std::env::var("COVERGRID_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // ignore the error if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
