//! `table`: a grid of bounds laid out one row per `(n, d)`.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dlin::krawtchouk::KrawtchoukCache;
use dlin::lpbuild::{ConstraintMode, ObjectiveMode, VariantSpec};
use dlin::{Error, Result};
use rayon::prelude::*;

use crate::config::Config;
use crate::solve::{self, Outcome, Program, SolverArg, SolverArgs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    /// C2' with Obj'.
    C2wObjp,
    /// C2' with Obj.
    C2wObj,
    /// C2 with Obj'.
    C2Objp,
    /// C2 with Obj.
    C2Obj,
    /// Classic Delsarte (independent of r).
    Delsarte,
}

const DEFAULT_VARIANTS: [VariantArg; 5] =
    [VariantArg::C2wObjp, VariantArg::C2wObj, VariantArg::C2Objp, VariantArg::C2Obj, VariantArg::Delsarte];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableSolver {
    Exact,
    Float,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(short = 'r', long, default_value_t = 2)]
    pub r: usize,
    /// Lengths: comma-separated values or ranges `a-b` or `a-b:step`.
    #[arg(short = 'n', long = "n")]
    pub n: String,
    /// Distances, in the same syntax as `--n`. Pairs with `d > n` are skipped.
    #[arg(short = 'd', long = "d")]
    pub d: String,
    /// Columns, in order.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub variants: Vec<VariantArg>,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// CSV with columns `n,d,k`; a cell is starred when the floor of log2 of
    /// its bound equals `k`.
    #[arg(long)]
    pub best_known: Option<PathBuf>,
    /// Cells solved concurrently.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub no_gl_fuse: bool,
    /// Apply the even-code reduction; every d must be even.
    #[arg(long)]
    pub even_reduction: bool,
    #[arg(long, value_enum, default_value_t = TableSolver::Exact)]
    pub solver: TableSolver,
    #[command(flatten)]
    pub limits: SolverArgs,
}

/// Parse `20,22-24,30-40:2` into a sorted, deduplicated list.
pub fn parse_range(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad range {text:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (span, step) = match item.split_once(':') {
            Some((span, step)) => (span, num(step)?),
            None => (item, 1),
        };
        if step == 0 {
            return Err(bad());
        }
        match span.split_once('-') {
            Some((a, b)) => out.extend((num(a)?..=num(b)?).step_by(step)),
            None => out.push(num(span)?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn program(v: VariantArg, args: &TableArgs) -> Program {
    let (constraint_mode, objective_mode) = match v {
        VariantArg::C2wObjp => (ConstraintMode::C2Weak, ObjectiveMode::ObjProduct),
        VariantArg::C2wObj => (ConstraintMode::C2Weak, ObjectiveMode::Obj),
        VariantArg::C2Objp => (ConstraintMode::C2, ObjectiveMode::ObjProduct),
        VariantArg::C2Obj => (ConstraintMode::C2, ObjectiveMode::Obj),
        VariantArg::Delsarte => return Program::Delsarte,
    };
    Program::Lin(VariantSpec { constraint_mode, objective_mode, gl_fuse: !args.no_gl_fuse, even_reduction: args.even_reduction })
}

/// Best known `floor(log2 A)` keyed by `(n, d)`.
pub fn load_best_known(path: &Path) -> Result<HashMap<(usize, usize), i64>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    let mut out = HashMap::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        let field = |i: usize| -> Result<i64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::InvalidArgument(format!("{}: bad record {rec:?}", path.display())))
        };
        out.insert((field(0)? as usize, field(1)? as usize), field(2)?);
    }
    Ok(out)
}

fn header(v: VariantArg) -> &'static str {
    match v {
        VariantArg::C2wObjp => "C2'/Obj'",
        VariantArg::C2wObj => "C2'/Obj",
        VariantArg::C2Objp => "C2/Obj'",
        VariantArg::C2Obj => "C2/Obj",
        VariantArg::Delsarte => "Delsarte",
    }
}

pub fn run(cfg: &Config, cache: &KrawtchoukCache, args: TableArgs) -> Result<u8> {
    let ns = parse_range(&args.n)?;
    let ds = parse_range(&args.d)?;
    let variants = if args.variants.is_empty() { DEFAULT_VARIANTS.to_vec() } else { args.variants.clone() };
    if args.even_reduction {
        if let Some(d) = ds.iter().find(|d| *d % 2 == 1) {
            return Err(Error::InvalidArgument(format!("--even-reduction needs even distances (got d = {d})")));
        }
    }
    if args.r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    let best = match &args.best_known {
        Some(p) if p.exists() => Some(load_best_known(p)?),
        Some(p) => {
            log::warn!("best-known file {} not found; no cells are marked", p.display());
            None
        }
        None => {
            log::warn!("no best-known bounds given; no cells are marked");
            None
        }
    };
    let opts = args.limits.options(cfg)?;
    let solver = match args.solver {
        TableSolver::Exact => SolverArg::Exact,
        TableSolver::Float => SolverArg::Float,
    };
    let pairs: Vec<(usize, usize)> =
        ns.iter().flat_map(|&n| ds.iter().filter(move |&&d| d >= 1 && d <= n).map(move |&d| (n, d))).collect();
    let cells: Vec<(usize, usize, VariantArg)> =
        pairs.iter().flat_map(|&(n, d)| variants.iter().map(move |&v| (n, d, v))).collect();

    let jobs = args.jobs.or(cfg.jobs).unwrap_or(1).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<Result<Outcome>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(n, d, v)| {
                let r = if v == VariantArg::Delsarte { 1 } else { args.r };
                let out = solve::run(program(v, &args), r, n, d, solver, &opts, None, cache);
                log::info!("n={n} d={d} {}: {}", header(v), out.as_ref().map_or("error".into(), |o| o.status.clone()));
                out
            })
            .collect()
    });

    let mut code = 0u8;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, &(n, d)) in pairs.iter().enumerate() {
        let mut row = vec![n.to_string(), d.to_string()];
        for (j, &v) in variants.iter().enumerate() {
            let cell = match &results[i * variants.len() + j] {
                Ok(o) if o.optimal() => {
                    let mut s = o.bound_decimal().unwrap_or_default();
                    if let (Some(k), Some(best)) = (o.floor_log2(), &best) {
                        if best.get(&(n, d)) == Some(&k) {
                            s.push('*');
                        }
                    }
                    s
                }
                Ok(o) => {
                    log::warn!("n={n} d={d} {}: {}", header(v), o.status);
                    code = code.max(5);
                    String::new()
                }
                Err(e) => {
                    log::warn!("n={n} d={d} {}: {e}", header(v));
                    code = code.max(crate::exit_code(e));
                    String::new()
                }
            };
            row.push(cell);
        }
        rows.push(row);
    }

    let sink: Box<dyn Write> = match &args.csv {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut head = vec!["n".to_string(), "d".to_string()];
    head.extend(variants.iter().map(|&v| header(v).to_string()));
    w.write_record(&head).map_err(csv_err)?;
    for row in &rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("20-24:2").unwrap(), vec![20, 22, 24]);
        assert_eq!(parse_range("6, 4,4-5").unwrap(), vec![4, 5, 6]);
        assert_eq!(parse_range("").unwrap(), Vec::<usize>::new());
        assert_eq!(parse_range("9-8").unwrap(), Vec::<usize>::new());
        assert!(parse_range("1-3:0").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn best_known_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("best.csv");
        std::fs::write(&p, "n,d,k\n13,6,5\n20,8,8\n").unwrap();
        let b = load_best_known(&p).unwrap();
        assert_eq!(b.get(&(20, 8)), Some(&8));
        assert_eq!(b.len(), 2);
    }
}
