//! `dlin`: certified linear programming bounds for binary linear codes.

mod config;
mod solve;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dlin::indexset::gl_orbits;
use dlin::krawtchouk::KrawtchoukCache;
use dlin::oracle::{run_suite, Suite, SuiteOptions};
use dlin::solver::DEFAULT_DIGITS;
use dlin::Error;
use serde_json::json;

use config::Config;
use solve::{ExportTarget, FormatArg, ModelArgs, SolverArg, SolverArgs};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "dlin", version, about = "Linear programming bounds on binary linear codes")]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for persisted Krawtchouk tables.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Increase log verbosity (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and solve one program.
    Bound(BoundArgs),
    /// Solve a grid of (n, d) for several variants and write a CSV table.
    Table(table::TableArgs),
    /// Run brute-force verification suites.
    Verify(VerifyArgs),
    /// Write a program in LP or MPS format.
    Export(ExportArgs),
    /// Show the GL(r,2) orbits on compositions of n.
    Orbits(OrbitsArgs),
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = SolverArg::Exact)]
    solver: SolverArg,
    /// File format for `--solver export`.
    #[arg(long, value_enum, default_value_t = FormatArg::Lp)]
    format: FormatArg,
    /// Output file for `--solver export`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputArg::Text)]
    output: OutputArg,
    #[command(flatten)]
    limits: SolverArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    All,
    Fourier,
    Krawtchouk,
    Programs,
    Strength,
    Dual,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::All => Suite::ALL.to_vec(),
            SuiteArg::Fourier => vec![Suite::Fourier],
            SuiteArg::Krawtchouk => vec![Suite::Krawtchouk],
            SuiteArg::Programs => vec![Suite::Programs],
            SuiteArg::Strength => vec![Suite::Strength],
            SuiteArg::Dual => vec![Suite::Dual],
        }
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Largest n used by any check.
    #[arg(long)]
    max_n: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per randomized check.
    #[arg(long, default_value_t = SuiteOptions::default().samples)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = OutputArg::Text)]
    output: OutputArg,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = FormatArg::Lp)]
    format: FormatArg,
    #[arg(long)]
    out: PathBuf,
    /// Decimals written for coefficients without a terminating expansion.
    #[arg(long, default_value_t = DEFAULT_DIGITS)]
    digits: usize,
}

#[derive(Args, Debug)]
struct OrbitsArgs {
    #[arg(short = 'r', long)]
    r: usize,
    #[arg(short = 'n', long)]
    n: usize,
    /// List every orbit with its representative and size.
    #[arg(long)]
    list: bool,
    #[arg(long, value_enum, default_value_t = OutputArg::Text)]
    output: OutputArg,
}

/// Process exit classes.
mod exit {
    pub const VERIFY_FAILED: u8 = 1;
    pub const INVALID: u8 = 3;
    pub const LIMIT: u8 = 4;
    pub const SOLVER: u8 = 5;
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Dimension(_) | Error::InvalidArgument(_) | Error::Precondition(_) | Error::InvalidGroupElement(_) => {
            exit::INVALID
        }
        Error::OracleLimit(_) | Error::Capability(_) => exit::LIMIT,
        Error::Solver(_) | Error::CacheFormat(_) | Error::Io(_) => exit::SOLVER,
    }
}

struct Context {
    config: Config,
    cache: KrawtchoukCache,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> dlin::Result<u8> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let cache = match config.cache_dir(cli.cache_dir.as_deref()) {
        Some(dir) => KrawtchoukCache::with_dir(dir),
        None => KrawtchoukCache::new(),
    };
    let ctx = Context { config, cache };
    let code = match cli.command {
        Command::Bound(a) => bound(&ctx, a)?,
        Command::Table(a) => table::run(&ctx.config, &ctx.cache, a)?,
        Command::Verify(a) => verify(&ctx, a)?,
        Command::Export(a) => export(&ctx, a)?,
        Command::Orbits(a) => orbits(a)?,
    };
    if let Err(e) = ctx.cache.persist() {
        log::warn!("could not persist Krawtchouk tables: {e}");
    }
    Ok(code)
}

fn bound(ctx: &Context, a: BoundArgs) -> dlin::Result<u8> {
    let opts = a.limits.options(&ctx.config)?;
    let target = match (a.solver, a.out) {
        (SolverArg::Export, Some(path)) => Some(ExportTarget { format: a.format.into(), path, digits: DEFAULT_DIGITS }),
        (SolverArg::Export, None) => return Err(Error::InvalidArgument("--solver export needs --out".into())),
        _ => None,
    };
    let m = &a.model;
    let out = solve::run(m.program(), m.r, m.n, m.d, a.solver, &opts, target.as_ref(), &ctx.cache)?;
    match a.output {
        OutputArg::Text => print!("{}", out.to_text()),
        OutputArg::Json => {
            let mut v = out.to_json();
            v["schema_version"] = json!(SCHEMA_VERSION);
            v["command"] = json!("bound");
            println!("{}", serde_json::to_string_pretty(&v).expect("serializes"));
        }
    }
    Ok(if out.optimal() { 0 } else { exit::SOLVER })
}

fn verify(ctx: &Context, a: VerifyArgs) -> dlin::Result<u8> {
    let defaults = SuiteOptions::default();
    let opts = SuiteOptions {
        max_n: a.max_n.or(ctx.config.verify_max_n).unwrap_or(defaults.max_n),
        seed: a.seed.or(ctx.config.seed).unwrap_or(defaults.seed),
        samples: a.samples,
    };
    let mut all_passed = true;
    let mut suites = Vec::new();
    for suite in a.suite.suites() {
        let started = std::time::Instant::now();
        let report = run_suite(suite, &opts)?;
        let passed = report.all_passed();
        all_passed &= passed;
        match a.output {
            OutputArg::Text => {
                let verdict = if passed { "PASS" } else { "FAIL" };
                println!(
                    "{verdict} {suite}: {} checks, {} comparisons, {:.2}s",
                    report.len(),
                    report.comparisons(),
                    started.elapsed().as_secs_f64()
                );
                if log::log_enabled!(log::Level::Info) {
                    print!("{report}");
                } else {
                    for e in report.failures() {
                        println!("  FAIL {} [{}] lhs={} rhs={}", e.check, e.params, e.lhs, e.rhs);
                    }
                }
            }
            OutputArg::Json => suites.push(json!({
                "suite": suite.name(),
                "passed": passed,
                "checks": report.to_json(),
            })),
        }
    }
    if a.output == OutputArg::Json {
        let v = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "verify",
            "max_n": opts.max_n,
            "seed": opts.seed,
            "passed": all_passed,
            "suites": suites,
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("serializes"));
    }
    Ok(if all_passed { 0 } else { exit::VERIFY_FAILED })
}

fn export(ctx: &Context, a: ExportArgs) -> dlin::Result<u8> {
    let target = ExportTarget { format: a.format.into(), path: a.out, digits: a.digits };
    let m = &a.model;
    let out = solve::run(m.program(), m.r, m.n, m.d, SolverArg::Export, &Default::default(), Some(&target), &ctx.cache)?;
    println!(
        "wrote {} ({}, {} variables, {} constraints)",
        target.path.display(),
        out.program.label(),
        out.variables,
        out.constraints
    );
    Ok(0)
}

fn composition(c: &[u32]) -> String {
    let parts: Vec<String> = c.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

fn orbits(a: OrbitsArgs) -> dlin::Result<u8> {
    let p = gl_orbits(a.r, a.n)?;
    let orbits: Vec<_> = (0..p.num_orbits()).map(|o| (composition(p.representative(o).counts()), p.members(o).len())).collect();
    match a.output {
        OutputArg::Text => {
            println!("r = {}, n = {}: {} compositions, {} orbits", a.r, a.n, p.index_set().len(), p.num_orbits());
            if a.list {
                for (i, (rep, size)) in orbits.iter().enumerate() {
                    println!("{i:>6}  {rep}  size {size}");
                }
            }
        }
        OutputArg::Json => {
            let mut v = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "orbits",
                "r": a.r,
                "n": a.n,
                "compositions": p.index_set().len(),
                "orbits": p.num_orbits(),
            });
            if a.list {
                v["list"] = orbits.iter().map(|(rep, size)| json!({"representative": rep, "size": size})).collect();
            }
            println!("{}", serde_json::to_string_pretty(&v).expect("serializes"));
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_classes_are_distinct() {
        assert_eq!(exit_code(&Error::InvalidArgument(String::new())), 3);
        assert_eq!(exit_code(&Error::Capability(String::new())), 4);
        assert_eq!(exit_code(&Error::Solver(String::new())), 5);
    }

    #[test]
    fn r1_default_is_classic() {
        let cli = Cli::try_parse_from(["dlin", "bound", "-n", "13", "-d", "6"]).unwrap();
        let Command::Bound(a) = cli.command else { panic!() };
        assert_eq!(a.model.program(), solve::Program::Delsarte);
        let cli = Cli::try_parse_from(["dlin", "bound", "-r", "1", "-n", "13", "-d", "6", "--constraints", "c2-weak"]).unwrap();
        let Command::Bound(a) = cli.command else { panic!() };
        assert_ne!(a.model.program(), solve::Program::Delsarte);
    }
}
