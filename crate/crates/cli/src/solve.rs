//! Building and solving one program, shared by `bound` and `table`.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, ValueEnum};
use dlin::krawtchouk::KrawtchoukCache;
use dlin::lpbuild::{
    build_delsarte_with, build_delsarte_lin_with, BuildOptions, ConstraintMode, LpModel, ObjectiveMode, VariantSpec,
};
use dlin::rational::{floor_log2, floor_root, fraction_string, log2, root_f64, to_decimal_string, RationalJson};
use dlin::solver::{
    export_lp, solve_exact, solve_float, ExportFormat, ExportOptions, FloatStatus, PivotRule, SolveOptions, Status,
};
use dlin::{Error, Rational, Result};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    C2,
    C2Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Obj,
    ObjProduct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Exact,
    Float,
    Export,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Lp,
    Mps,
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Lp => ExportFormat::Lp,
            FormatArg::Mps => ExportFormat::Mps,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PivotArg {
    Bland,
    Dantzig,
}

/// Parameters that pick a program.
#[derive(Args, Clone, Debug)]
pub struct ModelArgs {
    /// Number of matrix rows (1 is classic Delsarte).
    #[arg(short = 'r', long, default_value_t = 1)]
    pub r: usize,
    /// Code length.
    #[arg(short = 'n', long)]
    pub n: usize,
    /// Minimum distance.
    #[arg(short = 'd', long)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = ConstraintArg::C2)]
    pub constraints: ConstraintArg,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Obj)]
    pub objective: ObjectiveArg,
    /// Keep one variable per composition instead of one per GL(r,2) orbit.
    #[arg(long)]
    pub no_gl_fuse: bool,
    /// Zero the variables that no even code can support (even d only).
    #[arg(long)]
    pub even_reduction: bool,
}

/// Solver limits and strategy.
#[derive(Args, Clone, Debug, Default)]
pub struct SolverArgs {
    #[arg(long)]
    pub max_pivots: Option<u64>,
    /// Wall-clock limit in seconds for one solve.
    #[arg(long)]
    pub max_time: Option<f64>,
    #[arg(long, value_enum)]
    pub pivot_rule: Option<PivotArg>,
    /// Skip the floating-point warm start.
    #[arg(long)]
    pub cold: bool,
}

impl SolverArgs {
    pub fn options(&self, cfg: &crate::config::Config) -> Result<SolveOptions> {
        let secs = self.max_time.or(cfg.max_time_secs);
        if let Some(s) = secs {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidArgument(format!("time limit must be positive (got {s})")));
            }
        }
        Ok(SolveOptions {
            max_pivots: self.max_pivots.or(cfg.max_pivots),
            max_time: secs.map(Duration::from_secs_f64),
            pivot_rule: match self.pivot_rule {
                Some(PivotArg::Dantzig) => PivotRule::Dantzig,
                _ => PivotRule::Bland,
            },
            warm_start: !self.cold,
            ..SolveOptions::default()
        })
    }
}

/// A program to build: classic Delsarte or one member of the `r`-row family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Program {
    Delsarte,
    Lin(VariantSpec),
}

impl Program {
    pub fn label(&self) -> String {
        match self {
            Program::Delsarte => "Delsarte".to_string(),
            Program::Lin(v) => v.label(),
        }
    }
}

impl ModelArgs {
    pub fn variant(&self) -> VariantSpec {
        VariantSpec {
            constraint_mode: match self.constraints {
                ConstraintArg::C2 => ConstraintMode::C2,
                ConstraintArg::C2Weak => ConstraintMode::C2Weak,
            },
            objective_mode: match self.objective {
                ObjectiveArg::Obj => ObjectiveMode::Obj,
                ObjectiveArg::ObjProduct => ObjectiveMode::ObjProduct,
            },
            gl_fuse: !self.no_gl_fuse,
            even_reduction: self.even_reduction,
        }
    }

    /// At `r = 1` the default variant is the classic program over distance
    /// distribution coefficients.
    pub fn program(&self) -> Program {
        let v = self.variant();
        if self.r == 1 && v == VariantSpec::default() {
            Program::Delsarte
        } else {
            Program::Lin(v)
        }
    }
}

pub fn build(program: Program, r: usize, n: usize, d: usize, cache: &KrawtchoukCache) -> Result<LpModel> {
    match program {
        Program::Delsarte => build_delsarte_with(n, d, cache),
        Program::Lin(v) => build_delsarte_lin_with(r, n, d, v, BuildOptions { cache, all_subsets: false }),
    }
}

#[derive(Clone, Debug)]
pub enum Measured {
    Exact(Rational),
    Float(f64),
    Missing,
}

/// Everything reported about one program.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub program: Program,
    pub r: usize,
    pub n: usize,
    pub d: usize,
    pub solver: SolverArg,
    pub status: String,
    pub value: Measured,
    /// The model value bounds `|C|^root`.
    pub root: u32,
    pub pivots: u64,
    pub warm_started: bool,
    pub orientation: String,
    pub build_time: Duration,
    pub solve_time: Duration,
    pub variables: usize,
    pub constraints: usize,
    pub nonzeros: usize,
    pub eliminated: usize,
    pub exported: Option<PathBuf>,
}

fn to_kebab<T: serde::Serialize>(v: T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

impl Outcome {
    pub fn optimal(&self) -> bool {
        self.status == "optimal" || self.status == "exported"
    }

    /// Bound on the code size (the `root`-th root of the value), in the same
    /// rendering the tables use.
    pub fn bound_decimal(&self) -> Option<String> {
        match &self.value {
            Measured::Exact(q) if self.root == 1 => Some(to_decimal_string(q, 2)),
            Measured::Exact(q) => Some(format!("{:.2}", root_f64(q, self.root))),
            Measured::Float(x) => Some(format!("{:.2}", x.max(0.0).powf(1.0 / self.root as f64))),
            Measured::Missing => None,
        }
    }

    pub fn log2(&self) -> Option<f64> {
        match &self.value {
            Measured::Exact(q) => Some(log2(q) / self.root as f64),
            Measured::Float(x) => Some(x.log2() / self.root as f64),
            Measured::Missing => None,
        }
    }

    /// Floor of the code-size bound. Exact for exact values.
    pub fn floor(&self) -> Option<String> {
        match &self.value {
            Measured::Exact(q) => Some(floor_root(q, self.root).to_string()),
            Measured::Float(x) => Some(format!("{}", (x.max(0.0).powf(1.0 / self.root as f64) + 1e-7).floor())),
            Measured::Missing => None,
        }
    }

    /// `floor(log2(bound))`, exact for exact values.
    pub fn floor_log2(&self) -> Option<i64> {
        match &self.value {
            Measured::Exact(q) => floor_log2(q).map(|k| k.div_euclid(self.root as i64)),
            Measured::Float(x) if *x > 0.0 => Some(((x.log2() + 1e-9) / self.root as f64).floor() as i64),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let value = match &self.value {
            Measured::Exact(q) => serde_json::to_value(RationalJson::new(q, 2)).expect("serializes"),
            _ => Value::Null,
        };
        let value_f64 = match &self.value {
            Measured::Exact(q) => json!(dlin::rational::to_f64(q)),
            Measured::Float(x) => json!(x),
            Measured::Missing => Value::Null,
        };
        json!({
            "r": self.r,
            "n": self.n,
            "d": self.d,
            "variant": self.program.label(),
            "solver": to_kebab(self.solver_name()),
            "status": self.status,
            "value": value,
            "value_f64": value_f64,
            "value_root": self.root,
            "bound": {
                "decimal": self.bound_decimal(),
                "floor": self.floor(),
                "log2": self.log2(),
                "floor_log2": self.floor_log2(),
                "is_root": self.root > 1,
            },
            "timings": {
                "build_secs": self.build_time.as_secs_f64(),
                "solve_secs": self.solve_time.as_secs_f64(),
            },
            "pivots": self.pivots,
            "warm_started": self.warm_started,
            "orientation": self.orientation,
            "model": {
                "variables": self.variables,
                "constraints": self.constraints,
                "nonzeros": self.nonzeros,
                "eliminated": self.eliminated,
            },
            "export_path": self.exported.as_ref().map(|p| p.display().to_string()),
        })
    }

    fn solver_name(&self) -> &'static str {
        match self.solver {
            SolverArg::Exact => "exact",
            SolverArg::Float => "float",
            SolverArg::Export => "export",
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k:<12}{v}\n"));
        line("r", self.r.to_string());
        line("n", self.n.to_string());
        line("d", self.d.to_string());
        line("variant", self.program.label());
        line("solver", self.solver_name().to_string());
        line("status", self.status.clone());
        match &self.value {
            Measured::Exact(q) => line("value", format!("{} ({})", fraction_string(q), to_decimal_string(q, 2))),
            Measured::Float(x) => line("value", format!("{x:.9} (floating point, uncertified)")),
            Measured::Missing => {}
        }
        if let Some(b) = self.bound_decimal() {
            if self.root > 1 {
                line("bound", format!("{b} (value^(1/{}))", self.root));
            }
            line("log2", format!("{:.4}", self.log2().unwrap_or(f64::NAN)));
            line("floor", self.floor().unwrap_or_default());
        }
        if let Some(p) = &self.exported {
            line("written", p.display().to_string());
        }
        line("model", format!("{} variables, {} constraints, {} nonzeros, {} eliminated",
            self.variables, self.constraints, self.nonzeros, self.eliminated));
        if self.solver != SolverArg::Export {
            line("pivots", format!("{} ({}{})", self.pivots, self.orientation,
                if self.warm_started { ", warm started" } else { "" }));
        }
        line("time", format!("build {:.3}s, solve {:.3}s", self.build_time.as_secs_f64(), self.solve_time.as_secs_f64()));
        out
    }
}

pub struct ExportTarget {
    pub format: ExportFormat,
    pub path: PathBuf,
    pub digits: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    program: Program,
    r: usize,
    n: usize,
    d: usize,
    solver: SolverArg,
    opts: &SolveOptions,
    export: Option<&ExportTarget>,
    cache: &KrawtchoukCache,
) -> Result<Outcome> {
    let started = Instant::now();
    let model = build(program, r, n, d, cache)?;
    let build_time = started.elapsed();
    let mut out = Outcome {
        program,
        r: model.meta.r,
        n,
        d,
        solver,
        status: String::new(),
        value: Measured::Missing,
        root: model.meta.value_root,
        pivots: 0,
        warm_started: false,
        orientation: String::new(),
        build_time,
        solve_time: Duration::ZERO,
        variables: model.num_variables(),
        constraints: model.num_constraints(),
        nonzeros: model.nonzeros(),
        eliminated: model.meta.eliminated,
        exported: None,
    };
    let t = Instant::now();
    match solver {
        SolverArg::Exact => {
            let res = solve_exact(&model, opts)?;
            out.status = to_kebab(res.status);
            out.pivots = res.pivots;
            out.warm_started = res.warm_started;
            out.orientation = to_kebab(res.orientation);
            if res.status == Status::Optimal {
                out.value = res.objective.map_or(Measured::Missing, Measured::Exact);
            }
        }
        SolverArg::Float => {
            let res = solve_float(&model, opts)?;
            out.status = to_kebab(res.status);
            out.pivots = res.pivots;
            out.orientation = to_kebab(res.orientation);
            if res.status == FloatStatus::Optimal {
                out.value = res.objective.map_or(Measured::Missing, Measured::Float);
            }
        }
        SolverArg::Export => {
            let target = export.ok_or_else(|| Error::InvalidArgument("export needs --out".into()))?;
            export_lp(&model, target.format, &target.path, &ExportOptions { digits: target.digits })?;
            out.status = "exported".into();
            out.exported = Some(target.path.clone());
        }
    }
    out.solve_time = t.elapsed();
    Ok(out)
}
