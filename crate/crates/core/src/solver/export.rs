//! CPLEX-LP and MPS writers.
//!
//! Coefficients are exact decimals when the expansion terminates. Otherwise
//! the value is rounded to a fixed number of decimals and the exact fraction
//! is recorded in a comment. The header states which mode was used. Output
//! depends only on the model, so equal models give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_traits::Zero;

use crate::error::Result;
use crate::lpbuild::{LpModel, ObjSense, Provenance, Sense};
use crate::rational::{exact_decimal, fraction_string, to_decimal_string, Rational};

pub const DEFAULT_DIGITS: usize = 40;
const OFFSET_VAR: &str = "const_one";
const TERMS_PER_LINE: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Lp,
    Mps,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Lp => "lp",
            ExportFormat::Mps => "mps",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExportOptions {
    /// Decimals written for non-terminating coefficients.
    pub digits: usize,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions { digits: DEFAULT_DIGITS }
    }
}

struct Numbers<'a> {
    opts: &'a ExportOptions,
    approximated: Vec<String>,
}

impl Numbers<'_> {
    fn fmt(&mut self, q: &Rational, context: impl FnOnce() -> String) -> String {
        match exact_decimal(q) {
            Some(s) => s,
            None => {
                self.approximated.push(format!("{} = {}", context(), fraction_string(q)));
                to_decimal_string(q, self.opts.digits)
            }
        }
    }
}

fn tag_name(p: Provenance) -> String {
    p.to_string().replace('\'', "w").replace('.', "")
}

fn row_names(model: &LpModel) -> Vec<String> {
    model.constraints.iter().enumerate().map(|(i, c)| format!("r{i}_{}", tag_name(c.tag))).collect()
}

/// Render the model as text.
pub fn write_lp(model: &LpModel, format: ExportFormat, opts: &ExportOptions) -> Result<String> {
    model.validate()?;
    let mut nums = Numbers { opts, approximated: Vec::new() };
    let body = match format {
        ExportFormat::Lp => lp_body(model, &mut nums),
        ExportFormat::Mps => mps_body(model, &mut nums),
    };
    let c = match format {
        ExportFormat::Lp => "\\",
        ExportFormat::Mps => "*",
    };
    let mut out = String::new();
    let m = &model.meta;
    writeln!(out, "{c} model {:?} r={} n={} d={}", m.kind, m.r, m.n, m.d).unwrap();
    if let Some(v) = &m.variant {
        writeln!(out, "{c} variant {}", v.label()).unwrap();
    }
    writeln!(out, "{c} optimum bounds |C|^{}", m.value_root).unwrap();
    writeln!(out, "{c} variables {} rows {} nonzeros {}", model.num_variables(), model.num_constraints(), model.nonzeros()).unwrap();
    if nums.approximated.is_empty() {
        writeln!(out, "{c} coefficients: exact decimals").unwrap();
    } else {
        writeln!(
            out,
            "{c} coefficients: {} non-terminating values rounded to {} decimals; exact fractions follow",
            nums.approximated.len(),
            opts.digits
        )
        .unwrap();
        for line in &nums.approximated {
            writeln!(out, "{c}   {line}").unwrap();
        }
    }
    if !model.objective.offset.is_zero() {
        writeln!(out, "{c} the objective constant is carried by {OFFSET_VAR}, fixed to 1").unwrap();
    }
    out.push_str(&body);
    Ok(out)
}

/// Write the model to `path`.
pub fn export_lp(model: &LpModel, format: ExportFormat, path: &Path, opts: &ExportOptions) -> Result<()> {
    fs::write(path, write_lp(model, format, opts)?)?;
    Ok(())
}

fn push_terms(out: &mut String, terms: &[(String, String)], first_line: bool) {
    let mut count = 0;
    for (k, (coef, name)) in terms.iter().enumerate() {
        if count == TERMS_PER_LINE {
            out.push_str("\n   ");
            count = 0;
        }
        let (sign, mag) = match coef.strip_prefix('-') {
            Some(rest) => ("-", rest),
            None => ("+", coef.as_str()),
        };
        if k == 0 && first_line && sign == "+" {
            write!(out, " {mag} {name}").unwrap();
        } else {
            write!(out, " {sign} {mag} {name}").unwrap();
        }
        count += 1;
    }
}

fn lp_body(model: &LpModel, nums: &mut Numbers) -> String {
    let mut out = String::new();
    out.push_str(match model.objective.sense {
        ObjSense::Maximize => "Maximize\n",
        ObjSense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    let mut terms: Vec<(String, String)> = model
        .objective
        .coeffs
        .iter()
        .map(|(j, v)| {
            let name = &model.variables[*j].name;
            (nums.fmt(v, || format!("obj {name}")), name.clone())
        })
        .collect();
    if !model.objective.offset.is_zero() {
        terms.push((nums.fmt(&model.objective.offset, || "obj constant".into()), OFFSET_VAR.into()));
    }
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&model.variables.first().map_or(OFFSET_VAR.to_string(), |v| v.name.clone()));
    }
    push_terms(&mut out, &terms, true);
    out.push_str("\nSubject To\n");
    for (c, name) in model.constraints.iter().zip(row_names(model)) {
        write!(out, " {name}:").unwrap();
        let terms: Vec<(String, String)> = c
            .coeffs
            .iter()
            .map(|(j, v)| {
                let var = &model.variables[*j].name;
                (nums.fmt(v, || format!("{name} {var}")), var.clone())
            })
            .collect();
        if terms.is_empty() {
            write!(out, " 0 {}", model.variables.first().map_or(OFFSET_VAR, |v| v.name.as_str())).unwrap();
        }
        push_terms(&mut out, &terms, true);
        let rhs = nums.fmt(&c.rhs, || format!("{name} rhs"));
        writeln!(out, " {} {rhs}", c.sense.symbol()).unwrap();
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        writeln!(out, " {} free", v.name).unwrap();
    }
    if !model.objective.offset.is_zero() {
        writeln!(out, " {OFFSET_VAR} = 1").unwrap();
    }
    out.push_str("End\n");
    out
}

fn mps_line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str) {
    // Fixed-format field positions; longer names shift later fields right.
    let mut line = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4}");
    while line.ends_with(' ') {
        line.pop();
    }
    out.push_str(&line);
    out.push('\n');
}

fn mps_body(model: &LpModel, nums: &mut Numbers) -> String {
    let mut out = String::new();
    out.push_str("NAME          DLIN\n");
    if model.objective.sense == ObjSense::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }
    out.push_str("ROWS\n");
    mps_line(&mut out, "N", "obj", "", "");
    let names = row_names(model);
    for (c, name) in model.constraints.iter().zip(&names) {
        let t = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        mps_line(&mut out, t, name, "", "");
    }
    let mut columns: Vec<Vec<(String, &Rational)>> = vec![Vec::new(); model.num_variables()];
    for (j, v) in &model.objective.coeffs {
        columns[*j].push(("obj".into(), v));
    }
    for (c, name) in model.constraints.iter().zip(&names) {
        for (j, v) in &c.coeffs {
            columns[*j].push((name.clone(), v));
        }
    }
    out.push_str("COLUMNS\n");
    for (var, col) in model.variables.iter().zip(&columns) {
        if col.is_empty() {
            mps_line(&mut out, "", &var.name, "obj", "0");
        }
        for (row, v) in col {
            let s = nums.fmt(v, || format!("{row} {}", var.name));
            mps_line(&mut out, "", &var.name, row, &s);
        }
    }
    if !model.objective.offset.is_zero() {
        let s = nums.fmt(&model.objective.offset, || "obj constant".into());
        mps_line(&mut out, "", OFFSET_VAR, "obj", &s);
    }
    out.push_str("RHS\n");
    for (c, name) in model.constraints.iter().zip(&names) {
        if !c.rhs.is_zero() {
            let s = nums.fmt(&c.rhs, || format!("{name} rhs"));
            mps_line(&mut out, "", "RHS", name, &s);
        }
    }
    out.push_str("BOUNDS\n");
    for v in &model.variables {
        mps_line(&mut out, "FR", "BND", &v.name, "");
    }
    if !model.objective.offset.is_zero() {
        mps_line(&mut out, "FX", "BND", OFFSET_VAR, "1");
    }
    out.push_str("ENDATA\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpbuild::build_delsarte;
    use crate::rational::ratio;

    #[test]
    fn deterministic_and_exact() {
        let m = build_delsarte(13, 6).unwrap();
        for f in [ExportFormat::Lp, ExportFormat::Mps] {
            let a = write_lp(&m, f, &ExportOptions::default()).unwrap();
            let b = write_lp(&m, f, &ExportOptions::default()).unwrap();
            assert_eq!(a, b);
            assert!(a.contains("coefficients: exact decimals"));
            assert!(a.is_ascii() && !a.contains('\r'));
        }
    }

    #[test]
    fn non_terminating_values_are_annotated() {
        let mut m = build_delsarte(4, 2).unwrap();
        m.constraints[1].rhs = ratio(1, 3);
        let text = write_lp(&m, ExportFormat::Lp, &ExportOptions { digits: 5 }).unwrap();
        assert!(text.contains("rounded to 5 decimals"));
        assert!(text.contains("= 1/3"));
        assert!(text.contains("0.33333"));
    }
}
