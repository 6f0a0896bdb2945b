use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indexset::MultiIndex;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Eq => lhs == rhs,
            Sense::Ge => lhs >= rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ObjSense {
    Maximize,
    Minimize,
}

/// Which constraint of the source program a row encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Provenance {
    C1,
    C2,
    C2Weak,
    C3,
    C4,
    DC1,
    DC2,
    DC3,
    DC4,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::C1 => "C1",
            Provenance::C2 => "C2",
            Provenance::C2Weak => "C2'",
            Provenance::C3 => "C3",
            Provenance::C4 => "C4",
            Provenance::DC1 => "d.C1",
            Provenance::DC2 => "d.C2",
            Provenance::DC3 => "d.C3",
            Provenance::DC4 => "d.C4",
        };
        f.write_str(s)
    }
}

/// What a column stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VarTag {
    /// `a_i` of the classic program.
    Delsarte(usize),
    /// `phi_alpha`.
    Phi(MultiIndex),
    /// One `phi` shared by a whole `GL(r,2)` orbit, named by its representative.
    Orbit { rep: MultiIndex, size: usize },
    /// `f(X)` at the cube point with the given index.
    Cube(usize),
    /// `g_U(X)`.
    Dual { subset: u32, point: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub tag: VarTag,
}

impl Variable {
    pub fn new(tag: VarTag) -> Self {
        let name = match &tag {
            VarTag::Delsarte(i) => format!("a_{i}"),
            VarTag::Phi(a) | VarTag::Orbit { rep: a, .. } => phi_name(a),
            VarTag::Cube(x) => format!("f_x{x}"),
            VarTag::Dual { subset, point } => format!("g_U{subset}_x{point}"),
        };
        Variable { name, tag }
    }
}

/// `phi_a4_1_0_3` for counts `(4,1,0,3)`.
pub fn phi_name(alpha: &MultiIndex) -> String {
    let parts: Vec<String> = alpha.counts().iter().map(u32::to_string).collect();
    format!("phi_a{}", parts.join("_"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    /// Sorted by variable, no zeros, no repeats.
    pub coeffs: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
    pub tag: Provenance,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    pub sense: ObjSense,
    pub coeffs: Vec<(usize, Rational)>,
    pub offset: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ModelKind {
    Delsarte,
    DelsarteLin,
    CubePrimal,
    CubeDual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ConstraintMode {
    C2,
    C2Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ObjectiveMode {
    Obj,
    ObjProduct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VariantSpec {
    pub constraint_mode: ConstraintMode,
    pub objective_mode: ObjectiveMode,
    pub gl_fuse: bool,
    pub even_reduction: bool,
}

impl Default for VariantSpec {
    fn default() -> Self {
        VariantSpec {
            constraint_mode: ConstraintMode::C2,
            objective_mode: ObjectiveMode::Obj,
            gl_fuse: true,
            even_reduction: false,
        }
    }
}

impl VariantSpec {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.even_reduction && d % 2 == 1 {
            return Err(Error::InvalidArgument(format!("even reduction needs even d (got d = {d})")));
        }
        Ok(())
    }

    /// Short label such as `C2/Obj`.
    pub fn label(&self) -> String {
        let c = match self.constraint_mode {
            ConstraintMode::C2 => "C2",
            ConstraintMode::C2Weak => "C2'",
        };
        let o = match self.objective_mode {
            ObjectiveMode::Obj => "Obj",
            ObjectiveMode::ObjProduct => "Obj'",
        };
        format!("{c}/{o}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelMeta {
    pub kind: ModelKind,
    pub r: usize,
    pub n: usize,
    pub d: usize,
    pub variant: Option<VariantSpec>,
    /// The optimum bounds `|C|^root`; reported values take this root.
    pub value_root: u32,
    /// Variables removed because they are forced to zero.
    pub eliminated: usize,
    pub notes: Vec<String>,
}

/// A sparse rational linear program. Variables are free; every bound is a row.
#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    pub variables: Vec<Variable>,
    pub objective: Objective,
    pub constraints: Vec<Constraint>,
    pub meta: ModelMeta,
}

/// Sort by index, merge repeats and drop zeros.
pub fn normalize_coeffs(mut coeffs: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
    coeffs.sort_by_key(|c| c.0);
    let mut out: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
    for (j, v) in coeffs {
        match out.last_mut() {
            Some((k, acc)) if *k == j => *acc += v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

impl LpModel {
    pub fn new(meta: ModelMeta, sense: ObjSense) -> Self {
        LpModel {
            variables: Vec::new(),
            objective: Objective { sense, coeffs: Vec::new(), offset: Rational::zero() },
            constraints: Vec::new(),
            meta,
        }
    }

    pub fn add_variable(&mut self, tag: VarTag) -> usize {
        self.variables.push(Variable::new(tag));
        self.variables.len() - 1
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, Rational)>) {
        self.objective.coeffs = normalize_coeffs(coeffs);
    }

    /// Adds a row unless it is empty and trivially satisfied.
    pub fn add_constraint(
        &mut self,
        coeffs: Vec<(usize, Rational)>,
        sense: Sense,
        rhs: Rational,
        tag: Provenance,
        label: impl Into<String>,
    ) {
        let coeffs = normalize_coeffs(coeffs);
        if coeffs.is_empty() && sense.holds(&Rational::zero(), &rhs) {
            return;
        }
        self.constraints.push(Constraint { coeffs, sense, rhs, tag, label: label.into() });
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.coeffs.len()).sum()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Well-formedness: indices in range, coefficient lists normalized.
    pub fn validate(&self) -> Result<()> {
        let nv = self.variables.len();
        let check = |coeffs: &[(usize, Rational)], what: &str| -> Result<()> {
            for w in coeffs.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(Error::InvalidArgument(format!("{what}: coefficients not sorted")));
                }
            }
            if let Some((j, _)) = coeffs.iter().find(|(j, _)| *j >= nv) {
                return Err(Error::InvalidArgument(format!("{what}: variable {j} not declared")));
            }
            Ok(())
        };
        check(&self.objective.coeffs, "objective")?;
        for (i, c) in self.constraints.iter().enumerate() {
            check(&c.coeffs, &format!("row {i}"))?;
        }
        Ok(())
    }

    pub fn row_value(&self, row: usize, x: &[Rational]) -> Rational {
        self.constraints[row].coeffs.iter().map(|(j, v)| v * &x[*j]).sum()
    }

    /// Objective including the constant offset.
    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        let s: Rational = self.objective.coeffs.iter().map(|(j, v)| v * &x[*j]).sum();
        s + &self.objective.offset
    }

    /// Indices of violated rows.
    pub fn violations(&self, x: &[Rational]) -> Vec<usize> {
        (0..self.constraints.len())
            .filter(|&i| {
                let c = &self.constraints[i];
                !c.sense.holds(&self.row_value(i, x), &c.rhs)
            })
            .collect()
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.variables.len() && self.violations(x).is_empty()
    }

    /// Largest absolute violation, zero when feasible.
    pub fn max_violation(&self, x: &[Rational]) -> Rational {
        let mut worst = Rational::zero();
        for (i, c) in self.constraints.iter().enumerate() {
            let lhs = self.row_value(i, x);
            let gap = match c.sense {
                Sense::Le => &lhs - &c.rhs,
                Sense::Ge => &c.rhs - &lhs,
                Sense::Eq => (&lhs - &c.rhs).abs(),
            };
            if gap > worst {
                worst = gap;
            }
        }
        worst
    }

    /// Row counts per provenance tag, in first-seen order.
    pub fn provenance_counts(&self) -> Vec<(Provenance, usize)> {
        let mut out: Vec<(Provenance, usize)> = Vec::new();
        for c in &self.constraints {
            match out.iter_mut().find(|(p, _)| *p == c.tag) {
                Some((_, k)) => *k += 1,
                None => out.push((c.tag, 1)),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn normalization_merges_and_drops() {
        let c = normalize_coeffs(vec![(2, int(1)), (0, int(3)), (2, int(-1)), (1, int(0)), (0, int(1))]);
        assert_eq!(c, vec![(0, int(4))]);
    }

    #[test]
    fn trivial_rows_are_skipped() {
        let meta = ModelMeta {
            kind: ModelKind::Delsarte,
            r: 1,
            n: 1,
            d: 1,
            variant: None,
            value_root: 1,
            eliminated: 0,
            notes: vec![],
        };
        let mut m = LpModel::new(meta, ObjSense::Maximize);
        let x = m.add_variable(VarTag::Delsarte(0));
        m.add_constraint(vec![(x, int(0))], Sense::Ge, int(0), Provenance::C2, "");
        assert_eq!(m.num_constraints(), 0);
        m.add_constraint(vec![], Sense::Ge, int(1), Provenance::C2, "");
        assert_eq!(m.num_constraints(), 1);
        assert!(m.validate().is_ok());
        assert_eq!(m.variables[0].name, "a_0");
    }

    #[test]
    fn names() {
        let a = MultiIndex::from_counts(2, vec![4, 1, 0, 3]).unwrap();
        assert_eq!(Variable::new(VarTag::Phi(a)).name, "phi_a4_1_0_3");
        assert_eq!(Variable::new(VarTag::Dual { subset: 3, point: 17 }).name, "g_U3_x17");
    }
}
