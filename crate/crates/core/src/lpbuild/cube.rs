use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::cube::{act_gl, partial_fourier, BitMatrix, CubeFunction, RowSubset, DEFAULT_ORACLE_BITS};
use crate::error::{Error, Result};
use crate::indexset::{gl_group, GlElement};
use crate::lpbuild::model::*;
use crate::lpbuild::symmetric::check_params;
use crate::oracle::Report;
use crate::rational::{int, pow2, Rational};

fn check_oracle(r: usize, n: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    if r * n > DEFAULT_ORACLE_BITS {
        return Err(Error::OracleLimit(format!("cube programs need r*n <= {DEFAULT_ORACLE_BITS} (got {})", r * n)));
    }
    Ok(())
}

/// Points `Y` with `Y_i = Z_i` off `S`, paired with `prod_{i in S} chi_{z_i}(y_i)`.
fn partial_character_support(z: &BitMatrix, s: RowSubset) -> Vec<(usize, i32)> {
    let (r, n) = (z.r(), z.n());
    let in_s: Vec<usize> = (0..r).filter(|&i| s.contains(i)).collect();
    let fixed = (0..r).filter(|&i| !s.contains(i)).fold(0usize, |acc, i| acc | ((z.rows()[i] as usize) << (i * n)));
    let free_bits = in_s.len() * n;
    let mut out = Vec::with_capacity(1 << free_bits);
    for code in 0..1usize << free_bits {
        let mut idx = fixed;
        let mut parity = 0u32;
        for (k, &i) in in_s.iter().enumerate() {
            let y = (code >> (k * n)) & ((1 << n) - 1);
            idx |= y << (i * n);
            parity += (z.rows()[i] as usize & y).count_ones();
        }
        out.push((idx, if parity % 2 == 0 { 1 } else { -1 }));
    }
    out
}

/// Smallest index in the `GL(r,2)` orbit of every cube point.
fn gl_orbit_minima(r: usize, n: usize, group: &[GlElement]) -> Vec<usize> {
    (0..1usize << (r * n))
        .map(|idx| {
            let x = BitMatrix::from_index(idx, r, n);
            group.iter().map(|t| act_gl(t.matrix(), &x).expect("valid action").index()).min().expect("nonempty")
        })
        .collect()
}

/// Row weights `|u^T X|` are all `0` or at least `d`.
fn admissible(x: &BitMatrix, d: usize) -> bool {
    (1..1usize << x.r()).all(|u| {
        let w = crate::cube::combine_rows(u, x.rows()).count_ones() as usize;
        w == 0 || w >= d
    })
}

fn cube_meta(kind: ModelKind, r: usize, n: usize, d: usize) -> ModelMeta {
    ModelMeta { kind, r, n, d, variant: None, value_root: 1, eliminated: 0, notes: Vec::new() }
}

/// The program over all `f(X)`, with every constraint written out verbatim.
pub fn build_cube_primal(r: usize, n: usize, d: usize) -> Result<LpModel> {
    check_params(n, d)?;
    check_oracle(r, n)?;
    let size = 1usize << (r * n);
    let mut m = LpModel::new(cube_meta(ModelKind::CubePrimal, r, n, d), ObjSense::Maximize);
    for x in 0..size {
        m.add_variable(VarTag::Cube(x));
    }
    // Points with rows 2..r zero occupy the first 2^n indices.
    m.set_objective((0..1usize << n).map(|x| (x, int(1))).collect());
    m.add_constraint(vec![(0, int(1))], Sense::Eq, int(1), Provenance::C1, "f(0) = 1");
    for s in RowSubset::all(r) {
        for x in 0..size {
            let z = BitMatrix::from_index(x, r, n);
            // Scaled by 2^{|S|n} so every coefficient is +-1.
            let coeffs = partial_character_support(&z, s).into_iter().map(|(y, c)| (y, int(c as i64))).collect();
            m.add_constraint(coeffs, Sense::Ge, int(0), Provenance::C2, format!("F_S(f)(X) >= 0, S={:#b} X={x}", s.0));
        }
    }
    for x in 0..size {
        let w = (x & ((1 << n) - 1)).count_ones() as usize;
        if w >= 1 && w < d {
            m.add_constraint(vec![(x, int(1))], Sense::Eq, int(0), Provenance::C3, format!("f(X) = 0, X={x}"));
        }
    }
    let minima = gl_orbit_minima(r, n, &gl_group(r)?);
    for (x, &rep) in minima.iter().enumerate() {
        if rep != x {
            m.add_constraint(vec![(x, int(1)), (rep, int(-1))], Sense::Eq, int(0), Provenance::C4, format!("f({x}) = f({rep})"));
        }
    }
    Ok(m)
}

fn dual_var(subset: u32, point: usize, r: usize, n: usize) -> usize {
    (subset as usize - 1) * (1usize << (r * n)) + point
}

/// Objective weight of `g_U(X)`: `F_U(g_U)(0)` picks `2^{-|U|n}` on points
/// vanishing off `U`.
fn dual_objective_weight(subset: RowSubset, x: &BitMatrix) -> Rational {
    let off_zero = (0..x.r()).all(|i| subset.contains(i) || x.rows()[i] == 0);
    if off_zero {
        pow2(-((subset.len() * x.n()) as i64))
    } else {
        Rational::zero()
    }
}

/// Coefficients of `sum_U F_U(g_U)(Z)` over the dual variables, accumulated into `acc`.
fn add_fourier_terms(acc: &mut Vec<(usize, Rational)>, z: &BitMatrix, weight: &Rational) {
    let (r, n) = (z.r(), z.n());
    for s in (1..1u32 << r).map(RowSubset) {
        let scale = pow2(-((s.len() * n) as i64)) * weight;
        for (y, c) in partial_character_support(z, s) {
            acc.push((dual_var(s.0, y, r, n), &scale * int(c as i64)));
        }
    }
}

/// The minimization program over `g_U`, `U` a nonempty subset of `[r]`.
pub fn build_cube_dual(r: usize, n: usize, d: usize) -> Result<LpModel> {
    check_params(n, d)?;
    check_oracle(r, n)?;
    let size = 1usize << (r * n);
    let mut m = LpModel::new(cube_meta(ModelKind::CubeDual, r, n, d), ObjSense::Minimize);
    for s in 1..1u32 << r {
        for x in 0..size {
            m.add_variable(VarTag::Dual { subset: s, point: x });
        }
    }
    let mut obj = Vec::new();
    for s in (1..1u32 << r).map(RowSubset) {
        for x in 0..size {
            let w = dual_objective_weight(s, &BitMatrix::from_index(x, r, n));
            if !w.is_zero() {
                obj.push((dual_var(s.0, x, r, n), w));
            }
        }
    }
    m.set_objective(obj);
    m.objective.offset = Rational::one();

    for j in 0..m.num_variables() {
        let label = format!("{} >= 0", m.variables[j].name);
        m.add_constraint(vec![(j, int(1))], Sense::Ge, int(0), Provenance::DC1, label);
    }
    for s in 1..1u32 << r {
        let j = dual_var(s, 0, r, n);
        m.add_constraint(vec![(j, int(1))], Sense::Eq, int(0), Provenance::DC2, format!("g_U{s}(0) = 0"));
    }
    let group = gl_group(r)?;
    let minima = gl_orbit_minima(r, n, &group);
    let one = Rational::one();
    for x in 1..size {
        let xm = BitMatrix::from_index(x, r, n);
        if minima[x] != x || !admissible(&xm, d) {
            continue;
        }
        let mut acc = Vec::new();
        for t in &group {
            add_fourier_terms(&mut acc, &act_gl(t.matrix(), &xm)?, &one);
        }
        m.add_constraint(acc, Sense::Le, int(0), Provenance::DC3, format!("GL-summed F(g)(TX) <= 0, X={x}"));
    }
    for xv in 0..1u64 << n {
        if (xv.count_ones() as usize) < d {
            continue;
        }
        let mut acc = Vec::new();
        for v in 1..1usize << r {
            let rows = (0..r).map(|i| if (v >> i) & 1 == 1 { xv } else { 0 }).collect();
            add_fourier_terms(&mut acc, &BitMatrix::from_rows(rows, n)?, &one);
        }
        m.add_constraint(acc, Sense::Le, int(-1), Provenance::DC4, format!("sum_v F(g)(v x^T) <= -1, x={xv}"));
    }
    Ok(m)
}

/// A point `{g_U}` of the cube dual.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub r: usize,
    pub n: usize,
    pub d: usize,
    /// `g_U` keyed by the subset mask; absent subsets are zero.
    pub g: BTreeMap<u32, CubeFunction>,
    pub notes: Vec<String>,
}

impl DualSolution {
    pub fn zero(r: usize, n: usize, d: usize) -> Result<Self> {
        let mut g = BTreeMap::new();
        for s in 1..1u32 << r {
            g.insert(s, CubeFunction::zeros(r, n)?);
        }
        Ok(DualSolution { r, n, d, g, notes: Vec::new() })
    }

    /// Read `g` off a point of [`build_cube_dual`].
    pub fn from_model_point(model: &LpModel, x: &[Rational]) -> Result<Self> {
        if model.meta.kind != ModelKind::CubeDual {
            return Err(Error::InvalidArgument("not a cube dual model".into()));
        }
        let (r, n) = (model.meta.r, model.meta.n);
        let mut sol = Self::zero(r, n, model.meta.d)?;
        for (j, v) in model.variables.iter().enumerate() {
            if let VarTag::Dual { subset, point } = v.tag {
                let f = sol.g.get_mut(&subset).expect("subset present");
                f.set(&BitMatrix::from_index(point, r, n), x[j].clone());
            }
        }
        Ok(sol)
    }

    /// `1 + sum_U F_U(g_U)(0)`.
    pub fn objective(&self) -> Rational {
        let zero = BitMatrix::zeros(self.r, self.n).expect("valid shape");
        let mut total = Rational::one();
        for (&s, f) in &self.g {
            total += partial_fourier(f, RowSubset(s)).expect("valid subset").at(&zero).clone();
        }
        total
    }

    fn fourier_sum(&self) -> Result<CubeFunction> {
        let mut acc = CubeFunction::zeros(self.r, self.n)?;
        for (&s, f) in &self.g {
            acc = acc.add(&partial_fourier(f, RowSubset(s))?)?;
        }
        Ok(acc)
    }
}

/// Check every dual constraint directly from the definition.
pub fn verify_dual(sol: &DualSolution) -> Result<Report> {
    let (r, n, d) = (sol.r, sol.n, sol.d);
    let params = format!("r={r} n={n} d={d}");
    let mut report = Report::new();
    let zero = Rational::zero();
    for (&s, f) in &sol.g {
        let neg = f.values().iter().filter(|v| **v < zero).count();
        report.assert_true("dual.d.C1", format!("{params} U={s:#b}"), neg == 0, format!("{neg} negative values"));
        report.compare("dual.d.C2", format!("{params} U={s:#b}"), f.at_index(0), &zero);
    }
    let h = sol.fourier_sum()?;
    let group = gl_group(r)?;
    for x in 1..1usize << (r * n) {
        let xm = BitMatrix::from_index(x, r, n);
        if !admissible(&xm, d) {
            continue;
        }
        let mut total = Rational::zero();
        for t in &group {
            total += h.at(&act_gl(t.matrix(), &xm)?);
        }
        report.compare_le("dual.d.C3", format!("{params} X={x}"), &total, &zero);
    }
    for xv in 0..1u64 << n {
        if (xv.count_ones() as usize) < d {
            continue;
        }
        let mut total = Rational::zero();
        for v in 1..1usize << r {
            let rows = (0..r).map(|i| if (v >> i) & 1 == 1 { xv } else { 0 }).collect();
            total += h.at(&BitMatrix::from_rows(rows, n)?);
        }
        report.compare_le("dual.d.C4", format!("{params} x={xv}"), &total, &int(-1));
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftMethod {
    /// `g'_U(Z) = g_U(z_1..z_r) [z_{r+1} = 0]` for `U` inside `[r]`, zero otherwise.
    ZeroExtension,
    /// `g'_U(X) = |M|^{-1} sum_M g_U(M X)` over full-rank `r x (r+1)` matrices `M`.
    FullRankAverage,
}

/// Full-rank `r x (r+1)` matrices over F2.
pub fn full_rank_maps(r: usize) -> Vec<BitMatrix> {
    (0..1usize << (r * (r + 1)))
        .map(|code| BitMatrix::from_index(code, r, r + 1))
        .filter(|m| m.rank() == r)
        .collect()
}

/// `(1/|GL|) sum_T g_U(T X)` for each `U`.
pub fn gl_average(sol: &DualSolution) -> Result<DualSolution> {
    let group = gl_group(sol.r)?;
    let scale = Rational::new(1.into(), (group.len() as u64).into());
    let mut out = sol.clone();
    for (s, f) in out.g.iter_mut() {
        let src = &sol.g[s];
        *f = CubeFunction::from_fn(sol.r, sol.n, |x| {
            let total: Rational =
                group.iter().map(|t| src.at(&act_gl(t.matrix(), x).expect("valid action")).clone()).sum();
            total * &scale
        })?;
    }
    Ok(out)
}

/// Build a candidate dual point for `r + 1` from a feasible one for `r`.
///
/// The input is first averaged over `GL(r,2)`; when the average fails the
/// verifier the input is used as is and a note is recorded.
pub fn lift_dual_solution(sol: &DualSolution, method: LiftMethod) -> Result<DualSolution> {
    let check = verify_dual(sol)?;
    if !check.all_passed() {
        return Err(Error::Precondition(format!(
            "input is not dual feasible: {} failed checks",
            check.failures().count()
        )));
    }
    let averaged = gl_average(sol)?;
    let (base, note) = if verify_dual(&averaged)?.all_passed() {
        (averaged, "input averaged over GL(r,2)")
    } else {
        (sol.clone(), "GL(r,2) average infeasible; lifted the input directly")
    };
    let (r, n) = (sol.r, sol.n);
    let r2 = r + 1;
    let mut out = DualSolution::zero(r2, n, sol.d)?;
    out.notes = base.notes.clone();
    out.notes.push(note.into());
    match method {
        LiftMethod::ZeroExtension => {
            for (&s, f) in &base.g {
                let target = out.g.get_mut(&s).expect("U inside [r] is a subset of [r+1]");
                for idx in 0..1usize << (r * n) {
                    // The new row r+1 is zero, so the index is unchanged.
                    target.set(&BitMatrix::from_index(idx, r2, n), f.at_index(idx).clone());
                }
            }
            out.notes.push("zero extension".into());
        }
        LiftMethod::FullRankAverage => {
            let maps = full_rank_maps(r);
            let scale = Rational::new(1.into(), (maps.len() as u64).into());
            for (&s, f) in &base.g {
                let lifted = CubeFunction::from_fn(r2, n, |x| {
                    let total: Rational =
                        maps.iter().map(|mm| f.at(&mm.mul(x).expect("shapes agree")).clone()).sum();
                    total * &scale
                })?;
                out.g.insert(s, lifted);
            }
            out.notes.push(format!("average over {} full-rank maps", maps.len()));
        }
    }
    Ok(out)
}
