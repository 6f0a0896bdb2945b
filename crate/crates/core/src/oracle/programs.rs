//! Checks that solve whole programs and compare their optima.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::cube::{BitMatrix, CubeFunction, RowSubset};
use crate::error::{Error, Result};
use crate::lpbuild::{
    build_cube_dual, build_cube_primal, build_delsarte, build_delsarte_lin, lift_dual_solution, verify_dual,
    ConstraintMode, DualSolution, LiftMethod, LpModel, ObjectiveMode, Provenance, VariantSpec,
};
use crate::rational::{fraction_string, int, Rational};
use crate::solver::{solve_exact, SolveOptions, Status};

use super::fourier::brute_partial_fourier;
use super::Report;

/// Optimum of a model, or a solver error for anything but an optimal status.
pub fn optimum(model: &LpModel) -> Result<(Rational, Vec<Rational>)> {
    let res = solve_exact(model, &SolveOptions::default())?;
    match (res.status, res.objective.clone()) {
        (Status::Optimal, Some(v)) => Ok((v, res.dense_solution(model.num_variables()))),
        (status, _) => Err(Error::Solver(format!("expected an optimum, got {status:?}"))),
    }
}

fn value(model: &LpModel) -> Result<Rational> {
    Ok(optimum(model)?.0)
}

fn variant(constraint_mode: ConstraintMode, objective_mode: ObjectiveMode, gl_fuse: bool) -> VariantSpec {
    VariantSpec { constraint_mode, objective_mode, gl_fuse, even_reduction: false }
}

/// Cube primal, symmetrized (unfused and fused) and cube dual optima agree;
/// for `r = 1` the classic program joins the chain.
pub fn verify_symmetrization_equivalence(r: usize, n: usize, d: usize) -> Result<Report> {
    let params = format!("r={r} n={n} d={d}");
    let mut report = Report::new();
    let cube = value(&build_cube_primal(r, n, d)?)?;
    let unfused = value(&build_delsarte_lin(r, n, d, variant(ConstraintMode::C2, ObjectiveMode::Obj, false))?)?;
    let fused = value(&build_delsarte_lin(r, n, d, VariantSpec::default())?)?;
    let dual = value(&build_cube_dual(r, n, d)?)?;
    report.compare("equivalence.cube_vs_symmetrized", params.clone(), &cube, &unfused);
    report.compare("equivalence.symmetrized_vs_fused", params.clone(), &unfused, &fused);
    report.compare("equivalence.primal_vs_dual", params.clone(), &cube, &dual);
    if r == 1 {
        report.compare("equivalence.classic", params, &cube, &value(&build_delsarte(n, d)?)?);
    }
    Ok(report)
}

/// A binary linear code given by its codewords.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    n: usize,
    words: Vec<u64>,
}

impl LinearCode {
    /// Span of the generator rows.
    pub fn from_generator(rows: &[u64], n: usize) -> Result<Self> {
        if n == 0 || n > 63 || rows.iter().any(|&r| r >> n != 0) {
            return Err(Error::InvalidArgument(format!("generator rows must fit in n = {n} bits")));
        }
        let mut words = vec![0u64];
        for &g in rows {
            if !words.contains(&g) {
                let shifted: Vec<u64> = words.iter().map(|w| w ^ g).collect();
                words.extend(shifted);
            }
        }
        words.sort_unstable();
        Ok(LinearCode { n, words })
    }

    /// Codewords, which must be closed under addition.
    pub fn from_words(words: &[u64], n: usize) -> Result<Self> {
        let mut w: Vec<u64> = words.to_vec();
        w.sort_unstable();
        w.dedup();
        let closed = w.binary_search(&0).is_ok()
            && w.iter().all(|a| w.iter().all(|b| w.binary_search(&(a ^ b)).is_ok()));
        if !closed || w.iter().any(|&x| x >> n != 0) {
            return Err(Error::InvalidArgument("code is not linear".into()));
        }
        Ok(LinearCode { n, words: w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.words.binary_search(&x).is_ok()
    }

    pub fn min_distance(&self) -> usize {
        self.words.iter().filter(|&&w| w != 0).map(|w| w.count_ones() as usize).min().unwrap_or(self.n + 1)
    }

    pub fn dual(&self) -> LinearCode {
        let words = (0..1u64 << self.n)
            .filter(|y| self.words.iter().all(|w| (w & y).count_ones() % 2 == 0))
            .collect();
        LinearCode { n: self.n, words }
    }
}

/// `f_{C^r}(X) = prod_i 1_C(x_i)` is feasible for the cube program with value
/// `|C|`; its transforms factor over `C` and `C^perp` and vanish on odd
/// pairings between rows inside and outside `S`.
pub fn verify_tensor_feasibility(code: &LinearCode, r: usize, d: usize) -> Result<Report> {
    let n = code.n();
    let params = format!("r={r} n={n} d={d} |C|={}", code.len());
    let model = build_cube_primal(r, n, d)?;
    let f = CubeFunction::from_fn(r, n, |x| int(i64::from(x.rows().iter().all(|&row| code.contains(row)))))?;
    let x: Vec<Rational> = f.values().to_vec();
    let mut report = Report::new();

    let mut by_tag: HashMap<Provenance, (u64, Vec<usize>)> = HashMap::new();
    for (i, c) in model.constraints.iter().enumerate() {
        let e = by_tag.entry(c.tag).or_default();
        e.0 += 1;
        if !c.sense.holds(&model.row_value(i, &x), &c.rhs) {
            e.1.push(i);
        }
    }
    let mut tags: Vec<_> = by_tag.into_iter().collect();
    tags.sort_by_key(|(t, _)| t.to_string());
    for (tag, (count, bad)) in tags {
        let check = format!("tensor.{tag}");
        match bad.first() {
            None => report.pass_many(&check, params.clone(), count),
            Some(&i) => report.assert_true(&check, format!("{params} row={i}"), false, model.constraints[i].label.clone()),
        }
    }
    report.compare("tensor.objective", params.clone(), &model.objective_value(&x), &int(code.len() as i64));

    let dual = code.dual();
    let inv_dual = Rational::new(1.into(), (dual.len() as i64).into());
    for s in RowSubset::all(r) {
        let fs = brute_partial_fourier(&f, s)?;
        let sp = format!("{params} S={:#b}", s.0);
        let expected = CubeFunction::from_fn(r, n, |x| {
            let mut v = Rational::one();
            for (i, &row) in x.rows().iter().enumerate() {
                let inside = s.contains(i);
                let member = if inside { dual.contains(row) } else { code.contains(row) };
                if !member {
                    return Rational::zero();
                }
                if inside {
                    v *= &inv_dual;
                }
            }
            v
        })?;
        match (0..fs.len()).find(|&i| fs.at_index(i) != expected.at_index(i)) {
            None => report.pass_many("tensor.fourier_factorizes", sp.clone(), fs.len() as u64),
            Some(i) => report.compare("tensor.fourier_factorizes", format!("{sp} X={i}"), fs.at_index(i), expected.at_index(i)),
        }
        let mut checked = 0u64;
        let mut bad = None;
        for idx in 0..fs.len() {
            let xm = BitMatrix::from_index(idx, r, n);
            let rows = xm.rows();
            let odd = (0..r).any(|i| s.contains(i) && (0..r).any(|j| !s.contains(j) && (rows[i] & rows[j]).count_ones() % 2 == 1));
            if odd {
                checked += 1;
                if !fs.at_index(idx).is_zero() && bad.is_none() {
                    bad = Some(idx);
                }
            }
        }
        match bad {
            None => report.pass_many("tensor.C5", sp, checked),
            Some(i) => report.compare("tensor.C5", format!("{sp} X={i}"), fs.at_index(i), &Rational::zero()),
        }
    }
    Ok(report)
}

/// Scale limits for [`verify_strength_theorems`].
#[derive(Clone, Copy, Debug)]
pub struct StrengthOptions {
    /// Also compare cube programs at `r = 1` and `r = 2` when `2n` stays within this many bits.
    pub cube_bits: usize,
}

impl Default for StrengthOptions {
    fn default() -> Self {
        StrengthOptions { cube_bits: 8 }
    }
}

/// Orderings between solved values at `r = 1` and `r = 2`:
///
/// * `val(r = 2) <= val(r = 1)`, symmetrized and (at small `n`) on the cube;
/// * `val(C2) <= val(C2') <= val(classic)`;
/// * the optimal `C2` point is feasible for `C2'` with the same value;
/// * `val(Obj', 2)^{1/2} <= max(val(Obj', 1), val(Obj, 2))` for both constraint modes;
/// * the stronger `val(Obj', 2)^{1/2} <= val(Obj', 1)` is only observed.
pub fn verify_strength_theorems(n: usize, d: usize, opts: StrengthOptions) -> Result<Report> {
    let params = format!("n={n} d={d}");
    let mut report = Report::new();
    let classic = value(&build_delsarte(n, d)?)?;
    let c2_model = build_delsarte_lin(2, n, d, VariantSpec::default())?;
    let (c2, c2_point) = optimum(&c2_model)?;
    let weak_model = build_delsarte_lin(2, n, d, variant(ConstraintMode::C2Weak, ObjectiveMode::Obj, true))?;
    let weak = value(&weak_model)?;
    let alt = value(&build_delsarte_lin(2, n, d, variant(ConstraintMode::C2, ObjectiveMode::ObjProduct, true))?)?;
    let weak_alt = value(&build_delsarte_lin(2, n, d, variant(ConstraintMode::C2Weak, ObjectiveMode::ObjProduct, true))?)?;

    report.compare_le("strength.r_monotone", params.clone(), &c2, &classic);
    report.compare_le("strength.c2_below_weak", params.clone(), &c2, &weak);
    report.compare_le("strength.weak_below_classic", params.clone(), &weak, &classic);

    // Same columns in both fused models, matched by name.
    let moved: Option<Vec<Rational>> = weak_model
        .variables
        .iter()
        .map(|v| c2_model.variable_index(&v.name).map(|j| c2_point[j].clone()))
        .collect();
    match moved {
        Some(point) => {
            report.assert_true("strength.weak_contains_c2", params.clone(), weak_model.is_feasible(&point), "C2 optimum feasible for C2'");
            report.compare("strength.weak_contains_c2_value", params.clone(), &weak_model.objective_value(&point), &c2);
        }
        None => report.assert_true("strength.weak_contains_c2", params.clone(), false, "column sets differ"),
    }

    for (label, alt_value, base) in [("C2", &alt, &c2), ("C2'", &weak_alt, &weak)] {
        let cap = if classic > *base { classic.clone() } else { base.clone() };
        report.compare_le(&format!("strength.alt_objective[{label}]"), params.clone(), alt_value, &(&cap * &cap));
    }
    let conj = alt <= &classic * &classic;
    report.observe(
        "strength.alt_objective_conjecture",
        params.clone(),
        format!("val(Obj',2) = {}", fraction_string(&alt)),
        format!("val(Obj',1)^2 = {} ({})", fraction_string(&(&classic * &classic)), if conj { "holds" } else { "VIOLATED" }),
    );
    if conj {
        log::debug!("Obj' conjecture holds at {params}");
    } else {
        log::warn!("Obj' conjecture violated at {params}");
    }

    if 2 * n <= opts.cube_bits {
        let cube1 = value(&build_cube_primal(1, n, d)?)?;
        let cube2 = value(&build_cube_primal(2, n, d)?)?;
        report.compare_le("strength.r_monotone_cube", params, &cube2, &cube1);
    }
    Ok(report)
}

/// Optima with and without the even-weight reduction agree for even `d`.
pub fn verify_even_reduction(r: usize, n: usize, d: usize) -> Result<Report> {
    if d % 2 == 1 {
        return Err(Error::InvalidArgument(format!("even reduction needs even d (got {d})")));
    }
    let plain = value(&build_delsarte_lin(r, n, d, VariantSpec::default())?)?;
    let even = value(&build_delsarte_lin(r, n, d, VariantSpec { even_reduction: true, ..VariantSpec::default() })?)?;
    let mut report = Report::new();
    report.compare("even_reduction.same_optimum", format!("r={r} n={n} d={d}"), &even, &plain);
    Ok(report)
}

/// Solve the cube dual at `r`, lift the optimum to `r + 1`, verify the lift
/// and compare values. The average over full-rank maps is recorded only.
pub fn verify_dual_lift(r: usize, n: usize, d: usize) -> Result<Report> {
    let params = format!("r={r}->{} n={n} d={d}", r + 1);
    let mut report = Report::new();
    let model = build_cube_dual(r, n, d)?;
    let (val, point) = optimum(&model)?;
    let g = DualSolution::from_model_point(&model, &point)?;
    report.compare("dual.objective_readback", params.clone(), &g.objective(), &val);
    let check = verify_dual(&g)?;
    report.assert_true("dual.optimum_feasible", params.clone(), check.all_passed(), format!("{} checks", check.len()));

    let lifted = lift_dual_solution(&g, LiftMethod::ZeroExtension)?;
    let lcheck = verify_dual(&lifted)?;
    report.assert_true(
        "dual.lift_feasible",
        params.clone(),
        lcheck.all_passed(),
        format!("{} of {} checks failed", lcheck.failures().count(), lcheck.len()),
    );
    report.compare("dual.lift_value", params.clone(), &lifted.objective(), &val);
    let upper = value(&build_cube_dual(r + 1, n, d)?)?;
    report.compare_le("dual.lift_bounds_next", params.clone(), &upper, &lifted.objective());

    let averaged = lift_dual_solution(&g, LiftMethod::FullRankAverage)?;
    let acheck = verify_dual(&averaged)?;
    report.observe(
        "dual.full_rank_average",
        params,
        format!("value {}", fraction_string(&averaged.objective())),
        format!("{} of {} dual checks failed", acheck.failures().count(), acheck.len()),
    );
    Ok(report)
}
