//! Exact and floating-point simplex solving, certification and LP/MPS export.
//!
//! The internal solver targets desk-scale models: it refuses models with more
//! than [`MAX_ROWS`] rows or a basis larger than [`MAX_BASIS`]. Larger
//! instances go through [`export_lp`] to an external exact solver.
//!
//! Each model is solved in whichever orientation gives the smaller basis: the
//! model itself, or its LP dual, whose multipliers are then the primal point.
//! Sign rows `a x_j >= 0` are read as variable bounds, and equality rows
//! that merge or fix columns are eliminated before solving.

mod export;
mod presolve;
mod scalar;
mod simplex;
mod standard;

use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lpbuild::LpModel;
use crate::rational::{to_f64, Rational};

pub use export::{export_lp, write_lp, ExportFormat, ExportOptions, DEFAULT_DIGITS};
use presolve::Presolved;
use simplex::{Limits, Outcome, Simplex};
use standard::{Canonical, StandardForm};

pub const MAX_ROWS: usize = 20_000;
pub const MAX_BASIS: usize = 3_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    LimitExceeded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotRule {
    #[default]
    Bland,
    /// Largest scaled reduced cost, handing over to Bland's rule after a run
    /// of degenerate pivots.
    Dantzig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_pivots: Option<u64>,
    pub max_time: Option<Duration>,
    pub pivot_rule: PivotRule,
    pub orientation: Orientation,
    /// Start the exact solve from the optimal basis of a float solve.
    pub warm_start: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_pivots: None, max_time: None, pivot_rule: PivotRule::Bland, orientation: Orientation::Auto, warm_start: true }
    }
}

impl SolveOptions {
    pub fn cold() -> Self {
        SolveOptions { warm_start: false, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    /// Objective including the model's constant offset.
    pub objective: Option<Rational>,
    /// Nonzero entries of the primal point, by variable index.
    pub solution: Vec<(usize, Rational)>,
    /// Row multipliers of the maximization problem with `>=` rows negated;
    /// a dual certificate of optimality.
    pub duals: Option<Vec<Rational>>,
    pub pivots: u64,
    pub phase1_pivots: u64,
    pub warm_started: bool,
    pub orientation: Orientation,
    pub wall_time: Duration,
}

impl SolveResult {
    /// Dense primal point of length `n`.
    pub fn dense_solution(&self, n: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n];
        for (j, v) in &self.solution {
            x[*j] = v.clone();
        }
        x
    }

    fn empty(status: Status, orientation: Orientation, started: Instant) -> Self {
        SolveResult {
            status,
            objective: None,
            solution: Vec::new(),
            duals: None,
            pivots: 0,
            phase1_pivots: 0,
            warm_started: false,
            orientation,
            wall_time: started.elapsed(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FloatStatus {
    Optimal,
    Infeasible,
    Unbounded,
    LimitExceeded,
    NumericalFailure,
}

/// An uncertified double-precision result.
#[derive(Clone, Debug)]
pub struct FloatResult {
    pub status: FloatStatus,
    pub objective: Option<f64>,
    pub solution: Vec<f64>,
    pub pivots: u64,
    pub orientation: Orientation,
    pub wall_time: Duration,
    basis: Option<Vec<usize>>,
}

fn check_rows(model: &LpModel) -> Result<()> {
    if model.num_constraints() > MAX_ROWS {
        return Err(Error::Capability(format!(
            "{} rows exceed the internal solver limit of {MAX_ROWS}; export the model instead",
            model.num_constraints()
        )));
    }
    Ok(())
}

fn check_capability(canon: &Canonical, orientation: Orientation) -> Result<()> {
    let m = canon.basis_size(orientation);
    if m > MAX_BASIS {
        return Err(Error::Capability(format!(
            "basis of size {m} exceeds the internal solver limit of {MAX_BASIS}; export the model instead"
        )));
    }
    Ok(())
}

fn limits(opts: &SolveOptions, started: Instant) -> Limits {
    Limits { max_pivots: opts.max_pivots, deadline: opts.max_time.map(|t| started + t) }
}

fn float_form(sf: &StandardForm) -> (Vec<Vec<(usize, f64)>>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    // Equilibrate rows then columns to unit max-norm.
    let mut row_max = vec![0f64; sf.m];
    for col in &sf.cols {
        for (i, v) in col {
            row_max[*i] = row_max[*i].max(to_f64(v).abs());
        }
    }
    let row_scale: Vec<f64> = row_max.iter().map(|&v| if v > 0.0 { 1.0 / v } else { 1.0 }).collect();
    let mut col_scale = Vec::with_capacity(sf.cols.len());
    let cols = sf
        .cols
        .iter()
        .map(|col| {
            let scaled: Vec<(usize, f64)> = col.iter().map(|(i, v)| (*i, to_f64(v) * row_scale[*i])).collect();
            let mx = scaled.iter().fold(0f64, |a, (_, v)| a.max(v.abs()));
            let s = if mx > 0.0 { 1.0 / mx } else { 1.0 };
            col_scale.push(s);
            scaled.into_iter().map(|(i, v)| (i, v * s)).collect()
        })
        .collect();
    let b = sf.b.iter().zip(&row_scale).map(|(v, s)| to_f64(v) * s).collect();
    let cost = sf.cost.iter().zip(&col_scale).map(|(v, s)| to_f64(v) * s).collect();
    (cols, b, cost, row_scale, col_scale)
}

/// Solve in double precision. The result is never a certified bound.
pub fn solve_float(model: &LpModel, opts: &SolveOptions) -> Result<FloatResult> {
    let started = Instant::now();
    model.validate()?;
    check_rows(model)?;
    let pre = Presolved::new(model);
    let mut result = float_core(&pre.model, opts, started)?;
    if result.status == FloatStatus::Optimal {
        result.solution = pre.expand_float(&result.solution);
    }
    result.wall_time = started.elapsed();
    Ok(result)
}

fn float_core(model: &LpModel, opts: &SolveOptions, started: Instant) -> Result<FloatResult> {
    let canon = Canonical::new(model);
    let orientation = canon.resolve(opts.orientation);
    check_capability(&canon, orientation)?;
    let sf = StandardForm::new(&canon, orientation);
    let (cols, b, cost, row_scale, col_scale) = float_form(&sf);
    let rule = match opts.pivot_rule {
        PivotRule::Bland if opts.warm_start => PivotRule::Dantzig,
        r => r,
    };
    let mut s = Simplex::new(sf.m, cols, b, cost, rule);
    let outcome = s.solve(&limits(opts, started));
    let status = match outcome {
        Outcome::Optimal => FloatStatus::Optimal,
        Outcome::Infeasible if orientation == Orientation::Dual => FloatStatus::Unbounded,
        Outcome::Unbounded if orientation == Orientation::Dual => FloatStatus::Infeasible,
        Outcome::Infeasible => FloatStatus::Infeasible,
        Outcome::Unbounded => FloatStatus::Unbounded,
        Outcome::Limit => FloatStatus::LimitExceeded,
        Outcome::Numerical => FloatStatus::NumericalFailure,
    };
    let mut result = FloatResult {
        status,
        objective: None,
        solution: Vec::new(),
        pivots: s.pivots,
        orientation,
        wall_time: Duration::ZERO,
        basis: None,
    };
    if status == FloatStatus::Optimal {
        let x: Vec<f64> = match orientation {
            Orientation::Dual => s.multipliers().iter().zip(&row_scale).map(|(p, r)| p * r).collect(),
            _ => {
                let mut x = vec![0f64; canon.nvars];
                for (k, v) in s.values().iter().enumerate() {
                    match sf.kinds[k] {
                        standard::ColKind::VarPos(j) => x[j] += v * col_scale[k],
                        standard::ColKind::VarNeg(j) => x[j] -= v * col_scale[k],
                        _ => {}
                    }
                }
                x
            }
        };
        let offset = to_f64(&model.objective.offset);
        let obj = model.objective.coeffs.iter().map(|(j, v)| to_f64(v) * x[*j]).sum::<f64>() + offset;
        result.objective = Some(obj);
        result.solution = x;
        result.basis = Some(s.basis().to_vec());
    }
    result.wall_time = started.elapsed();
    Ok(result)
}

/// Solve exactly over the rationals with the two-phase simplex method, then
/// certify the optimum by substituting the primal point and the row
/// multipliers back into the model.
pub fn solve_exact(model: &LpModel, opts: &SolveOptions) -> Result<SolveResult> {
    let started = Instant::now();
    model.validate()?;
    check_rows(model)?;
    let pre = Presolved::new(model);
    let (mut result, reduced) = exact_core(&pre.model, opts, started)?;
    if let Some((x, duals)) = reduced {
        let x = pre.expand_exact(&x);
        let duals = pre.lift_duals(&duals);
        let cert = certify(model, &x, &duals);
        if !cert.certified() {
            return Err(Error::Solver(format!("optimal basis failed certification: {cert:?}")));
        }
        result.objective = Some(model.objective_value(&x));
        result.solution = x.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect();
        result.duals = Some(duals);
    }
    result.wall_time = started.elapsed();
    Ok(result)
}

/// Solve without presolving; on optimality also returns the point and multipliers.
#[allow(clippy::type_complexity)]
fn exact_core(
    model: &LpModel,
    opts: &SolveOptions,
    started: Instant,
) -> Result<(SolveResult, Option<(Vec<Rational>, Vec<Rational>)>)> {
    let canon = Canonical::new(model);
    let orientation = canon.resolve(opts.orientation);
    check_capability(&canon, orientation)?;

    let warm_basis = if opts.warm_start {
        let float_opts = SolveOptions { orientation, max_pivots: None, ..opts.clone() };
        let fr = float_core(model, &float_opts, started)?;
        log::debug!("float presolve: {:?} in {} pivots, {:?}", fr.status, fr.pivots, fr.wall_time);
        fr.basis
    } else {
        None
    };

    let sf = StandardForm::new(&canon, orientation);
    let mut s = Simplex::new(sf.m, sf.cols.clone(), sf.b.clone(), sf.cost.clone(), opts.pivot_rule);
    let warm_started = warm_basis.is_some_and(|basis| s.install_basis(&basis));
    log::debug!("exact solve: orientation {orientation:?}, basis {}, warm start {warm_started}", sf.m);
    let outcome = s.solve(&limits(opts, started));
    let mut result = SolveResult::empty(Status::LimitExceeded, orientation, started);
    result.pivots = s.pivots;
    result.phase1_pivots = s.phase1_pivots;
    result.warm_started = warm_started;
    result.status = match (outcome, orientation) {
        (Outcome::Optimal, _) => Status::Optimal,
        (Outcome::Limit, _) => Status::LimitExceeded,
        (Outcome::Infeasible, Orientation::Dual) => {
            // The model is infeasible or unbounded; decide with a primal phase one.
            let psf = StandardForm::new(&canon, Orientation::Primal);
            let mut p = Simplex::new(psf.m, psf.cols, psf.b, vec![Rational::zero(); psf.cost.len()], opts.pivot_rule);
            match p.solve(&limits(opts, started)) {
                Outcome::Optimal => Status::Unbounded,
                Outcome::Limit => Status::LimitExceeded,
                _ => Status::Infeasible,
            }
        }
        (Outcome::Unbounded, Orientation::Dual) | (Outcome::Infeasible, _) => Status::Infeasible,
        (Outcome::Unbounded, _) => Status::Unbounded,
        (Outcome::Numerical, _) => return Err(Error::Solver("exact simplex reported a numerical failure".into())),
    };
    let point = (result.status == Status::Optimal).then(|| sf.recover(&canon, &s.values(), &s.multipliers()));
    Ok((result, point))
}

/// Exact residuals of a primal point and a row-multiplier vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// Largest primal constraint violation.
    pub primal_residual: Rational,
    /// Largest violation of stationarity or multiplier sign.
    pub dual_residual: Rational,
    /// Dual objective minus primal objective, both in maximization form.
    pub gap: Rational,
}

impl Certificate {
    pub fn certified(&self) -> bool {
        self.primal_residual.is_zero() && self.dual_residual.is_zero() && self.gap.is_zero()
    }
}

/// Check primal feasibility, dual feasibility and a zero duality gap.
///
/// `duals` are multipliers of the maximization problem with `>=` rows negated:
/// nonnegative on inequality rows, free on equalities.
pub fn certify(model: &LpModel, x: &[Rational], duals: &[Rational]) -> Certificate {
    let canon = Canonical::new(model);
    let primal_residual = model.max_violation(x);
    let mut dual_residual = Rational::zero();
    let mut grad = vec![Rational::zero(); canon.nvars];
    let mut dual_obj = Rational::zero();
    for (row, y) in canon.rows.iter().zip(duals) {
        if !row.equality && y.is_negative() {
            dual_residual = dual_residual.max(-y);
        }
        if y.is_zero() {
            continue;
        }
        for (j, v) in &row.coeffs {
            grad[*j] += y * v;
        }
        dual_obj += y * &row.rhs;
    }
    for (g, c) in grad.iter().zip(&canon.cmax) {
        dual_residual = dual_residual.max((g - c).abs());
    }
    let primal_obj: Rational = canon.cmax.iter().zip(x).map(|(c, v)| c * v).sum();
    Certificate { primal_residual, dual_residual, gap: dual_obj - primal_obj }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpbuild::*;
    use crate::rational::{int, ratio};

    fn meta() -> ModelMeta {
        ModelMeta { kind: ModelKind::Delsarte, r: 1, n: 1, d: 1, variant: None, value_root: 1, eliminated: 0, notes: vec![] }
    }

    fn one_var(rows: &[(i64, Sense, i64)], sense: ObjSense) -> LpModel {
        let mut m = LpModel::new(meta(), sense);
        let x = m.add_variable(VarTag::Delsarte(0));
        m.set_objective(vec![(x, int(1))]);
        for (a, s, b) in rows {
            m.add_constraint(vec![(x, int(*a))], *s, int(*b), Provenance::C2, "");
        }
        m
    }

    fn all_orientations() -> Vec<SolveOptions> {
        let mut out = Vec::new();
        for orientation in [Orientation::Auto, Orientation::Primal, Orientation::Dual] {
            for warm_start in [false, true] {
                out.push(SolveOptions { orientation, warm_start, ..Default::default() });
            }
        }
        out
    }

    #[test]
    fn trivial_max() {
        let m = one_var(&[(1, Sense::Le, 1), (1, Sense::Ge, 0)], ObjSense::Maximize);
        for opts in all_orientations() {
            let r = solve_exact(&m, &opts).unwrap();
            assert_eq!(r.status, Status::Optimal, "{opts:?}");
            assert_eq!(r.objective, Some(int(1)));
            let f = solve_float(&m, &opts).unwrap();
            assert!((f.objective.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let inf = one_var(&[(1, Sense::Ge, 1), (1, Sense::Le, 0)], ObjSense::Maximize);
        let unb = one_var(&[(1, Sense::Ge, 0)], ObjSense::Maximize);
        for opts in all_orientations() {
            assert_eq!(solve_exact(&inf, &opts).unwrap().status, Status::Infeasible, "{opts:?}");
            assert_eq!(solve_exact(&unb, &opts).unwrap().status, Status::Unbounded, "{opts:?}");
        }
    }

    #[test]
    fn minimization_with_offset_and_equalities() {
        // min 2x + y + 3 st x + y = 3, x - y <= 1, y <= 5/2, x,y free
        let mut m = LpModel::new(meta(), ObjSense::Minimize);
        let x = m.add_variable(VarTag::Delsarte(0));
        let y = m.add_variable(VarTag::Delsarte(1));
        m.set_objective(vec![(x, int(2)), (y, int(1))]);
        m.objective.offset = int(3);
        m.add_constraint(vec![(x, int(1)), (y, int(1))], Sense::Eq, int(3), Provenance::C1, "");
        m.add_constraint(vec![(x, int(1)), (y, int(-1))], Sense::Le, int(1), Provenance::C2, "");
        m.add_constraint(vec![(y, int(2))], Sense::Le, int(5), Provenance::C2, "");
        for opts in all_orientations() {
            let r = solve_exact(&m, &opts).unwrap();
            assert_eq!(r.status, Status::Optimal);
            // y = 5/2, x = 1/2 gives 1 + 5/2 + 3
            assert_eq!(r.objective, Some(ratio(13, 2)), "{opts:?}");
        }
    }

    #[test]
    fn certificate_detects_bad_duals() {
        let m = one_var(&[(1, Sense::Le, 1), (1, Sense::Ge, 0)], ObjSense::Maximize);
        let r = solve_exact(&m, &SolveOptions::cold()).unwrap();
        let x = r.dense_solution(1);
        let duals = r.duals.clone().unwrap();
        assert!(certify(&m, &x, &duals).certified());
        let wrong: Vec<Rational> = duals.iter().map(|d| d * int(2)).collect();
        assert!(!certify(&m, &x, &wrong).certified());
    }

    #[test]
    fn delsarte_13_6() {
        let m = build_delsarte(13, 6).unwrap();
        let exact = solve_exact(&m, &SolveOptions::cold()).unwrap();
        assert_eq!(exact.objective, Some(int(40)));
        let float = solve_float(&m, &SolveOptions::default()).unwrap();
        assert!((float.objective.unwrap() - 40.0).abs() / 40.0 < 1e-6);
    }

    #[test]
    fn capability_guard() {
        let mut m = LpModel::new(meta(), ObjSense::Maximize);
        let x = m.add_variable(VarTag::Delsarte(0));
        for _ in 0..=MAX_ROWS {
            m.constraints.push(Constraint { coeffs: vec![(x, int(1))], sense: Sense::Le, rhs: int(1), tag: Provenance::C2, label: String::new() });
        }
        assert!(matches!(solve_exact(&m, &SolveOptions::default()), Err(Error::Capability(_))));
    }
}
