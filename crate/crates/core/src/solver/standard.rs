//! Conversion of an [`LpModel`] to `min c^T y, A y = b, y >= 0`, in either
//! the primal or the dual orientation, and recovery of model-space values.

use num_traits::{Signed, Zero};

use crate::lpbuild::{LpModel, ObjSense, Sense};
use crate::rational::Rational;

use super::Orientation;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ColKind {
    VarPos(usize),
    VarNeg(usize),
    Slack(usize),
    Y(usize),
    ZPos(usize),
    ZNeg(usize),
    Surplus(usize),
}

/// A model row in `<=` form of the maximization problem.
#[derive(Clone, Debug)]
pub(crate) struct LeRow {
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
    pub equality: bool,
}

/// The model read as `max cmax^T x` over `<=`/`=` rows, with sign rows
/// `-a x_j <= 0` recognized as variable bounds.
#[derive(Clone, Debug)]
pub(crate) struct Canonical {
    pub nvars: usize,
    pub cmax: Vec<Rational>,
    pub rows: Vec<LeRow>,
    /// For a nonnegative variable: its first bound row and `|a|`.
    pub bound: Vec<Option<(usize, Rational)>>,
    pub is_bound_row: Vec<bool>,
}

impl Canonical {
    pub fn new(model: &LpModel) -> Self {
        let nvars = model.num_variables();
        let mut cmax = vec![Rational::zero(); nvars];
        for (j, v) in &model.objective.coeffs {
            cmax[*j] = match model.objective.sense {
                ObjSense::Maximize => v.clone(),
                ObjSense::Minimize => -v,
            };
        }
        let mut rows = Vec::with_capacity(model.num_constraints());
        let mut bound: Vec<Option<(usize, Rational)>> = vec![None; nvars];
        let mut is_bound_row = vec![false; model.num_constraints()];
        for (i, c) in model.constraints.iter().enumerate() {
            let (coeffs, rhs) = match c.sense {
                Sense::Ge => (c.coeffs.iter().map(|(j, v)| (*j, -v)).collect::<Vec<_>>(), -&c.rhs),
                _ => (c.coeffs.clone(), c.rhs.clone()),
            };
            let equality = c.sense == Sense::Eq;
            if !equality && coeffs.len() == 1 && rhs.is_zero() && coeffs[0].1.is_negative() {
                let j = coeffs[0].0;
                is_bound_row[i] = true;
                if bound[j].is_none() {
                    bound[j] = Some((i, -&coeffs[0].1));
                }
            }
            rows.push(LeRow { coeffs, rhs, equality });
        }
        Canonical { nvars, cmax, rows, bound, is_bound_row }
    }

    pub fn active_rows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.rows.len()).filter(|&i| !self.is_bound_row[i])
    }

    pub fn basis_size(&self, orientation: Orientation) -> usize {
        match orientation {
            Orientation::Dual => self.nvars,
            _ => self.active_rows().count(),
        }
    }

    /// Pick the orientation with the smaller basis; ties go to the primal.
    pub fn resolve(&self, requested: Orientation) -> Orientation {
        match requested {
            Orientation::Auto => {
                if self.basis_size(Orientation::Dual) < self.basis_size(Orientation::Primal) {
                    Orientation::Dual
                } else {
                    Orientation::Primal
                }
            }
            o => o,
        }
    }
}

pub(crate) struct StandardForm {
    pub orientation: Orientation,
    pub m: usize,
    pub cols: Vec<Vec<(usize, Rational)>>,
    pub kinds: Vec<ColKind>,
    pub b: Vec<Rational>,
    pub cost: Vec<Rational>,
}

impl StandardForm {
    pub fn new(canon: &Canonical, orientation: Orientation) -> Self {
        match orientation {
            Orientation::Dual => Self::dual(canon),
            _ => Self::primal(canon),
        }
    }

    fn primal(canon: &Canonical) -> Self {
        let active: Vec<usize> = canon.active_rows().collect();
        let m = active.len();
        let mut var_cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); canon.nvars];
        for (pos, &i) in active.iter().enumerate() {
            for (j, v) in &canon.rows[i].coeffs {
                var_cols[*j].push((pos, v.clone()));
            }
        }
        let (mut cols, mut kinds, mut cost) = (Vec::new(), Vec::new(), Vec::new());
        for (j, col) in var_cols.into_iter().enumerate() {
            let free = canon.bound[j].is_none();
            if free {
                cols.push(col.iter().map(|(i, v)| (*i, -v)).collect());
                kinds.push(ColKind::VarNeg(j));
                cost.push(canon.cmax[j].clone());
            }
            cols.push(col);
            kinds.push(ColKind::VarPos(j));
            cost.push(-&canon.cmax[j]);
        }
        for (pos, &i) in active.iter().enumerate() {
            if !canon.rows[i].equality {
                cols.push(vec![(pos, Rational::from_integer(1.into()))]);
                kinds.push(ColKind::Slack(i));
                cost.push(Rational::zero());
            }
        }
        let b = active.iter().map(|&i| canon.rows[i].rhs.clone()).collect();
        StandardForm { orientation: Orientation::Primal, m, cols, kinds, b, cost }
    }

    fn dual(canon: &Canonical) -> Self {
        let m = canon.nvars;
        let (mut cols, mut kinds, mut cost) = (Vec::new(), Vec::new(), Vec::new());
        for i in canon.active_rows() {
            let row = &canon.rows[i];
            if row.equality {
                cols.push(row.coeffs.clone());
                kinds.push(ColKind::ZPos(i));
                cost.push(row.rhs.clone());
                cols.push(row.coeffs.iter().map(|(j, v)| (*j, -v)).collect());
                kinds.push(ColKind::ZNeg(i));
                cost.push(-&row.rhs);
            } else {
                cols.push(row.coeffs.clone());
                kinds.push(ColKind::Y(i));
                cost.push(row.rhs.clone());
            }
        }
        for j in 0..m {
            if canon.bound[j].is_some() {
                cols.push(vec![(j, Rational::from_integer((-1).into()))]);
                kinds.push(ColKind::Surplus(j));
                cost.push(Rational::zero());
            }
        }
        StandardForm { orientation: Orientation::Dual, m, cols, kinds, b: canon.cmax.clone(), cost }
    }

    /// Model-space primal point and `<=`-form row multipliers from column
    /// values `y` and simplex multipliers `pi`.
    pub fn recover(&self, canon: &Canonical, y: &[Rational], pi: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
        let mut x = vec![Rational::zero(); canon.nvars];
        let mut duals = vec![Rational::zero(); canon.rows.len()];
        match self.orientation {
            Orientation::Dual => {
                x.clone_from_slice(pi);
                for (k, kind) in self.kinds.iter().enumerate() {
                    match *kind {
                        ColKind::Y(i) | ColKind::ZPos(i) => duals[i] += &y[k],
                        ColKind::ZNeg(i) => duals[i] -= &y[k],
                        ColKind::Surplus(j) => {
                            let (row, a) = canon.bound[j].as_ref().expect("surplus only for bounded variables");
                            duals[*row] = &y[k] / a;
                        }
                        _ => unreachable!("primal column in dual orientation"),
                    }
                }
            }
            _ => {
                for (k, kind) in self.kinds.iter().enumerate() {
                    match *kind {
                        ColKind::VarPos(j) => x[j] += &y[k],
                        ColKind::VarNeg(j) => x[j] -= &y[k],
                        ColKind::Slack(_) => {}
                        _ => unreachable!("dual column in primal orientation"),
                    }
                }
                for (pos, i) in canon.active_rows().enumerate() {
                    duals[i] = -&pi[pos];
                }
                fill_bound_duals(canon, &mut duals);
            }
        }
        (x, duals)
    }
}

/// Set the multiplier of each variable's first bound row from stationarity.
fn fill_bound_duals(canon: &Canonical, duals: &mut [Rational]) {
    let mut grad = vec![Rational::zero(); canon.nvars];
    for (i, row) in canon.rows.iter().enumerate() {
        if canon.is_bound_row[i] || duals[i].is_zero() {
            continue;
        }
        for (j, v) in &row.coeffs {
            grad[*j] += &duals[i] * v;
        }
    }
    for j in 0..canon.nvars {
        if let Some((row, a)) = &canon.bound[j] {
            duals[*row] = (&grad[j] - &canon.cmax[j]) / a;
        }
    }
}
