//! Exact reductions applied before solving: equality rows `a x_j - a x_k = 0`
//! merge columns, singleton equalities fix columns, and rows that become
//! identical or empty are dropped. Every reduction is reversible for both the
//! primal point and the row multipliers, so the original model can still be
//! certified.

use std::collections::{HashMap, HashSet, VecDeque};

use num_traits::Zero;

use crate::lpbuild::{normalize_coeffs, Constraint, LpModel, Sense};
use crate::rational::Rational;

use super::standard::Canonical;

#[derive(Clone, Debug)]
enum ColMap {
    /// Equal to a column of the reduced model.
    Col(usize),
    Fixed(Rational),
}

#[derive(Clone, Debug)]
enum RowMap {
    /// Kept as this reduced row.
    Kept(usize),
    /// Redundant after substitution; multiplier zero.
    Dropped,
    /// Used to merge column `child` into its parent.
    Edge { child: usize },
    /// Used to fix the class whose root is `col`.
    Fix { col: usize },
}

/// One round of reductions.
#[derive(Clone, Debug)]
struct Round {
    cols: Vec<ColMap>,
    rows: Vec<RowMap>,
    /// Parent of each column in its merge tree.
    parent: Vec<Option<usize>>,
    /// Columns of each class, parents before children.
    order: Vec<Vec<usize>>,
}

/// The reduced model and how to map results back.
#[derive(Clone, Debug)]
pub(crate) struct Presolved {
    pub model: LpModel,
    rounds: Vec<(LpModel, Round)>,
}

fn find(uf: &mut [usize], mut a: usize) -> usize {
    while uf[a] != a {
        uf[a] = uf[uf[a]];
        a = uf[a];
    }
    a
}

fn merge_pair(c: &Constraint) -> Option<(usize, usize)> {
    match c.coeffs.as_slice() {
        [(j, a), (k, b)] if c.sense == Sense::Eq && c.rhs.is_zero() && *a == -b => Some((*j, *k)),
        _ => None,
    }
}

/// `None` when nothing reduces or the reductions expose a contradiction; the
/// solver then works on the model as given.
fn round(model: &LpModel) -> Option<(LpModel, Round)> {
    let nv = model.num_variables();
    let mut uf: Vec<usize> = (0..nv).collect();
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for (i, c) in model.constraints.iter().enumerate() {
        if let Some((j, k)) = merge_pair(c) {
            let (a, b) = (find(&mut uf, j), find(&mut uf, k));
            if a != b {
                uf[a.max(b)] = a.min(b);
                edges.push((i, j, k));
            }
        }
    }
    let root: Vec<usize> = (0..nv).map(|j| find(&mut uf, j)).collect();

    let mut fixed: HashMap<usize, (Rational, usize)> = HashMap::new();
    for (i, c) in model.constraints.iter().enumerate() {
        if let ([(j, a)], Sense::Eq) = (c.coeffs.as_slice(), c.sense) {
            let v = &c.rhs / a;
            match fixed.get(&root[*j]) {
                Some((w, _)) if *w != v => return None,
                Some(_) => {}
                None => {
                    fixed.insert(root[*j], (v, i));
                }
            }
        }
    }
    if edges.is_empty() && fixed.is_empty() {
        return None;
    }

    // Merge trees, rooted at the fixing column of a fixed class and at the class root otherwise.
    let mut adj: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for &(i, j, k) in &edges {
        adj.entry(j).or_default().push((k, i));
        adj.entry(k).or_default().push((j, i));
    }
    let mut rows = vec![RowMap::Dropped; model.num_constraints()];
    let mut parent = vec![None; nv];
    let mut order: Vec<Vec<usize>> = Vec::new();
    let mut visited = vec![false; nv];
    let mut start_of: HashMap<usize, usize> = HashMap::new();
    for (&rt, (_, i)) in &fixed {
        let j = model.constraints[*i].coeffs[0].0;
        start_of.insert(rt, j);
        rows[*i] = RowMap::Fix { col: j };
    }
    for j in 0..nv {
        if root[j] != j {
            continue;
        }
        let start = start_of.get(&j).copied().unwrap_or(j);
        let mut seq = vec![start];
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &(w, i) in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = Some(u);
                    rows[i] = RowMap::Edge { child: w };
                    seq.push(w);
                    queue.push_back(w);
                }
            }
        }
        order.push(seq);
    }

    let mut reduced = LpModel::new(model.meta.clone(), model.objective.sense);
    let mut cols = vec![ColMap::Fixed(Rational::zero()); nv];
    let mut new_index: HashMap<usize, usize> = HashMap::new();
    for j in 0..nv {
        let rt = root[j];
        cols[j] = match fixed.get(&rt) {
            Some((v, _)) => ColMap::Fixed(v.clone()),
            None => ColMap::Col(*new_index.entry(rt).or_insert_with(|| {
                reduced.variables.push(model.variables[rt].clone());
                reduced.variables.len() - 1
            })),
        };
    }
    let substitute = |coeffs: &[(usize, Rational)]| -> (Vec<(usize, Rational)>, Rational) {
        let mut out = Vec::with_capacity(coeffs.len());
        let mut constant = Rational::zero();
        for (j, v) in coeffs {
            match &cols[*j] {
                ColMap::Col(k) => out.push((*k, v.clone())),
                ColMap::Fixed(x) => constant += v * x,
            }
        }
        (normalize_coeffs(out), constant)
    };
    let (obj, constant) = substitute(&model.objective.coeffs);
    reduced.objective.coeffs = obj;
    reduced.objective.offset = &model.objective.offset + constant;

    let mut seen: HashSet<(Vec<(usize, Rational)>, Sense, Rational)> = HashSet::new();
    for (i, c) in model.constraints.iter().enumerate() {
        let (coeffs, constant) = substitute(&c.coeffs);
        let rhs = &c.rhs - constant;
        if coeffs.is_empty() {
            if !c.sense.holds(&Rational::zero(), &rhs) {
                return None;
            }
            continue;
        }
        if !matches!(rows[i], RowMap::Dropped) {
            continue;
        }
        if seen.insert((coeffs.clone(), c.sense, rhs.clone())) {
            rows[i] = RowMap::Kept(reduced.constraints.len());
            reduced.constraints.push(Constraint { coeffs, sense: c.sense, rhs, tag: c.tag, label: c.label.clone() });
        }
    }
    Some((reduced, Round { cols, rows, parent, order }))
}

impl Round {
    fn expand<T: Clone>(&self, x: &[T], fixed: impl Fn(&Rational) -> T) -> Vec<T> {
        self.cols
            .iter()
            .map(|c| match c {
                ColMap::Col(k) => x[*k].clone(),
                ColMap::Fixed(v) => fixed(v),
            })
            .collect()
    }

    /// Multipliers of `model` from those of the reduced model.
    fn lift_duals(&self, model: &LpModel, y_red: &[Rational]) -> Vec<Rational> {
        let canon = Canonical::new(model);
        let mut y = vec![Rational::zero(); model.num_constraints()];
        let mut residual = canon.cmax.clone();
        for (i, map) in self.rows.iter().enumerate() {
            if let RowMap::Kept(k) = map {
                y[i] = y_red[*k].clone();
                for (j, v) in &canon.rows[i].coeffs {
                    residual[*j] -= &y[i] * v;
                }
            }
        }
        let mut edge_of: HashMap<usize, usize> = HashMap::new();
        let mut fix_of: HashMap<usize, usize> = HashMap::new();
        for (i, map) in self.rows.iter().enumerate() {
            match map {
                RowMap::Edge { child } => {
                    edge_of.insert(*child, i);
                }
                RowMap::Fix { col } => {
                    fix_of.insert(*col, i);
                }
                _ => {}
            }
        }
        for seq in &self.order {
            for &c in seq.iter().rev() {
                let coeff = |i: usize, j: usize| {
                    canon.rows[i].coeffs.iter().find(|(k, _)| *k == j).map(|(_, v)| v.clone()).expect("column in row")
                };
                if let Some(p) = self.parent[c] {
                    let i = edge_of[&c];
                    y[i] = &residual[c] / coeff(i, c);
                    let flow = &y[i] * coeff(i, p);
                    residual[p] -= flow;
                    residual[c] = Rational::zero();
                } else if let Some(&i) = fix_of.get(&c) {
                    y[i] = &residual[c] / coeff(i, c);
                    residual[c] = Rational::zero();
                }
            }
        }
        y
    }
}

impl Presolved {
    pub fn new(model: &LpModel) -> Self {
        let mut rounds = Vec::new();
        let mut current = model.clone();
        while let Some((next, r)) = round(&current) {
            rounds.push((current, r));
            current = next;
        }
        Presolved { model: current, rounds }
    }

    #[cfg(test)]
    pub fn is_trivial(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn expand_exact(&self, x: &[Rational]) -> Vec<Rational> {
        self.rounds.iter().rev().fold(x.to_vec(), |acc, (_, r)| r.expand(&acc, Rational::clone))
    }

    pub fn expand_float(&self, x: &[f64]) -> Vec<f64> {
        self.rounds.iter().rev().fold(x.to_vec(), |acc, (_, r)| r.expand(&acc, crate::rational::to_f64))
    }

    pub fn lift_duals(&self, y: &[Rational]) -> Vec<Rational> {
        self.rounds.iter().rev().fold(y.to_vec(), |acc, (m, r)| r.lift_duals(m, &acc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpbuild::{ModelKind, ModelMeta, ObjSense, Provenance, VarTag};
    use crate::rational::int;

    fn model() -> LpModel {
        let meta = ModelMeta { kind: ModelKind::Delsarte, r: 1, n: 1, d: 1, variant: None, value_root: 1, eliminated: 0, notes: vec![] };
        let mut m = LpModel::new(meta, ObjSense::Maximize);
        for i in 0..4 {
            m.add_variable(VarTag::Delsarte(i));
        }
        m.set_objective(vec![(0, int(1)), (1, int(2)), (2, int(3)), (3, int(1))]);
        m.add_constraint(vec![(0, int(1)), (1, int(-1))], Sense::Eq, int(0), Provenance::C4, "");
        m.add_constraint(vec![(1, int(2)), (2, int(-2))], Sense::Eq, int(0), Provenance::C4, "");
        m.add_constraint(vec![(3, int(2))], Sense::Eq, int(1), Provenance::C1, "");
        m.add_constraint(vec![(0, int(1)), (3, int(1))], Sense::Le, int(3), Provenance::C2, "");
        m.add_constraint(vec![(2, int(1)), (3, int(1))], Sense::Le, int(3), Provenance::C2, "");
        m
    }

    #[test]
    fn merges_fixes_and_deduplicates() {
        let m = model();
        let p = Presolved::new(&m);
        assert_eq!(p.model.num_variables(), 1);
        assert_eq!(p.model.num_constraints(), 1);
        assert_eq!(p.model.objective.offset, Rational::new(1.into(), 2.into()));
        let x = p.expand_exact(&[int(5)]);
        assert_eq!(x, vec![int(5), int(5), int(5), Rational::new(1.into(), 2.into())]);
    }

    #[test]
    fn reduced_solve_is_certified_on_the_original() {
        let m = model();
        for opts in [super::super::SolveOptions::default(), super::super::SolveOptions::cold()] {
            let r = super::super::solve_exact(&m, &opts).unwrap();
            assert_eq!(r.objective, Some(Rational::new(31.into(), 2.into())));
            let duals = r.duals.clone().unwrap();
            assert!(super::super::certify(&m, &r.dense_solution(4), &duals).certified());
        }
    }

    #[test]
    fn contradictions_leave_the_model_alone() {
        let mut m = model();
        m.add_constraint(vec![(3, int(1))], Sense::Eq, int(2), Provenance::C1, "");
        assert!(Presolved::new(&m).is_trivial());
    }
}
