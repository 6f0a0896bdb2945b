//! Two-phase revised simplex on `min c^T y, A y = b, y >= 0` with a dense basis inverse.

use std::time::Instant;

use super::scalar::Scalar;
use super::PivotRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
    Numerical,
}

pub(crate) struct Limits {
    pub max_pivots: Option<u64>,
    pub deadline: Option<Instant>,
}

/// Consecutive degenerate pivots after which the largest-coefficient rule
/// hands over to Bland's rule.
const DEGENERATE_SWITCH: u32 = 40;

pub(crate) struct Simplex<T: Scalar> {
    m: usize,
    /// Real columns followed by one artificial per row.
    cols: Vec<Vec<(usize, T)>>,
    n_real: usize,
    b: Vec<T>,
    cost: Vec<T>,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    binv: Vec<Vec<T>>,
    xb: Vec<T>,
    pi: Vec<T>,
    pub pivots: u64,
    pub phase1_pivots: u64,
    rule: PivotRule,
    refactor_every: u64,
    since_refactor: u64,
}

impl<T: Scalar> Simplex<T> {
    pub fn new(m: usize, mut cols: Vec<Vec<(usize, T)>>, b: Vec<T>, cost: Vec<T>, rule: PivotRule) -> Self {
        let n_real = cols.len();
        for (i, bi) in b.iter().enumerate() {
            let sign = if bi.is_neg() { T::one().neg() } else { T::one() };
            cols.push(vec![(i, sign)]);
        }
        let ncols = cols.len();
        let mut s = Simplex {
            m,
            cols,
            n_real,
            b,
            cost,
            basis: (n_real..n_real + m).collect(),
            position: vec![None; ncols],
            binv: Vec::new(),
            xb: Vec::new(),
            pi: vec![T::zero(); m],
            pivots: 0,
            phase1_pivots: 0,
            rule,
            refactor_every: if T::EXACT { u64::MAX } else { 50.max(m as u64 / 4) },
            since_refactor: 0,
        };
        s.sync_positions();
        s.refactor().expect("artificial basis is nonsingular");
        s
    }

    fn sync_positions(&mut self) {
        self.position.iter_mut().for_each(|p| *p = None);
        for (i, &j) in self.basis.iter().enumerate() {
            self.position[j] = Some(i);
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_real
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    /// Value of every real column at the current basis.
    pub fn values(&self) -> Vec<T> {
        let mut v = vec![T::zero(); self.n_real];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.n_real {
                v[j] = self.xb[i].clone();
            }
        }
        v
    }

    /// Simplex multipliers `pi = c_B^T B^{-1}` for the phase-two costs.
    pub fn multipliers(&self) -> Vec<T> {
        self.compute_pi(&self.phase2_cost_vec())
    }

    #[cfg(test)]
    pub fn objective(&self) -> T {
        let mut total = T::zero();
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.n_real {
                total = total.add(&self.cost[j].mul(&self.xb[i]));
            }
        }
        total
    }

    fn phase1_cost_vec(&self) -> Vec<T> {
        (0..self.cols.len()).map(|j| if self.is_artificial(j) { T::one() } else { T::zero() }).collect()
    }

    fn phase2_cost_vec(&self) -> Vec<T> {
        (0..self.cols.len()).map(|j| if j < self.n_real { self.cost[j].clone() } else { T::zero() }).collect()
    }

    fn compute_pi(&self, cost: &[T]) -> Vec<T> {
        let mut pi = vec![T::zero(); self.m];
        for (i, &j) in self.basis.iter().enumerate() {
            let c = &cost[j];
            if c.is_zero() && T::EXACT {
                continue;
            }
            for (k, p) in pi.iter_mut().enumerate() {
                let v = &self.binv[i][k];
                if !Scalar::is_zero(v) || !T::EXACT {
                    *p = p.add(&c.mul(v));
                }
            }
        }
        pi
    }

    /// Rebuild `B^{-1}` and `x_B` from the basis by Gauss-Jordan elimination.
    fn refactor(&mut self) -> Result<(), ()> {
        let m = self.m;
        let mut a: Vec<Vec<T>> = vec![vec![T::zero(); m]; m];
        for (pos, &j) in self.basis.iter().enumerate() {
            for (i, v) in &self.cols[j] {
                a[*i][pos] = v.clone();
            }
        }
        let mut inv: Vec<Vec<T>> = (0..m)
            .map(|i| (0..m).map(|k| if i == k { T::one() } else { T::zero() }).collect())
            .collect();
        for col in 0..m {
            let pivot = if T::EXACT {
                (col..m).find(|&i| !Scalar::is_zero(&a[i][col]))
            } else {
                (col..m)
                    .max_by(|&x, &y| a[x][col].abs_f64().partial_cmp(&a[y][col].abs_f64()).unwrap())
                    .filter(|&i| a[i][col].abs_f64() > 1e-12)
            };
            let p = pivot.ok_or(())?;
            a.swap(col, p);
            inv.swap(col, p);
            let d = a[col][col].clone();
            for k in 0..m {
                a[col][k] = a[col][k].div(&d);
                inv[col][k] = inv[col][k].div(&d);
            }
            let nz_a: Vec<usize> = (0..m).filter(|&k| !Scalar::is_zero(&a[col][k]) || !T::EXACT).collect();
            let nz_i: Vec<usize> = (0..m).filter(|&k| !Scalar::is_zero(&inv[col][k]) || !T::EXACT).collect();
            let (row_a, row_i) = (a[col].clone(), inv[col].clone());
            for i in 0..m {
                if i == col || (T::EXACT && Scalar::is_zero(&a[i][col])) {
                    continue;
                }
                let f = a[i][col].clone();
                for &k in &nz_a {
                    a[i][k].sub_mul(&f, &row_a[k]);
                }
                for &k in &nz_i {
                    inv[i][k].sub_mul(&f, &row_i[k]);
                }
            }
        }
        // Rows of `inv` are now indexed by basis position.
        self.binv = inv;
        self.xb = (0..m)
            .map(|i| {
                let mut s = T::zero();
                for (k, bk) in self.b.iter().enumerate() {
                    if !T::EXACT || !Scalar::is_zero(bk) {
                        s = s.add(&self.binv[i][k].mul(bk));
                    }
                }
                if !T::EXACT && s.abs_f64() <= 1e-11 {
                    s = T::zero();
                }
                s
            })
            .collect();
        self.since_refactor = 0;
        Ok(())
    }

    /// Install `basis` (one column per row). Returns false when it is singular
    /// or not primal feasible; the current state is then left untouched.
    pub fn install_basis(&mut self, basis: &[usize]) -> bool {
        if basis.len() != self.m || basis.iter().any(|&j| j >= self.cols.len()) {
            return false;
        }
        let mut seen = vec![false; self.cols.len()];
        if basis.iter().any(|&j| std::mem::replace(&mut seen[j], true)) {
            return false;
        }
        let saved = (self.basis.clone(), self.binv.clone(), self.xb.clone());
        self.basis = basis.to_vec();
        let ok = self.refactor().is_ok()
            && self.xb.iter().all(|v| !v.is_neg())
            && self.basis.iter().zip(&self.xb).all(|(&j, v)| !self.is_artificial(j) || Scalar::is_zero(v));
        if ok {
            self.sync_positions();
        } else {
            (self.basis, self.binv, self.xb) = saved;
        }
        ok
    }

    fn column_image(&self, q: usize) -> Vec<T> {
        let mut w = vec![T::zero(); self.m];
        for (i, wi) in w.iter_mut().enumerate() {
            let row = &self.binv[i];
            let mut s = T::zero();
            for (k, v) in &self.cols[q] {
                if !T::EXACT || !Scalar::is_zero(&row[*k]) {
                    s = s.add(&row[*k].mul(v));
                }
            }
            *wi = s;
        }
        w
    }

    fn reduced_cost(&self, cost: &[T], j: usize) -> T {
        let mut d = cost[j].clone();
        for (k, v) in &self.cols[j] {
            d.sub_mul(&self.pi[*k], v);
        }
        d
    }

    fn price(&self, cost: &[T], allow_artificial: bool, bland: bool) -> Option<(usize, T)> {
        let limit = if allow_artificial { self.cols.len() } else { self.n_real };
        let mut best: Option<(usize, T, f64)> = None;
        for j in 0..limit {
            if self.position[j].is_some() {
                continue;
            }
            let d = self.reduced_cost(cost, j);
            if !d.is_neg() {
                continue;
            }
            if bland {
                return Some((j, d));
            }
            let norm = self.cols[j].iter().map(|(_, v)| v.abs_f64() * v.abs_f64()).sum::<f64>().sqrt().max(1e-300);
            let score = d.abs_f64() / norm;
            if best.as_ref().map_or(true, |b| score > b.2) {
                best = Some((j, d, score));
            }
        }
        best.map(|(j, d, _)| (j, d))
    }

    fn ratio_test(&self, w: &[T], bland: bool) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for i in 0..self.m {
            if !w[i].is_pos() {
                continue;
            }
            let ratio = self.xb[i].div(&w[i]);
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let diff = ratio.sub(&br);
                    if diff.is_neg() {
                        Some((i, ratio))
                    } else if Scalar::is_zero(&diff) {
                        let better = if bland || T::EXACT {
                            self.basis[i] < self.basis[bi]
                        } else {
                            w[i].abs_f64() > w[bi].abs_f64()
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, q: usize, w: &[T], d: &T) -> bool {
        let theta = self.xb[r].div(&w[r]);
        let degenerate = Scalar::is_zero(&theta);
        for i in 0..self.m {
            if i != r && !Scalar::is_zero(&w[i]) {
                self.xb[i].sub_mul(&theta, &w[i]);
                if !T::EXACT && self.xb[i].is_neg() {
                    self.xb[i] = T::zero();
                }
                self.xb[i].clean();
            }
        }
        self.xb[r] = theta;
        let wr = w[r].clone();
        for v in self.binv[r].iter_mut() {
            if !T::EXACT || !Scalar::is_zero(v) {
                *v = v.div(&wr);
            }
        }
        let nz: Vec<usize> = (0..self.m).filter(|&k| !Scalar::is_zero(&self.binv[r][k]) || !T::EXACT).collect();
        let row_r = self.binv[r].clone();
        for i in 0..self.m {
            if i == r || Scalar::is_zero(&w[i]) {
                continue;
            }
            let f = &w[i];
            let row = &mut self.binv[i];
            for &k in &nz {
                row[k].sub_mul(f, &row_r[k]);
            }
        }
        for &k in &nz {
            let delta = d.mul(&row_r[k]);
            self.pi[k] = self.pi[k].add(&delta);
        }
        self.position[self.basis[r]] = None;
        self.basis[r] = q;
        self.position[q] = Some(r);
        self.pivots += 1;
        self.since_refactor += 1;
        degenerate
    }

    fn iterate(&mut self, cost: &[T], allow_artificial: bool, limits: &Limits) -> Outcome {
        self.pi = self.compute_pi(cost);
        let mut degenerate_run = 0u32;
        loop {
            if limits.max_pivots.is_some_and(|mp| self.pivots >= mp)
                || limits.deadline.is_some_and(|dl| Instant::now() >= dl)
            {
                return Outcome::Limit;
            }
            if self.since_refactor >= self.refactor_every {
                if self.refactor().is_err() {
                    return Outcome::Numerical;
                }
                self.pi = self.compute_pi(cost);
            }
            let bland = self.rule == PivotRule::Bland || degenerate_run >= DEGENERATE_SWITCH;
            let Some((q, d)) = self.price(cost, allow_artificial, bland) else {
                return Outcome::Optimal;
            };
            let w = self.column_image(q);
            let Some(r) = self.ratio_test(&w, bland) else {
                return Outcome::Unbounded;
            };
            if self.pivot(r, q, &w, &d) {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
        }
    }

    /// Replace basic artificials at zero by real columns where possible.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let row = self.binv[r].clone();
            let entering = (0..self.n_real).find(|&j| {
                self.position[j].is_none() && {
                    let mut s = T::zero();
                    for (k, v) in &self.cols[j] {
                        s = s.add(&row[*k].mul(v));
                    }
                    !Scalar::is_zero(&s)
                }
            });
            if let Some(q) = entering {
                let w = self.column_image(q);
                let zero = T::zero();
                self.pi = vec![T::zero(); self.m];
                self.pivot(r, q, &w, &zero);
            }
        }
    }

    fn phase1(&mut self, limits: &Limits) -> Outcome {
        if self.basis.iter().all(|&j| !self.is_artificial(j)) {
            return Outcome::Optimal;
        }
        let cost = self.phase1_cost_vec();
        let start = self.pivots;
        let out = self.iterate(&cost, true, limits);
        self.phase1_pivots += self.pivots - start;
        if out != Outcome::Optimal {
            return if out == Outcome::Unbounded { Outcome::Numerical } else { out };
        }
        let infeasibility = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&j, _)| self.is_artificial(j))
            .fold(T::zero(), |acc, (_, v)| acc.add(v));
        let tol_hit = if T::EXACT { infeasibility.is_pos() } else { infeasibility.abs_f64() > 1e-7 };
        if tol_hit {
            return Outcome::Infeasible;
        }
        self.drive_out_artificials();
        Outcome::Optimal
    }

    /// Run both phases from the current basis.
    pub fn solve(&mut self, limits: &Limits) -> Outcome {
        match self.phase1(limits) {
            Outcome::Optimal => {}
            other => return other,
        }
        let cost = self.phase2_cost_vec();
        self.iterate(&cost, false, limits)
    }
}
