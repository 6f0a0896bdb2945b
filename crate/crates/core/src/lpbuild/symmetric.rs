use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::cube::RowSubset;
use crate::error::{Error, Result};
use crate::indexset::{
    gl_orbits, index_set_size, is_distance_admissible, is_even_admissible, multinomial, IndexSet, MultiIndex,
    OrbitPartition, MAX_ORBIT_R,
};
use crate::krawtchouk::{binom, KrawtchoukCache};
use crate::lpbuild::model::*;
use crate::rational::{big, int, Rational};

/// Largest index set the symmetrized builder will enumerate.
pub const MAX_INDEX_SET: u128 = 2_000_000;
/// Largest number of Krawtchouk entries (rows times index-set size) evaluated
/// for one model.
pub const MAX_KRAWTCHOUK_WORK: u128 = 4_000_000_000;

/// Knobs that do not change the optimum.
#[derive(Clone, Copy)]
pub struct BuildOptions<'a> {
    pub cache: &'a KrawtchoukCache,
    /// Emit the C2 family for every subset and every `beta`, even when fused
    /// rows make most of them redundant.
    pub all_subsets: bool,
}

impl Default for BuildOptions<'_> {
    fn default() -> Self {
        BuildOptions { cache: KrawtchoukCache::global(), all_subsets: false }
    }
}

pub(crate) fn check_params(n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if d == 0 || d > n {
        return Err(Error::InvalidArgument(format!("d = {d} outside 1..={n}")));
    }
    if 2 * d > n {
        log::info!("d = {d} exceeds n/2 = {}; the bounds are still valid LPs but outside the usual regime", n / 2);
    }
    Ok(())
}

/// The classic program over `a_0..a_n`.
pub fn build_delsarte(n: usize, d: usize) -> Result<LpModel> {
    build_delsarte_with(n, d, KrawtchoukCache::global())
}

pub fn build_delsarte_with(n: usize, d: usize, cache: &KrawtchoukCache) -> Result<LpModel> {
    check_params(n, d)?;
    let table = cache.full(1, n)?;
    // In I_{1,n} the composition (n - k, k) has rank k.
    let meta = ModelMeta {
        kind: ModelKind::Delsarte,
        r: 1,
        n,
        d,
        variant: None,
        value_root: 1,
        eliminated: 0,
        notes: Vec::new(),
    };
    let mut m = LpModel::new(meta, ObjSense::Maximize);
    for i in 0..=n {
        m.add_variable(VarTag::Delsarte(i));
    }
    m.set_objective((0..=n).map(|i| (i, int(1))).collect());
    m.add_constraint(vec![(0, int(1))], Sense::Eq, int(1), Provenance::C1, "a_0 = 1");
    for i in 0..=n {
        m.add_constraint(vec![(i, int(1))], Sense::Ge, int(0), Provenance::C2, format!("a_{i} >= 0"));
    }
    for i in 0..=n {
        // K_i(j) for all j: row j of the table holds K_alpha(beta_j) over alpha.
        let coeffs = (0..=n).map(|j| Ok((j, big(table.row(j)?.get(i))))).collect::<Result<Vec<_>>>()?;
        m.add_constraint(coeffs, Sense::Ge, int(0), Provenance::C2, format!("sum_j a_j K_{i}(j) >= 0"));
    }
    for i in 1..d {
        m.add_constraint(vec![(i, int(1))], Sense::Eq, int(0), Provenance::C3, format!("a_{i} = 0"));
    }
    Ok(m)
}

/// The symmetrized program over `phi_alpha`, `alpha` in `I_{r,n}`.
pub fn build_delsarte_lin(r: usize, n: usize, d: usize, variant: VariantSpec) -> Result<LpModel> {
    build_delsarte_lin_with(r, n, d, variant, BuildOptions::default())
}

pub fn build_delsarte_lin_with(
    r: usize,
    n: usize,
    d: usize,
    variant: VariantSpec,
    opts: BuildOptions<'_>,
) -> Result<LpModel> {
    check_params(n, d)?;
    variant.validate(d)?;
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    if r > MAX_ORBIT_R {
        return Err(Error::Capability(format!("symmetrized programs support r <= {MAX_ORBIT_R}")));
    }
    let size = index_set_size(r, n);
    if size > MAX_INDEX_SET {
        return Err(Error::Capability(format!("|I_{{{r},{n}}}| = {size} exceeds {MAX_INDEX_SET}")));
    }
    let orbits = gl_orbits(r, n)?;
    let idx = orbits.index_set().clone();
    let keep: Vec<bool> = idx
        .items()
        .iter()
        .map(|a| is_distance_admissible(a, d) && (!variant.even_reduction || is_even_admissible(a)))
        .collect();
    let eliminated = keep.iter().filter(|k| !**k).count();

    let meta = ModelMeta {
        kind: ModelKind::DelsarteLin,
        r,
        n,
        d,
        variant: Some(variant),
        value_root: match variant.objective_mode {
            ObjectiveMode::Obj => 1,
            ObjectiveMode::ObjProduct => r as u32,
        },
        eliminated,
        notes: Vec::new(),
    };
    let mut m = LpModel::new(meta, ObjSense::Maximize);

    // Column of every index-set element (None when eliminated).
    let mut col: Vec<Option<usize>> = vec![None; idx.len()];
    if variant.gl_fuse {
        for o in 0..orbits.num_orbits() {
            let members = orbits.members(o);
            if !keep[members[0]] {
                continue;
            }
            let j = m.add_variable(VarTag::Orbit { rep: orbits.representative(o).clone(), size: members.len() });
            for &a in members {
                col[a] = Some(j);
            }
        }
    } else {
        for (a, alpha) in idx.items().iter().enumerate() {
            if keep[a] {
                col[a] = Some(m.add_variable(VarTag::Phi(alpha.clone())));
            }
        }
    }

    m.set_objective(objective_terms(&idx, &col, r, n, variant.objective_mode)?);

    let zero = MultiIndex::unit(r, 0, n as u32)?;
    let z = col[idx.rank(&zero).expect("n eps_0 in I_{r,n}")].expect("n eps_0 is admissible");
    m.add_constraint(vec![(z, int(1))], Sense::Eq, int(1), Provenance::C1, "phi_{n eps_0} = 1");

    let (subsets, tag): (Vec<RowSubset>, Provenance) = match variant.constraint_mode {
        ConstraintMode::C2Weak => (vec![RowSubset::empty(), RowSubset::full(r)], Provenance::C2Weak),
        ConstraintMode::C2 if variant.gl_fuse && !opts.all_subsets => {
            ((0..=r).map(|k| RowSubset((1u32 << k) - 1)).collect(), Provenance::C2)
        }
        ConstraintMode::C2 => (RowSubset::all(r).collect(), Provenance::C2),
    };
    let work: u128 = subsets
        .iter()
        .map(|s| {
            let gl_invariant = s.is_empty() || s.len() == r;
            let rows = if variant.gl_fuse && gl_invariant && !opts.all_subsets { orbits.num_orbits() } else { idx.len() };
            rows as u128 * idx.len() as u128
        })
        .sum();
    if work > MAX_KRAWTCHOUK_WORK {
        return Err(Error::Capability(format!(
            "(r, n) = ({r}, {n}) needs about {work} Krawtchouk evaluations, above {MAX_KRAWTCHOUK_WORK}"
        )));
    }
    let mut seen: HashSet<Vec<(usize, BigInt)>> = HashSet::new();
    let all_betas: Vec<usize> = (0..idx.len()).collect();
    let reps: Vec<usize> = (0..orbits.num_orbits()).map(|o| orbits.representative_rank(o)).collect();
    for s in subsets {
        // Fused rows are constant on GL orbits of beta when S is GL-invariant.
        let gl_invariant = s.is_empty() || s.len() == r;
        let betas = if variant.gl_fuse && gl_invariant && !opts.all_subsets { &reps } else { &all_betas };
        let rows = krawtchouk_rows(opts.cache, &col, betas, r, n, s)?;
        for (b, coeffs) in rows {
            if coeffs.is_empty() || !seen.insert(coeffs.clone()) {
                continue;
            }
            let label = format!("S={:#b} beta={:?}", s.0, idx.get(b).counts());
            m.add_constraint(coeffs.into_iter().map(|(j, v)| (j, big(v))).collect(), Sense::Ge, int(0), tag, label);
        }
    }

    if !variant.gl_fuse {
        add_orbit_equalities(&mut m, &orbits, &col);
    }
    Ok(m)
}

fn objective_terms(
    idx: &IndexSet,
    col: &[Option<usize>],
    r: usize,
    n: usize,
    mode: ObjectiveMode,
) -> Result<Vec<(usize, Rational)>> {
    let mut terms = Vec::new();
    match mode {
        ObjectiveMode::Obj => {
            for k in 0..=n {
                let a = MultiIndex::first_row_weight(r, n as u32, k as u32)?;
                if let Some(j) = col[idx.rank(&a).expect("in I_{r,n}")] {
                    terms.push((j, big(binom(n as u32, k as u32))));
                }
            }
        }
        ObjectiveMode::ObjProduct => {
            // sum_X f(X) = sum_alpha C(n, alpha) phi_alpha.
            for (a, alpha) in idx.items().iter().enumerate() {
                if let Some(j) = col[a] {
                    terms.push((j, multinomial(alpha)));
                }
            }
        }
    }
    Ok(terms)
}

/// For each listed `beta`, the row `alpha -> K^S_alpha(beta)` mapped onto columns.
fn krawtchouk_rows(
    cache: &KrawtchoukCache,
    col: &[Option<usize>],
    betas: &[usize],
    r: usize,
    n: usize,
    s: RowSubset,
) -> Result<Vec<(usize, Vec<(usize, BigInt)>)>> {
    let table = cache.table(r, n, s)?;
    betas
        .par_iter()
        .map(|&b| {
            let row = table.row(b)?;
            let mut acc: HashMap<usize, BigInt> = HashMap::new();
            for (a, v) in row.entries() {
                if let Some(j) = col[a] {
                    *acc.entry(j).or_insert_with(BigInt::zero) += v;
                }
            }
            let mut coeffs: Vec<(usize, BigInt)> = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            coeffs.sort_unstable_by_key(|c| c.0);
            Ok((b, coeffs))
        })
        .collect()
}

fn add_orbit_equalities(m: &mut LpModel, orbits: &OrbitPartition, col: &[Option<usize>]) {
    for o in 0..orbits.num_orbits() {
        let rep = orbits.representative_rank(o);
        let Some(jr) = col[rep] else { continue };
        for &a in orbits.members(o) {
            if a == rep {
                continue;
            }
            let j = col[a].expect("orbits are kept or dropped whole");
            let label = format!("{} = {}", m.variables[j].name, m.variables[jr].name);
            m.add_constraint(vec![(j, int(1)), (jr, int(-1))], Sense::Eq, int(0), Provenance::C4, label);
        }
    }
}

/// Merge the columns of every `GL(r,2)` orbit into one and drop duplicate rows.
pub fn fuse_gl(model: &LpModel) -> Result<LpModel> {
    let (r, n) = (model.meta.r, model.meta.n);
    let orbits = gl_orbits(r, n)?;
    let mut new_col: Vec<usize> = Vec::with_capacity(model.variables.len());
    let mut by_orbit: HashMap<usize, usize> = HashMap::new();
    let mut fused = LpModel::new(model.meta.clone(), model.objective.sense);
    for v in &model.variables {
        let VarTag::Phi(alpha) = &v.tag else {
            return Err(Error::InvalidArgument(format!("variable {} is not indexed by I_{{r,n}}", v.name)));
        };
        let o = orbits
            .orbit_of(alpha)
            .ok_or_else(|| Error::Dimension(format!("{} outside I_{{{r},{n}}}", v.name)))?;
        let j = *by_orbit.entry(o).or_insert_with(|| {
            fused.add_variable(VarTag::Orbit { rep: orbits.representative(o).clone(), size: orbits.members(o).len() })
        });
        new_col.push(j);
    }
    fused.set_objective(model.objective.coeffs.iter().map(|(j, v)| (new_col[*j], v.clone())).collect());
    fused.objective.offset = model.objective.offset.clone();
    let mut seen: HashSet<(Vec<(usize, Rational)>, Sense, Rational)> = HashSet::new();
    for c in &model.constraints {
        let coeffs = normalize_coeffs(c.coeffs.iter().map(|(j, v)| (new_col[*j], v.clone())).collect());
        if coeffs.is_empty() && c.sense.holds(&Rational::zero(), &c.rhs) {
            continue;
        }
        if !seen.insert((coeffs.clone(), c.sense, c.rhs.clone())) {
            continue;
        }
        fused.constraints.push(Constraint { coeffs, sense: c.sense, rhs: c.rhs.clone(), tag: c.tag, label: c.label.clone() });
    }
    if let Some(v) = fused.meta.variant.as_mut() {
        v.gl_fuse = true;
    }
    Ok(fused)
}

/// Point of the classic program induced by `phi` via `a_k = C(n,k) phi_{(n-k) eps_0 + k eps_1}`.
pub fn delsarte_point_from_phi(n: usize, phi_first_row: &[Rational]) -> Vec<Rational> {
    (0..=n).map(|k| big(binom(n as u32, k as u32)) * &phi_first_row[k]).collect()
}

/// The value of `phi` on a composition, for either fused or unfused models.
pub fn phi_value(model: &LpModel, x: &[Rational], alpha: &MultiIndex) -> Result<Rational> {
    let orbits = if model.variables.iter().any(|v| matches!(v.tag, VarTag::Orbit { .. })) {
        Some(gl_orbits(alpha.r(), alpha.n())?)
    } else {
        None
    };
    let target = match &orbits {
        Some(o) => o.canonical(alpha).cloned(),
        None => Some(alpha.clone()),
    };
    for (j, v) in model.variables.iter().enumerate() {
        match &v.tag {
            VarTag::Phi(a) | VarTag::Orbit { rep: a, .. } if Some(a) == target.as_ref() => return Ok(x[j].clone()),
            _ => {}
        }
    }
    Ok(Rational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::optimum;
    use crate::rational::ratio;

    fn value(m: &LpModel) -> Rational {
        optimum(m).unwrap().0
    }

    fn variant(constraint_mode: ConstraintMode, objective_mode: ObjectiveMode, gl_fuse: bool) -> VariantSpec {
        VariantSpec { constraint_mode, objective_mode, gl_fuse, even_reduction: false }
    }

    fn c2_rows(m: &LpModel) -> HashSet<Vec<(usize, Rational)>> {
        m.constraints.iter().filter(|c| c.tag == Provenance::C2).map(|c| c.coeffs.clone()).collect()
    }

    #[test]
    fn oversized_programs_are_refused() {
        let v = VariantSpec::default();
        assert!(matches!(build_delsarte_lin(3, 30, 6, v), Err(Error::Capability(_))));
        let unfused = VariantSpec { gl_fuse: false, ..v };
        assert!(matches!(build_delsarte_lin(3, 14, 6, unfused), Err(Error::Capability(_))));
    }

    #[test]
    fn classic_examples() {
        assert_eq!(value(&build_delsarte(13, 6).unwrap()), int(40));
        for n in 3..=6 {
            assert_eq!(value(&build_delsarte(n, 1).unwrap()), int(1 << n));
        }
        assert!(build_delsarte(5, 0).is_err());
        assert!(build_delsarte(5, 6).is_err());
    }

    #[test]
    fn r1_matches_classic() {
        for (n, d) in [(6, 2), (7, 3), (9, 4), (10, 3)] {
            let classic = value(&build_delsarte(n, d).unwrap());
            let lin = build_delsarte_lin(1, n, d, VariantSpec::default()).unwrap();
            let (v, x) = optimum(&lin).unwrap();
            assert_eq!(v, classic, "n={n} d={d}");
            let first_row: Vec<Rational> = (0..=n)
                .map(|k| phi_value(&lin, &x, &MultiIndex::first_row_weight(1, n as u32, k as u32).unwrap()).unwrap())
                .collect();
            let a = delsarte_point_from_phi(n, &first_row);
            let classic_model = build_delsarte(n, d).unwrap();
            assert!(classic_model.is_feasible(&a));
            assert_eq!(classic_model.objective_value(&a), classic);
        }
    }

    #[test]
    fn r2_at_13_6() {
        assert_eq!(value(&build_delsarte_lin(2, 13, 6, VariantSpec::default()).unwrap()), ratio(17152, 707));
        let weak = build_delsarte_lin(2, 13, 6, variant(ConstraintMode::C2Weak, ObjectiveMode::Obj, true)).unwrap();
        assert_eq!(value(&weak), int(32));
    }

    #[test]
    fn subset_dedup_matches_full_enumeration() {
        for n in 2..=6 {
            for d in [1, 2, 3] {
                if d > n {
                    continue;
                }
                let reduced = build_delsarte_lin(2, n, d, VariantSpec::default()).unwrap();
                let opts = BuildOptions { all_subsets: true, ..BuildOptions::default() };
                let full = build_delsarte_lin_with(2, n, d, VariantSpec::default(), opts).unwrap();
                assert_eq!(c2_rows(&reduced), c2_rows(&full), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn fused_and_unfused_agree() {
        let unfused = build_delsarte_lin(2, 6, 2, variant(ConstraintMode::C2, ObjectiveMode::Obj, false)).unwrap();
        let fused = build_delsarte_lin(2, 6, 2, VariantSpec::default()).unwrap();
        let v = value(&unfused);
        assert_eq!(v, value(&fused));
        let refused = fuse_gl(&unfused).unwrap();
        assert_eq!(refused.num_variables(), fused.num_variables());
        assert!(refused.constraints.iter().all(|c| c.tag != Provenance::C4));
        assert_eq!(value(&refused), v);
    }

    #[test]
    fn fusing_is_trivial_at_r1() {
        let m = build_delsarte_lin(1, 7, 3, variant(ConstraintMode::C2, ObjectiveMode::Obj, false)).unwrap();
        let f = fuse_gl(&m).unwrap();
        assert_eq!(f.num_variables(), m.num_variables());
        assert_eq!(f.num_constraints(), m.num_constraints());
    }

    #[test]
    fn fusing_halves_the_columns() {
        for n in [8, 10, 12] {
            let unfused = build_delsarte_lin(2, n, 1, variant(ConstraintMode::C2, ObjectiveMode::Obj, false)).unwrap();
            let fused = build_delsarte_lin(2, n, 1, VariantSpec::default()).unwrap();
            assert!(2 * fused.num_variables() <= unfused.num_variables(), "n={n}");
        }
    }

    #[test]
    fn eliminated_variables_and_c4_rows() {
        let m = build_delsarte_lin(2, 6, 3, variant(ConstraintMode::C2, ObjectiveMode::Obj, false)).unwrap();
        assert!(m.meta.eliminated > 0);
        assert_eq!(m.num_variables() + m.meta.eliminated, IndexSet::new(2, 6).unwrap().len());
        assert!(m.constraints.iter().any(|c| c.tag == Provenance::C4));
        let fused = build_delsarte_lin(2, 6, 3, VariantSpec::default()).unwrap();
        assert!(fused.constraints.iter().all(|c| c.tag != Provenance::C4));
    }

    #[test]
    fn even_reduction_rules() {
        let odd = VariantSpec { even_reduction: true, ..VariantSpec::default() };
        assert!(build_delsarte_lin(2, 6, 3, odd).is_err());
        let plain = value(&build_delsarte_lin(2, 8, 4, VariantSpec::default()).unwrap());
        let even = value(&build_delsarte_lin(2, 8, 4, odd).unwrap());
        assert_eq!(plain, even);
    }

    #[test]
    fn product_objective_at_r1_is_the_plain_objective() {
        let plain = build_delsarte_lin(1, 8, 3, VariantSpec::default()).unwrap();
        let alt = build_delsarte_lin(1, 8, 3, variant(ConstraintMode::C2, ObjectiveMode::ObjProduct, true)).unwrap();
        assert_eq!(alt.meta.value_root, 1);
        assert_eq!(value(&plain), value(&alt));
        let alt2 = build_delsarte_lin(2, 8, 3, variant(ConstraintMode::C2, ObjectiveMode::ObjProduct, true)).unwrap();
        assert_eq!(alt2.meta.value_root, 2);
    }

    #[test]
    fn rows_reference_declared_columns() {
        for v in [
            VariantSpec::default(),
            variant(ConstraintMode::C2Weak, ObjectiveMode::ObjProduct, false),
            variant(ConstraintMode::C2, ObjectiveMode::Obj, false),
        ] {
            build_delsarte_lin(2, 5, 2, v).unwrap().validate().unwrap();
        }
    }
}
