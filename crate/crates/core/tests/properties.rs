use dlin::cube::{
    act_column_permutation, act_gl, column_enumerator, fourier, hamming_weight, partial_fourier, row_combine, BitMatrix,
    BitVector, CubeFunction, RowSubset,
};
use dlin::indexset::{
    act, enumerate_index_set, gl_group, index_set_size, is_distance_admissible, multinomial, row_weight, IndexSet,
    MultiIndex,
};
use dlin::krawtchouk::{krawtchouk, partial_krawtchouk};
use dlin::lpbuild::{LpModel, ModelKind, ModelMeta, ObjSense, Provenance, Sense, VarTag};
use dlin::oracle::brute_partial_fourier;
use dlin::rational::{big, int, to_f64};
use dlin::solver::{certify, solve_exact, solve_float, Orientation, PivotRule, SolveOptions, Status};
use proptest::prelude::*;

fn matrix(r: usize, n: usize) -> impl Strategy<Value = BitMatrix> {
    (0..1usize << (r * n)).prop_map(move |i| BitMatrix::from_index(i, r, n))
}

fn function(r: usize, n: usize) -> impl Strategy<Value = CubeFunction> {
    prop::collection::vec(-5i64..=5, 1 << (r * n))
        .prop_map(move |v| CubeFunction::from_values(r, n, v.into_iter().map(int).collect()).unwrap())
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn index_set_size_is_a_binomial(r in 1usize..=3, n in 1usize..=12) {
        let items = enumerate_index_set(r, n).unwrap();
        prop_assert_eq!(items.len() as u128, index_set_size(r, n));
        prop_assert!(items.iter().all(|a| a.counts().iter().sum::<u32>() as usize == n));
        prop_assert!(items.windows(2).all(|w| w[0].counts() > w[1].counts()));
    }

    #[test]
    fn gl_action_is_a_group_action(r in 1usize..=3, n in 1usize..=6, a in any::<prop::sample::Index>(),
                                   t1 in any::<prop::sample::Index>(), t2 in any::<prop::sample::Index>()) {
        let idx = IndexSet::new(r, n).unwrap();
        let group = gl_group(r).unwrap();
        let alpha = idx.get(a.index(idx.len()));
        let (g1, g2) = (&group[t1.index(group.len())], &group[t2.index(group.len())]);
        let lhs = act(g1, &act(g2, alpha).unwrap()).unwrap();
        prop_assert_eq!(lhs, act(&g1.mul(g2), alpha).unwrap());
        prop_assert_eq!(is_distance_admissible(alpha, 3), is_distance_admissible(&act(g1, alpha).unwrap(), 3));
    }

    #[test]
    fn row_weights_match_row_combinations(x in (1usize..=3, 1usize..=8).prop_flat_map(|(r, n)| matrix(r, n)),
                                          u in 1usize..8) {
        let r = x.r();
        let u = u % (1 << r);
        prop_assume!(u != 0);
        let uv = BitVector::new(u as u64, r).unwrap();
        let w = hamming_weight(&row_combine(&uv, &x).unwrap());
        prop_assert_eq!(row_weight(&column_enumerator(&x), u).unwrap(), int(w as i64));
    }

    #[test]
    fn gl_action_matches_column_enumerators(x in (1usize..=3, 1usize..=5).prop_flat_map(|(r, n)| matrix(r, n)),
                                            t in any::<prop::sample::Index>()) {
        let group = gl_group(x.r()).unwrap();
        let g = &group[t.index(group.len())];
        let tx = act_gl(g.matrix(), &x).unwrap();
        prop_assert_eq!(column_enumerator(&tx), act(g, &column_enumerator(&x)).unwrap());
        let mut a = x.row_span();
        let mut b = tx.row_span();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn column_permutations_keep_the_enumerator(x in (1usize..=3, 1usize..=6).prop_flat_map(|(r, n)| matrix(r, n)),
                                               seed in any::<u64>()) {
        let n = x.n();
        let mut sigma: Vec<usize> = (0..n).collect();
        // Deterministic shuffle from the seed.
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            sigma.swap(i, (s >> 33) as usize % (i + 1));
        }
        let y = act_column_permutation(&sigma, &x).unwrap();
        prop_assert_eq!(column_enumerator(&y), column_enumerator(&x));
    }

    #[test]
    fn parseval((f, g) in shape().prop_flat_map(|(r, n)| (function(r, n), function(r, n)))) {
        let (fh, gh) = (fourier(&f), fourier(&g));
        prop_assert_eq!(f.inner(&g).unwrap(), fh.inner_unnormalized(&gh).unwrap());
    }

    #[test]
    fn convolution_theorem((f, g) in shape().prop_flat_map(|(r, n)| (function(r, n), function(r, n)))) {
        let lhs = fourier(&f.convolve(&g).unwrap());
        prop_assert_eq!(lhs, fourier(&f).pointwise_mul(&fourier(&g)).unwrap());
    }

    #[test]
    fn partial_transforms_compose(f in (2usize..=3, 1usize..=3).prop_flat_map(|(r, n)| function(r, n)),
                                  a in 0u32..8, b in 0u32..8) {
        let full = (1u32 << f.r()) - 1;
        let (s, t) = (RowSubset(a & full & !b), RowSubset(b & full));
        let both = RowSubset(s.0 | t.0);
        let lhs = partial_fourier(&partial_fourier(&f, t).unwrap(), s).unwrap();
        prop_assert_eq!(&lhs, &partial_fourier(&f, both).unwrap());
        prop_assert_eq!(lhs, brute_partial_fourier(&f, both).unwrap());
    }

    #[test]
    fn krawtchouk_boundary_values(r in 1usize..=2, n in 1usize..=6, a in any::<prop::sample::Index>(),
                                  b in any::<prop::sample::Index>()) {
        let idx = IndexSet::new(r, n).unwrap();
        let alpha = idx.get(a.index(idx.len()));
        let beta = idx.get(b.index(idx.len()));
        let zero = MultiIndex::unit(r, 0, n as u32).unwrap();
        prop_assert_eq!(big(krawtchouk(alpha, &zero).unwrap()), multinomial(alpha));
        prop_assert_eq!(big(krawtchouk(&zero, beta).unwrap()), int(1));
        let delta = partial_krawtchouk(alpha, beta, RowSubset::empty()).unwrap();
        prop_assert_eq!(big(delta), int(i64::from(alpha == beta)));
        let full = partial_krawtchouk(alpha, beta, RowSubset::full(r)).unwrap();
        prop_assert_eq!(full, krawtchouk(alpha, beta).unwrap());
    }
}

fn meta() -> ModelMeta {
    ModelMeta { kind: ModelKind::Delsarte, r: 1, n: 1, d: 1, variant: None, value_root: 1, eliminated: 0, notes: vec![] }
}

/// `max c x` over `A x <= b`, `0 <= x <= 6`, with some columns tied by equalities.
fn random_lp(nv: usize, a: &[Vec<i64>], b: &[i64], c: &[i64], ties: &[(usize, usize)]) -> LpModel {
    let mut m = LpModel::new(meta(), ObjSense::Maximize);
    for j in 0..nv {
        m.add_variable(VarTag::Delsarte(j));
    }
    m.set_objective(c.iter().enumerate().map(|(j, v)| (j, int(*v))).collect());
    for (row, rhs) in a.iter().zip(b) {
        m.add_constraint(row.iter().enumerate().map(|(j, v)| (j, int(*v))).collect(), Sense::Le, int(*rhs), Provenance::C2, "");
    }
    for j in 0..nv {
        m.add_constraint(vec![(j, int(1))], Sense::Ge, int(0), Provenance::C2, "");
        m.add_constraint(vec![(j, int(1))], Sense::Le, int(6), Provenance::C2, "");
    }
    for &(j, k) in ties {
        if j != k {
            m.add_constraint(vec![(j, int(3)), (k, int(-3))], Sense::Eq, int(0), Provenance::C4, "");
        }
    }
    m
}

fn lp_strategy() -> impl Strategy<Value = LpModel> {
    (2usize..=5, 1usize..=5).prop_flat_map(|(nv, rows)| {
        (
            prop::collection::vec(prop::collection::vec(-4i64..=4, nv), rows),
            prop::collection::vec(0i64..=9, rows),
            prop::collection::vec(-3i64..=5, nv),
            prop::collection::vec((0..nv, 0..nv), 0..=2),
        )
            .prop_map(move |(a, b, c, ties)| random_lp(nv, &a, &b, &c, &ties))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_solves_agree_and_certify(m in lp_strategy()) {
        let base = solve_exact(&m, &SolveOptions::cold()).unwrap();
        prop_assert_eq!(base.status, Status::Optimal);
        let x = base.dense_solution(m.num_variables());
        prop_assert!(certify(&m, &x, base.duals.as_ref().unwrap()).certified());
        for orientation in [Orientation::Primal, Orientation::Dual] {
            for pivot_rule in [PivotRule::Bland, PivotRule::Dantzig] {
                for warm_start in [false, true] {
                    let opts = SolveOptions { orientation, pivot_rule, warm_start, ..SolveOptions::default() };
                    let r = solve_exact(&m, &opts).unwrap();
                    prop_assert_eq!(&r.objective, &base.objective);
                }
            }
        }
        let f = solve_float(&m, &SolveOptions::default()).unwrap();
        let exact = to_f64(base.objective.as_ref().unwrap());
        prop_assert!((f.objective.unwrap() - exact).abs() <= 1e-6 * (1.0 + exact.abs()));
    }

    #[test]
    fn solves_are_deterministic(m in lp_strategy()) {
        let a = solve_exact(&m, &SolveOptions::default()).unwrap();
        let b = solve_exact(&m, &SolveOptions::default()).unwrap();
        prop_assert_eq!(a.solution, b.solution);
        prop_assert_eq!(a.pivots, b.pivots);
        prop_assert_eq!(a.duals, b.duals);
    }
}
