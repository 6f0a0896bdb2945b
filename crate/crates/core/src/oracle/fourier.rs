//! Partial Fourier transforms straight from the definition, and the
//! transformation rules they obey under column permutations, row
//! permutations and elementary row operations.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cube::{act_column_permutation, act_gl, act_row_permutation, BitMatrix, CubeFunction, RowSubset};
use crate::error::{Error, Result};
use crate::indexset::{gl_group, GlElement};
use crate::krawtchouk::permutations;
use crate::rational::{int, pow2, Rational};

use super::Report;

/// How group elements and test functions are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Every group element of the relevant kind.
    Exhaustive,
    /// `samples` random column permutations and group pairs.
    Random { samples: usize },
}

pub const ORACLE_MAX_BITS: usize = 12;

/// `F_S(f)(X) = 2^{-|S|n} sum_{Y: y_i = x_i, i not in S} f(Y) prod_{i in S} (-1)^{<x_i, y_i>}`.
pub fn brute_partial_fourier(f: &CubeFunction, s: RowSubset) -> Result<CubeFunction> {
    let (r, n) = (f.r(), f.n());
    if s.0 >> r != 0 {
        return Err(Error::Dimension(format!("subset {:#b} of [{r}]", s.0)));
    }
    let in_s: Vec<usize> = (0..r).filter(|&i| s.contains(i)).collect();
    let scale = pow2(-((in_s.len() * n) as i64));
    CubeFunction::from_fn(r, n, |x| {
        let mut total = Rational::zero();
        for code in 0..1u64 << (in_s.len() * n) {
            let mut rows = x.rows().to_vec();
            let mut sign = 1i32;
            for (k, &i) in in_s.iter().enumerate() {
                let y = (code >> (k * n)) & ((1 << n) - 1);
                rows[i] = y;
                if (x.rows()[i] & y).count_ones() % 2 == 1 {
                    sign = -sign;
                }
            }
            let v = f.at(&BitMatrix::from_rows(rows, n).expect("same shape"));
            if sign > 0 {
                total += v;
            } else {
                total -= v;
            }
        }
        total * &scale
    })
}

pub(crate) fn random_function(r: usize, n: usize, rng: &mut ChaCha8Rng) -> CubeFunction {
    CubeFunction::from_fn(r, n, |_| int(rng.gen_range(-4..=4))).expect("within limits")
}

/// `sum_T f(T X)`, which is `GL(r,2)`-invariant.
pub(crate) fn gl_symmetrize(f: &CubeFunction, group: &[GlElement]) -> CubeFunction {
    CubeFunction::from_fn(f.r(), f.n(), |x| {
        group.iter().map(|t| f.at(&act_gl(t.matrix(), x).expect("valid action")).clone()).sum()
    })
    .expect("same shape")
}

fn compare_functions(report: &mut Report, check: &str, params: String, lhs: &CubeFunction, rhs: &CubeFunction) {
    match (0..lhs.len()).find(|&i| lhs.at_index(i) != rhs.at_index(i)) {
        None => report.pass_many(check, params, lhs.len() as u64),
        Some(i) => report.compare(check, format!("{params} X={i}"), lhs.at_index(i), rhs.at_index(i)),
    }
}

fn check_scale(r: usize, n: usize) -> Result<()> {
    if r * n > ORACLE_MAX_BITS {
        return Err(Error::OracleLimit(format!("brute-force transforms need r*n <= {ORACLE_MAX_BITS}")));
    }
    Ok(())
}

fn column_perms(n: usize, sampling: Sampling, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    match sampling {
        Sampling::Exhaustive => permutations(n),
        Sampling::Random { samples } => (0..samples)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(rng);
                p
            })
            .collect(),
    }
}

/// Behaviour of `F_S` under the three kinds of symmetry, for random integer
/// functions and every subset `S`:
///
/// * columns: `F_S(f o sigma) = F_S(f) o sigma`;
/// * rows: `F_S(f o P) = F_{p^{-1}(S)}(f) o P`;
/// * `E: x_i <- x_i + x_j` with `i, j` in `S`: `F_S(f o E) = F_S(f) o E^T`;
/// * `i, j` off `S`: `F_S(f o E) = F_S(f) o E`;
/// * `i` in `S`, `j` off `S`: `F_S(f o E)(X) = (-1)^{<x_i, x_j>} F_S(f)(X)`.
pub fn verify_fourier_symmetries(r: usize, n: usize, sampling: Sampling, seed: u64) -> Result<Report> {
    check_scale(r, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new();
    let f = random_function(r, n, &mut rng);
    let sigmas = column_perms(n, sampling, &mut rng);
    let transforms: Vec<CubeFunction> =
        RowSubset::all(r).map(|s| brute_partial_fourier(&f, s)).collect::<Result<_>>()?;
    for s in RowSubset::all(r) {
        let fs = &transforms[s.0 as usize];
        let base = format!("r={r} n={n} S={:#b}", s.0);
        for sigma in &sigmas {
            let g = f.compose(|x| act_column_permutation(sigma, x).expect("valid permutation"));
            let lhs = brute_partial_fourier(&g, s)?;
            let rhs = fs.compose(|x| act_column_permutation(sigma, x).expect("valid permutation"));
            compare_functions(&mut report, "fourier.column_permutation", format!("{base} sigma={sigma:?}"), &lhs, &rhs);
        }
        for pi in permutations(r) {
            let g = f.compose(|x| act_row_permutation(&pi, x).expect("valid permutation"));
            let lhs = brute_partial_fourier(&g, s)?;
            let rhs = transforms[s.preimage(&pi).0 as usize]
                .compose(|x| act_row_permutation(&pi, x).expect("valid permutation"));
            compare_functions(&mut report, "fourier.row_permutation", format!("{base} pi={pi:?}"), &lhs, &rhs);
        }
        for i in 0..r {
            for j in 0..r {
                if i == j || (!s.contains(i) && s.contains(j)) {
                    continue;
                }
                let e = GlElement::elementary(r, i, j)?;
                let g = f.compose(|x| act_gl(e.matrix(), x).expect("invertible"));
                let lhs = brute_partial_fourier(&g, s)?;
                let (check, rhs) = match (s.contains(i), s.contains(j)) {
                    (true, true) => {
                        let et = e.transpose();
                        ("fourier.gl_inside", fs.compose(|x| act_gl(et.matrix(), x).expect("invertible")))
                    }
                    (false, false) => ("fourier.gl_outside", fs.compose(|x| act_gl(e.matrix(), x).expect("invertible"))),
                    _ => (
                        "fourier.gl_sign",
                        CubeFunction::from_fn(r, n, |x| {
                            let v = fs.at(x).clone();
                            if (x.rows()[i] & x.rows()[j]).count_ones() % 2 == 1 {
                                -v
                            } else {
                                v
                            }
                        })?,
                    ),
                };
                compare_functions(&mut report, check, format!("{base} x{} += x{}", i + 1, j + 1), &lhs, &rhs);
            }
        }
    }
    Ok(report)
}

/// The two consequences of `GL(r,2)` invariance for a symmetrized random
/// function `f`, for every `S`:
///
/// * `F_S(f)(X) = 0` whenever `<x_i, x_j>` is odd for some `i` in `S`, `j` off `S`;
/// * `F_S(f) = F_S(f) o (T_1 T_2)` when `T_1` fixes `e_i` for `i` in `S`,
///   `T_2` fixes `e_i` for `i` off `S`, and both keep the other block in place.
///   Maps that send a row from one block into the other are excluded: they
///   only produce the sign rule.
pub fn verify_gl_consequences(r: usize, n: usize, sampling: Sampling, seed: u64) -> Result<Report> {
    check_scale(r, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group = gl_group(r)?;
    let f = gl_symmetrize(&random_function(r, n, &mut rng), &group);
    let mut report = Report::new();
    let invariant = group.iter().all(|t| f.compose(|x| act_gl(t.matrix(), x).expect("invertible")) == f);
    report.assert_true("gl.invariant_input", format!("r={r} n={n}"), invariant, "f o T = f for all T");
    for s in RowSubset::all(r) {
        let fs = brute_partial_fourier(&f, s)?;
        let base = format!("r={r} n={n} S={:#b}", s.0);
        let mut checked = 0u64;
        let mut bad = None;
        for (idx, x) in fs.points().enumerate() {
            let odd = (0..r).any(|i| {
                s.contains(i) && (0..r).any(|j| !s.contains(j) && (x.rows()[i] & x.rows()[j]).count_ones() % 2 == 1)
            });
            if odd {
                checked += 1;
                if !fs.at_index(idx).is_zero() && bad.is_none() {
                    bad = Some(idx);
                }
            }
        }
        match bad {
            None => report.pass_many("gl.odd_pairing_vanishes", base.clone(), checked),
            Some(i) => report.compare("gl.odd_pairing_vanishes", format!("{base} X={i}"), fs.at_index(i), &Rational::zero()),
        }

        // Block-preserving: identity on one block, any invertible map on the other.
        let full_mask = (1usize << r) - 1;
        let fixes = |t: &GlElement, inside: bool| {
            let other = if inside { full_mask & !(s.0 as usize) } else { s.0 as usize };
            (0..r).all(|i| {
                let col = t.matrix().column(i);
                if s.contains(i) == inside { col == 1 << i } else { col & !other == 0 }
            })
        };
        let t1s: Vec<&GlElement> = group.iter().filter(|t| fixes(t, true)).collect();
        let t2s: Vec<&GlElement> = group.iter().filter(|t| fixes(t, false)).collect();
        let mut pairs: Vec<(usize, usize)> =
            (0..t1s.len()).flat_map(|a| (0..t2s.len()).map(move |b| (a, b))).collect();
        if let Sampling::Random { samples } = sampling {
            pairs.shuffle(&mut rng);
            pairs.truncate(samples);
        }
        for (a, b) in pairs {
            let t = t1s[a].mul(t2s[b]);
            let rhs = fs.compose(|x| act_gl(t.matrix(), x).expect("invertible"));
            compare_functions(&mut report, "gl.block_invariance", format!("{base} T1#{a} T2#{b}"), &fs, &rhs);
        }
    }
    Ok(report)
}
