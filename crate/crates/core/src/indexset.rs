//! The index set `I_{r,n}` of compositions of `n` into `2^r` parts, with its
//! Walsh-Hadamard spectra, the `GL(r,2)` action and orbit partition.

use std::collections::HashMap;

use num_traits::Zero;

use crate::cube::{sign_of_parity, BitMatrix};
use crate::error::{Error, Result};
use crate::rational::{int, pow2, Rational};

/// Largest supported `r` for enumeration and group generation.
pub const MAX_R: usize = 4;
/// Largest `r` for which orbits are computed by full enumeration.
pub const MAX_ORBIT_R: usize = 3;
/// Counts are packed into 8 bits per bin in [`MultiIndex::key`].
pub const MAX_N: usize = 255;

/// A composition of `n` into `2^r` nonnegative parts, bin `u` counting the
/// columns equal to `u` (row 1 in the least-significant bit).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    r: usize,
    counts: Vec<u32>,
}

impl MultiIndex {
    pub fn from_counts(r: usize, counts: Vec<u32>) -> Result<Self> {
        if r == 0 || r > MAX_R {
            return Err(Error::Capability(format!("r = {r} outside 1..={MAX_R}")));
        }
        if counts.len() != 1 << r {
            return Err(Error::Dimension(format!("{} bins for r = {r}", counts.len())));
        }
        Ok(MultiIndex { r, counts })
    }

    /// `n * eps_u`.
    pub fn unit(r: usize, u: usize, n: u32) -> Result<Self> {
        let mut counts = vec![0; 1 << r];
        if u >= counts.len() {
            return Err(Error::Dimension(format!("bin {u} for r = {r}")));
        }
        counts[u] = n;
        Self::from_counts(r, counts)
    }

    /// `(n - k) eps_0 + k eps_{e_1}`: the enumerator of a matrix whose only
    /// nonzero row is the first, of weight `k`.
    pub fn first_row_weight(r: usize, n: u32, k: u32) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidArgument(format!("weight {k} exceeds n = {n}")));
        }
        let mut counts = vec![0; 1 << r];
        counts[0] = n - k;
        counts[1] += k;
        Self::from_counts(r, counts)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, u: usize) -> u32 {
        self.counts[u]
    }

    /// Packed form, 8 bits per bin.
    pub fn key(&self) -> u128 {
        pack(&self.counts)
    }

    /// `n * eps_0`, the enumerator of the zero matrix.
    pub fn is_zero_point(&self) -> bool {
        self.counts[1..].iter().all(|&c| c == 0)
    }

    pub fn same_shape(&self, other: &MultiIndex) -> bool {
        self.r == other.r && self.n() == other.n()
    }
}

fn pack(counts: &[u32]) -> u128 {
    counts.iter().rev().fold(0u128, |acc, &c| (acc << 8) | c as u128)
}

/// Number of elements of `I_{r,n}`, `C(n + 2^r - 1, 2^r - 1)`.
pub fn index_set_size(r: usize, n: usize) -> u128 {
    let k = (1u128 << r) - 1;
    let mut acc = 1u128;
    for i in 1..=k {
        acc = acc * (n as u128 + i) / i;
    }
    acc
}

/// All compositions of `n` into `2^r` parts, in descending lexicographic order
/// of the counts (so `n eps_0` comes first).
pub fn enumerate_index_set(r: usize, n: usize) -> Result<Vec<MultiIndex>> {
    if r == 0 || r > MAX_R {
        return Err(Error::Capability(format!("r = {r} outside 1..={MAX_R}")));
    }
    if n == 0 || n > MAX_N {
        return Err(Error::InvalidArgument(format!("n = {n} outside 1..={MAX_N}")));
    }
    let bins = 1usize << r;
    let mut out = Vec::with_capacity(index_set_size(r, n).min(1 << 24) as usize);
    let mut counts = vec![0u32; bins];
    fill(&mut counts, 0, n as u32, r, &mut out);
    Ok(out)
}

fn fill(counts: &mut Vec<u32>, pos: usize, left: u32, r: usize, out: &mut Vec<MultiIndex>) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        out.push(MultiIndex { r, counts: counts.clone() });
        return;
    }
    for c in (0..=left).rev() {
        counts[pos] = c;
        fill(counts, pos + 1, left - c, r, out);
    }
}

/// `I_{r,n}` with rank lookup.
#[derive(Clone, Debug)]
pub struct IndexSet {
    r: usize,
    n: usize,
    items: Vec<MultiIndex>,
    rank: HashMap<u128, usize>,
}

impl IndexSet {
    pub fn new(r: usize, n: usize) -> Result<Self> {
        let items = enumerate_index_set(r, n)?;
        let rank = items.iter().enumerate().map(|(i, a)| (a.key(), i)).collect();
        Ok(IndexSet { r, n, items, rank })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[MultiIndex] {
        &self.items
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.items[i]
    }

    pub fn rank(&self, alpha: &MultiIndex) -> Option<usize> {
        self.rank.get(&alpha.key()).copied()
    }

    pub fn rank_of_counts(&self, counts: &[u32]) -> Option<usize> {
        self.rank.get(&pack(counts)).copied()
    }
}

/// Unnormalized spectrum `sum_v (-1)^<u,v> alpha_v` for every `u`.
pub fn walsh_hadamard_int(alpha: &MultiIndex) -> Vec<i64> {
    let bins = alpha.counts.len();
    (0..bins)
        .map(|u| {
            (0..bins)
                .map(|v| sign_of_parity((u & v) as u64) as i64 * alpha.counts[v] as i64)
                .sum()
        })
        .collect()
}

/// `alpha^(u) = 2^{-r} sum_v (-1)^<u,v> alpha_v`.
pub fn walsh_hadamard(alpha: &MultiIndex) -> Vec<Rational> {
    let scale = pow2(-(alpha.r as i64));
    walsh_hadamard_int(alpha).into_iter().map(|v| int(v) * &scale).collect()
}

/// `(n - 2^r alpha^(u)) / 2`, the weight of `u^T X` whenever `alpha = cf_X`.
pub fn row_weight(alpha: &MultiIndex, u: usize) -> Result<Rational> {
    if u == 0 {
        return Err(Error::InvalidArgument("row weight of the zero combination".into()));
    }
    if u >= alpha.counts.len() {
        return Err(Error::Dimension(format!("selector {u} for r = {}", alpha.r)));
    }
    let spectrum = walsh_hadamard_int(alpha)[u];
    Ok((int(alpha.n() as i64) - int(spectrum)) / int(2))
}

/// Integer row weight: the number of columns `v` with `<u,v>` odd.
pub fn row_weight_int(alpha: &MultiIndex, u: usize) -> u32 {
    alpha
        .counts
        .iter()
        .enumerate()
        .filter(|(v, _)| (u & v).count_ones() % 2 == 1)
        .map(|(_, &c)| c)
        .sum()
}

/// True iff every nonzero combination has even weight.
pub fn is_even_admissible(alpha: &MultiIndex) -> bool {
    (1..alpha.counts.len()).all(|u| row_weight_int(alpha, u) % 2 == 0)
}

/// True iff every nonzero combination has weight `0` or at least `d`.
pub fn is_distance_admissible(alpha: &MultiIndex, d: usize) -> bool {
    (1..alpha.counts.len()).all(|u| {
        let w = row_weight_int(alpha, u) as usize;
        w == 0 || w >= d
    })
}

/// An invertible `r x r` matrix over F2.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlElement {
    matrix: BitMatrix,
}

impl GlElement {
    pub fn new(matrix: BitMatrix) -> Result<Self> {
        if matrix.r() != matrix.n() {
            return Err(Error::Dimension(format!("{}x{} matrix", matrix.r(), matrix.n())));
        }
        if matrix.rank() != matrix.r() {
            return Err(Error::InvalidGroupElement("matrix is singular over F2".into()));
        }
        Ok(GlElement { matrix })
    }

    pub fn identity(r: usize) -> Self {
        GlElement { matrix: BitMatrix::identity(r).expect("r >= 1") }
    }

    /// `x_i <- x_i + x_j` (0-based, `i != j`).
    pub fn elementary(r: usize, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= r || j >= r {
            return Err(Error::InvalidArgument(format!("elementary operation ({i},{j}) for r = {r}")));
        }
        let mut rows: Vec<u64> = (0..r).map(|k| 1u64 << k).collect();
        rows[i] |= 1 << j;
        Self::new(BitMatrix::from_rows(rows, r)?)
    }

    /// Row permutation: row `i` of `TX` is row `pi(i)` of `X` (0-based).
    pub fn permutation(pi: &[usize]) -> Result<Self> {
        let r = pi.len();
        let rows = pi.iter().map(|&p| 1u64 << p).collect();
        let m = BitMatrix::from_rows(rows, r)?;
        Self::new(m).map_err(|_| Error::InvalidArgument(format!("{pi:?} is not a permutation")))
    }

    pub fn r(&self) -> usize {
        self.matrix.r()
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    /// Matrix-vector product `T u` on an encoded column vector.
    pub fn apply(&self, u: usize) -> usize {
        self.matrix
            .rows()
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &row)| acc | (((row & u as u64).count_ones() as usize & 1) << i))
    }

    pub fn mul(&self, other: &GlElement) -> GlElement {
        GlElement { matrix: self.matrix.mul(&other.matrix).expect("same dimension") }
    }

    pub fn transpose(&self) -> GlElement {
        GlElement { matrix: self.matrix.transpose() }
    }

    pub fn inverse(&self) -> GlElement {
        let r = self.r();
        // The inverse is a matrix whose columns are T^{-1} e_k.
        let mut pre = vec![0usize; 1 << r];
        for u in 0..1usize << r {
            pre[self.apply(u)] = u;
        }
        let cols: Vec<usize> = (0..r).map(|k| pre[1 << k]).collect();
        let rows = (0..r)
            .map(|i| cols.iter().enumerate().fold(0u64, |acc, (k, &c)| acc | ((((c >> i) & 1) as u64) << k)))
            .collect();
        GlElement { matrix: BitMatrix::from_rows(rows, r).expect("valid") }
    }

    /// Permutation of the bins induced by `T`: `perm[u] = T u`.
    pub fn bin_permutation(&self) -> Vec<usize> {
        (0..1usize << self.r()).map(|u| self.apply(u)).collect()
    }
}

/// All of `GL(r,2)`, ordered by the packed row encoding.
pub fn gl_group(r: usize) -> Result<Vec<GlElement>> {
    if r == 0 || r > MAX_R {
        return Err(Error::Capability(format!("GL({r},2) outside 1..={MAX_R}")));
    }
    let total = 1usize << (r * r);
    let mut out = Vec::new();
    for code in 0..total {
        let m = BitMatrix::from_index(code, r, r);
        if m.rank() == r {
            out.push(GlElement { matrix: m });
        }
    }
    Ok(out)
}

/// `|GL(r,2)| = prod_{i<r} (2^r - 2^i)`.
pub fn gl_order(r: usize) -> u64 {
    (0..r).map(|i| (1u64 << r) - (1u64 << i)).product()
}

/// `(T . alpha)_u = alpha_{T^{-1} u}`, so that `cf_{TX} = T . cf_X`.
pub fn act(t: &GlElement, alpha: &MultiIndex) -> Result<MultiIndex> {
    if t.r() != alpha.r {
        return Err(Error::Dimension(format!("GL({},2) acting on r = {}", t.r(), alpha.r)));
    }
    let mut counts = vec![0u32; alpha.counts.len()];
    for (v, &c) in alpha.counts.iter().enumerate() {
        counts[t.apply(v)] = c;
    }
    Ok(MultiIndex { r: alpha.r, counts })
}

/// Partition of `I_{r,n}` into `GL(r,2)` orbits.
#[derive(Clone, Debug)]
pub struct OrbitPartition {
    index_set: IndexSet,
    orbit_of: Vec<usize>,
    representatives: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl OrbitPartition {
    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn num_orbits(&self) -> usize {
        self.representatives.len()
    }

    /// Orbit id of the element with the given rank.
    pub fn orbit_of_rank(&self, rank: usize) -> usize {
        self.orbit_of[rank]
    }

    pub fn orbit_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.index_set.rank(alpha).map(|i| self.orbit_of[i])
    }

    pub fn representative(&self, orbit: usize) -> &MultiIndex {
        self.index_set.get(self.representatives[orbit])
    }

    pub fn representative_rank(&self, orbit: usize) -> usize {
        self.representatives[orbit]
    }

    /// Ranks of the orbit members, ascending.
    pub fn members(&self, orbit: usize) -> &[usize] {
        &self.members[orbit]
    }

    /// Representative of the orbit containing `alpha`.
    pub fn canonical(&self, alpha: &MultiIndex) -> Option<&MultiIndex> {
        self.orbit_of(alpha).map(|o| self.representative(o))
    }
}

/// Orbits of `GL(r,2)` on `I_{r,n}`, each represented by its lexicographically
/// smallest counts array. Orbits are numbered by first appearance in the
/// enumeration order.
pub fn gl_orbits(r: usize, n: usize) -> Result<OrbitPartition> {
    if r > MAX_ORBIT_R {
        return Err(Error::Capability(format!("orbit enumeration supports r <= {MAX_ORBIT_R}")));
    }
    let index_set = IndexSet::new(r, n)?;
    let perms: Vec<Vec<usize>> = gl_group(r)?.iter().map(|t| t.bin_permutation()).collect();
    let mut orbit_of = vec![usize::MAX; index_set.len()];
    let mut representatives = Vec::new();
    let mut members = Vec::new();
    let mut image = vec![0u32; 1 << r];
    for start in 0..index_set.len() {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        let alpha = index_set.get(start).counts.clone();
        let mut orbit = Vec::new();
        for perm in &perms {
            for (v, &c) in alpha.iter().enumerate() {
                image[perm[v]] = c;
            }
            let k = index_set.rank_of_counts(&image).expect("action preserves I_{r,n}");
            if orbit_of[k] == usize::MAX {
                orbit_of[k] = id;
                orbit.push(k);
            }
        }
        orbit.sort_unstable();
        let rep = *orbit
            .iter()
            .min_by(|&&a, &&b| index_set.get(a).counts.cmp(&index_set.get(b).counts))
            .expect("orbit is nonempty");
        representatives.push(rep);
        members.push(orbit);
    }
    Ok(OrbitPartition { index_set, orbit_of, representatives, members })
}

/// `C(n; alpha) = n! / prod alpha_u!` as a rational.
pub fn multinomial(alpha: &MultiIndex) -> Rational {
    let mut acc = num_bigint::BigInt::from(1);
    let mut total = 0u64;
    for &c in &alpha.counts {
        for k in 1..=c as u64 {
            total += 1;
            acc = acc * total / k;
        }
    }
    if acc.is_zero() {
        Rational::zero()
    } else {
        Rational::from_integer(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{act_gl, column_enumerator, hamming_weight, row_combine, BitVector};
    use num_integer::binomial;

    fn mi(r: usize, counts: &[u32]) -> MultiIndex {
        MultiIndex::from_counts(r, counts.to_vec()).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        let i = enumerate_index_set(1, 2).unwrap();
        let c: Vec<_> = i.iter().map(|a| a.counts().to_vec()).collect();
        assert_eq!(c, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(enumerate_index_set(2, 20).unwrap().len(), 1771);
        let units = enumerate_index_set(2, 1).unwrap();
        assert_eq!(units.len(), 4);
        assert!(units.iter().all(|a| a.counts().iter().filter(|&&c| c == 1).count() == 1));
        assert!(matches!(enumerate_index_set(5, 2), Err(Error::Capability(_))));
    }

    #[test]
    fn enumeration_counts() {
        for r in 1..=3 {
            for n in 1..=12 {
                let len = enumerate_index_set(r, n).unwrap().len() as u128;
                let expected = binomial(n as u128 + (1 << r) - 1, (1 << r) - 1);
                assert_eq!(len, expected);
                assert_eq!(index_set_size(r, n), expected);
            }
        }
    }

    #[test]
    fn spectra() {
        let a = mi(2, &[3, 1, 0, 2]);
        let h = walsh_hadamard(&a);
        assert_eq!(h[0], int(6) * pow2(-2));
        for k in 0..=5u32 {
            let b = mi(1, &[5 - k, k]);
            assert_eq!(walsh_hadamard(&b)[1], Rational::new((5 - 2 * k as i64).into(), 2.into()));
        }
        // Applying the unnormalized transform twice multiplies by 2^r.
        let once = walsh_hadamard_int(&a);
        let twice: Vec<i64> = (0..4)
            .map(|u| (0..4).map(|v| sign_of_parity((u & v) as u64) as i64 * once[v]).sum())
            .collect();
        assert_eq!(twice, a.counts().iter().map(|&c| 4 * c as i64).collect::<Vec<_>>());
    }

    #[test]
    fn row_weight_examples() {
        for k in 0..=6u32 {
            assert_eq!(row_weight(&mi(1, &[6 - k, k]), 1).unwrap(), int(k as i64));
        }
        let z = MultiIndex::unit(2, 0, 5).unwrap();
        for u in 1..4 {
            assert!(row_weight(&z, u).unwrap().is_zero());
        }
        assert!(matches!(row_weight(&z, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn row_weight_matches_brute_force() {
        for n in 1..=4 {
            for idx in 0..1usize << (2 * n) {
                let x = BitMatrix::from_index(idx, 2, n);
                let a = column_enumerator(&x);
                for u in 1..4usize {
                    let uv = BitVector::new(u as u64, 2).unwrap();
                    let w = hamming_weight(&row_combine(&uv, &x).unwrap());
                    assert_eq!(row_weight(&a, u).unwrap(), int(w as i64));
                    assert_eq!(row_weight_int(&a, u) as usize, w);
                }
            }
        }
    }

    #[test]
    fn group_orders() {
        assert_eq!(gl_group(1).unwrap().len(), 1);
        assert_eq!(gl_group(2).unwrap().len(), 6);
        assert_eq!(gl_group(3).unwrap().len(), 168);
        for r in 1..=3 {
            assert_eq!(gl_group(r).unwrap().len() as u64, gl_order(r));
        }
    }

    #[test]
    fn action_is_compatible_with_matrices() {
        let group = gl_group(2).unwrap();
        for n in 1..=3 {
            for idx in 0..1usize << (2 * n) {
                let x = BitMatrix::from_index(idx, 2, n);
                for t in &group {
                    let tx = act_gl(t.matrix(), &x).unwrap();
                    assert_eq!(column_enumerator(&tx), act(t, &column_enumerator(&x)).unwrap());
                }
            }
        }
    }

    #[test]
    fn action_group_law() {
        let group = gl_group(2).unwrap();
        let alphas = enumerate_index_set(2, 3).unwrap();
        for a in &alphas {
            assert_eq!(act(&GlElement::identity(2), a).unwrap(), *a);
            for t1 in &group {
                for t2 in &group {
                    let lhs = act(t1, &act(t2, a).unwrap()).unwrap();
                    assert_eq!(lhs, act(&t1.mul(t2), a).unwrap());
                }
                assert_eq!(act(&t1.inverse(), &act(t1, a).unwrap()).unwrap(), *a);
            }
        }
        let z = MultiIndex::unit(2, 0, 3).unwrap();
        assert!(group.iter().all(|t| act(t, &z).unwrap() == z));
    }

    #[test]
    fn elementary_operations_add_rows() {
        let x = BitMatrix::from_rows(vec![0b1100, 0b1010, 0b0111], 4).unwrap();
        let t = GlElement::elementary(3, 0, 2).unwrap();
        let tx = act_gl(t.matrix(), &x).unwrap();
        assert_eq!(tx.rows(), &[0b1100 ^ 0b0111, 0b1010, 0b0111]);
        let p = GlElement::permutation(&[2, 0, 1]).unwrap();
        assert_eq!(act_gl(p.matrix(), &x).unwrap().rows(), &[0b0111, 0b1100, 0b1010]);
    }

    #[test]
    fn orbit_examples() {
        let o = gl_orbits(1, 5).unwrap();
        assert_eq!(o.num_orbits(), 6);
        let o = gl_orbits(2, 1).unwrap();
        assert_eq!(o.num_orbits(), 2);
        let e1 = mi(2, &[0, 1, 0, 0]);
        let id = o.orbit_of(&e1).unwrap();
        assert_eq!(o.members(id).len(), 3);
        let z = mi(2, &[1, 0, 0, 0]);
        assert_eq!(o.members(o.orbit_of(&z).unwrap()).len(), 1);
        assert_eq!(o.canonical(&e1).unwrap().counts(), &[0, 0, 0, 1]);
    }

    #[test]
    fn orbits_partition_and_divide_group_order() {
        for r in 2..=3 {
            for n in 1..=5 {
                let o = gl_orbits(r, n).unwrap();
                let total: usize = (0..o.num_orbits()).map(|k| o.members(k).len()).sum();
                assert_eq!(total, o.index_set().len());
                for k in 0..o.num_orbits() {
                    assert_eq!(gl_order(r) % o.members(k).len() as u64, 0);
                    let rep = o.representative(k);
                    assert_eq!(o.orbit_of(rep), Some(k));
                    assert_eq!(o.canonical(rep), Some(rep));
                }
            }
        }
        assert!(matches!(gl_orbits(4, 2), Err(Error::Capability(_))));
    }

    #[test]
    fn admissibility() {
        assert!(is_even_admissible(&MultiIndex::unit(2, 0, 7).unwrap()));
        assert!(!is_even_admissible(&mi(1, &[1, 3])));
        assert!(is_even_admissible(&mi(1, &[2, 2])));
        for d in 1..=6 {
            assert!(is_distance_admissible(&MultiIndex::unit(2, 0, 6).unwrap(), d));
        }
        assert!(!is_distance_admissible(&mi(1, &[4, 2]), 3));
        assert!(is_distance_admissible(&mi(1, &[3, 3]), 3));
    }

    #[test]
    fn admissibility_is_gl_invariant() {
        let group = gl_group(2).unwrap();
        for a in enumerate_index_set(2, 6).unwrap() {
            for t in &group {
                let b = act(t, &a).unwrap();
                assert_eq!(is_even_admissible(&a), is_even_admissible(&b));
                for d in 1..=6 {
                    assert_eq!(is_distance_admissible(&a, d), is_distance_admissible(&b, d));
                }
            }
        }
    }

    #[test]
    fn multinomials() {
        assert_eq!(multinomial(&mi(2, &[2, 1, 0, 1])), int(12));
        assert_eq!(multinomial(&mi(1, &[3, 2])), int(10));
    }
}
