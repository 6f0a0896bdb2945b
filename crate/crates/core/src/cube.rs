//! Exact arithmetic over the Boolean hypercube.
//!
//! A point of the `rn`-dimensional cube is viewed as an `r x n` bit matrix
//! whose rows are vectors in `{0,1}^n`. Vectors in `{0,1}^r` (columns of such a
//! matrix, or row selectors `u`) are encoded as integers with row 1 in the
//! least-significant bit: `u = sum_i u_i 2^(i-1)`. The same encoding indexes
//! multi-index bins and Walsh-Hadamard spectra throughout the crate.
//!
//! Cube functions are dense tables of exact rationals, so they are only meant
//! for small-scale verification (see [`DEFAULT_ORACLE_BITS`]).

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::indexset::MultiIndex;
use crate::rational::{pow2, Rational};

/// Largest `r * n` for which a [`CubeFunction`] may be built by default.
pub const DEFAULT_ORACLE_BITS: usize = 16;

/// A vector in `{0,1}^n`, `n <= 64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitVector {
    bits: u64,
    len: usize,
}

impl BitVector {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len == 0 || len > 64 {
            return Err(Error::InvalidArgument(format!("bit vector length {len} not in 1..=64")));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::InvalidArgument(format!("bits {bits:#b} exceed length {len}")));
        }
        Ok(BitVector { bits, len })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(0, len)
    }

    pub fn ones(len: usize) -> Result<Self> {
        Self::new(low_mask(len), len)
    }

    /// Build from a slice of 0/1 entries, entry `i` becoming bit `i`.
    pub fn from_bits(entries: &[u8]) -> Result<Self> {
        let mut bits = 0u64;
        for (i, &b) in entries.iter().enumerate() {
            match b {
                0 => {}
                1 => bits |= 1 << i,
                _ => return Err(Error::InvalidArgument(format!("entry {b} is not a bit"))),
            }
        }
        Self::new(bits, entries.len())
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }
}

fn low_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Number of nonzero bits.
pub fn hamming_weight(x: &BitVector) -> usize {
    x.bits.count_ones() as usize
}

/// `(-1)^<x,y>`.
pub fn character(x: &BitVector, y: &BitVector) -> Result<i32> {
    if x.len != y.len {
        return Err(Error::Dimension(format!("character of lengths {} and {}", x.len, y.len)));
    }
    Ok(sign_of_parity(x.bits & y.bits))
}

#[inline]
pub(crate) fn sign_of_parity(v: u64) -> i32 {
    if v.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// An `r x n` matrix over F2, stored by rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: Vec<u64>,
    n: usize,
}

impl BitMatrix {
    pub fn from_rows(rows: Vec<u64>, n: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("matrix needs at least one row".into()));
        }
        for &row in &rows {
            BitVector::new(row, n)?;
        }
        Ok(BitMatrix { rows, n })
    }

    pub fn from_vectors(rows: &[BitVector]) -> Result<Self> {
        let n = rows.first().map(|v| v.len).ok_or_else(|| Error::InvalidArgument("no rows".into()))?;
        if rows.iter().any(|v| v.len != n) {
            return Err(Error::Dimension("rows of unequal length".into()));
        }
        Ok(BitMatrix { rows: rows.iter().map(|v| v.bits).collect(), n })
    }

    pub fn zeros(r: usize, n: usize) -> Result<Self> {
        Self::from_rows(vec![0; r], n)
    }

    pub fn identity(r: usize) -> Result<Self> {
        Self::from_rows((0..r).map(|i| 1u64 << i).collect(), r)
    }

    /// Decode the cube index `sum_i row_i << (i n)`.
    pub fn from_index(index: usize, r: usize, n: usize) -> Self {
        let mask = low_mask(n);
        let rows = (0..r).map(|i| ((index as u64) >> (i * n)) & mask).collect();
        BitMatrix { rows, n }
    }

    /// Position of this matrix in a cube function table.
    pub fn index(&self) -> usize {
        self.rows.iter().enumerate().fold(0usize, |acc, (i, &row)| acc | ((row as usize) << (i * self.n)))
    }

    pub fn r(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector { bits: self.rows[i], len: self.n }
    }

    /// Column `j` as an encoded vector of `{0,1}^r`.
    pub fn column(&self, j: usize) -> usize {
        self.rows
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &row)| acc | ((((row >> j) & 1) as usize) << i))
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.rows[i] >> j) & 1 == 1
    }

    /// Rank over F2.
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for bit in 0..self.n {
            let Some(p) = (rank..rows.len()).find(|&k| (rows[k] >> bit) & 1 == 1) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank];
            for (k, row) in rows.iter_mut().enumerate() {
                if k != rank && (*row >> bit) & 1 == 1 {
                    *row ^= pivot;
                }
            }
            rank += 1;
        }
        rank
    }

    /// Row span as a sorted list of vectors.
    pub fn row_span(&self) -> Vec<u64> {
        let r = self.r();
        let mut span: Vec<u64> = (0..1usize << r)
            .map(|u| combine_rows(u, &self.rows))
            .collect();
        span.sort_unstable();
        span.dedup();
        span
    }

    /// Matrix product `self * other` over F2.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.n != other.r() {
            return Err(Error::Dimension(format!(
                "product of {}x{} and {}x{}",
                self.r(),
                self.n,
                other.r(),
                other.n
            )));
        }
        let rows = self.rows.iter().map(|&t| combine_rows(t as usize, &other.rows)).collect();
        Ok(BitMatrix { rows, n: other.n })
    }

    pub fn transpose(&self) -> BitMatrix {
        let rows = (0..self.n).map(|j| self.column(j) as u64).collect();
        BitMatrix { rows, n: self.r() }
    }
}

/// XOR of the rows selected by the bits of `u`.
#[inline]
pub(crate) fn combine_rows(u: usize, rows: &[u64]) -> u64 {
    rows.iter()
        .enumerate()
        .filter(|(i, _)| (u >> i) & 1 == 1)
        .fold(0u64, |acc, (_, &row)| acc ^ row)
}

/// `u^T X`: the XOR of the rows `i` with `u_i = 1`.
pub fn row_combine(u: &BitVector, x: &BitMatrix) -> Result<BitVector> {
    if u.len != x.r() {
        return Err(Error::Dimension(format!("selector of length {} for {} rows", u.len, x.r())));
    }
    Ok(BitVector { bits: combine_rows(u.bits as usize, &x.rows), len: x.n })
}

/// Column enumerator `cf_X`: how many columns of `X` equal each `u in {0,1}^r`.
pub fn column_enumerator(x: &BitMatrix) -> MultiIndex {
    let mut counts = vec![0u32; 1 << x.r()];
    for j in 0..x.n {
        counts[x.column(j)] += 1;
    }
    MultiIndex::from_counts(x.r(), counts).expect("column counts form a composition")
}

/// `sigma . X`: column `j` of the result is column `sigma(j)` of `X` (0-based).
pub fn act_column_permutation(sigma: &[usize], x: &BitMatrix) -> Result<BitMatrix> {
    check_permutation(sigma, x.n)?;
    let rows = x
        .rows
        .iter()
        .map(|&row| {
            sigma
                .iter()
                .enumerate()
                .fold(0u64, |acc, (j, &s)| acc | (((row >> s) & 1) << j))
        })
        .collect();
    Ok(BitMatrix { rows, n: x.n })
}

/// Row permutation: row `i` of the result is row `pi(i)` of `X` (0-based).
pub fn act_row_permutation(pi: &[usize], x: &BitMatrix) -> Result<BitMatrix> {
    check_permutation(pi, x.r())?;
    Ok(BitMatrix { rows: pi.iter().map(|&p| x.rows[p]).collect(), n: x.n })
}

fn check_permutation(sigma: &[usize], len: usize) -> Result<()> {
    if sigma.len() != len {
        return Err(Error::Dimension(format!("permutation of {} points acting on {len}", sigma.len())));
    }
    let mut seen = vec![false; len];
    for &s in sigma {
        if s >= len || seen[s] {
            return Err(Error::InvalidArgument(format!("{sigma:?} is not a permutation")));
        }
        seen[s] = true;
    }
    Ok(())
}

/// `T X` for an invertible `r x r` matrix `T`.
pub fn act_gl(t: &BitMatrix, x: &BitMatrix) -> Result<BitMatrix> {
    if t.r() != t.n() || t.r() != x.r() {
        return Err(Error::Dimension(format!("{}x{} group element on {} rows", t.r(), t.n(), x.r())));
    }
    if t.rank() != t.r() {
        return Err(Error::InvalidGroupElement("matrix is singular over F2".into()));
    }
    t.mul(x)
}

/// Subset of the row indices `[r]`, bit `i` standing for row `i + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowSubset(pub u32);

impl RowSubset {
    pub fn empty() -> Self {
        RowSubset(0)
    }

    pub fn full(r: usize) -> Self {
        RowSubset(((1u64 << r) - 1) as u32)
    }

    /// From 1-based row numbers.
    pub fn from_rows(rows: &[usize]) -> Self {
        RowSubset(rows.iter().fold(0, |acc, &i| acc | (1 << (i - 1))))
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.0 >> i) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// All subsets of `[r]`, in mask order.
    pub fn all(r: usize) -> impl Iterator<Item = RowSubset> {
        (0..1u32 << r).map(RowSubset)
    }

    /// Image of the subset under a row permutation: `{ i : pi(i) in S }`.
    pub fn preimage(&self, pi: &[usize]) -> RowSubset {
        RowSubset(
            pi.iter()
                .enumerate()
                .filter(|(_, &p)| self.contains(p))
                .fold(0, |acc, (i, _)| acc | (1 << i)),
        )
    }
}

/// A real function on `{0,1}^{r x n}` stored as a dense table of rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeFunction {
    r: usize,
    n: usize,
    values: Vec<Rational>,
}

impl CubeFunction {
    pub fn zeros(r: usize, n: usize) -> Result<Self> {
        Self::zeros_with_limit(r, n, DEFAULT_ORACLE_BITS)
    }

    pub fn zeros_with_limit(r: usize, n: usize, limit_bits: usize) -> Result<Self> {
        check_oracle_size(r, n, limit_bits)?;
        Ok(CubeFunction { r, n, values: vec![Rational::zero(); 1 << (r * n)] })
    }

    pub fn from_values(r: usize, n: usize, values: Vec<Rational>) -> Result<Self> {
        check_oracle_size(r, n, DEFAULT_ORACLE_BITS)?;
        if values.len() != 1 << (r * n) {
            return Err(Error::Dimension(format!("{} values for a cube of {} points", values.len(), 1usize << (r * n))));
        }
        Ok(CubeFunction { r, n, values })
    }

    pub fn from_fn(r: usize, n: usize, mut f: impl FnMut(&BitMatrix) -> Rational) -> Result<Self> {
        check_oracle_size(r, n, DEFAULT_ORACLE_BITS)?;
        let values = (0..1usize << (r * n)).map(|i| f(&BitMatrix::from_index(i, r, n))).collect();
        Ok(CubeFunction { r, n, values })
    }

    /// Indicator of a single matrix.
    pub fn delta(x: &BitMatrix) -> Result<Self> {
        let mut f = Self::zeros(x.r(), x.n())?;
        f.values[x.index()] = Rational::one();
        Ok(f)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn at(&self, x: &BitMatrix) -> &Rational {
        &self.values[x.index()]
    }

    pub fn at_index(&self, index: usize) -> &Rational {
        &self.values[index]
    }

    pub fn set(&mut self, x: &BitMatrix, v: Rational) {
        let i = x.index();
        self.values[i] = v;
    }

    pub fn points(&self) -> impl Iterator<Item = BitMatrix> + '_ {
        (0..self.values.len()).map(move |i| BitMatrix::from_index(i, self.r, self.n))
    }

    /// `(f o g)(X) = f(g(X))` for a map `g` on matrices.
    pub fn compose(&self, mut g: impl FnMut(&BitMatrix) -> BitMatrix) -> CubeFunction {
        let values = self.points().map(|x| self.values[g(&x).index()].clone()).collect();
        CubeFunction { r: self.r, n: self.n, values }
    }

    pub fn map(&self, mut g: impl FnMut(&Rational) -> Rational) -> CubeFunction {
        CubeFunction { r: self.r, n: self.n, values: self.values.iter().map(&mut g).collect() }
    }

    pub fn scale(&self, c: &Rational) -> CubeFunction {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &CubeFunction) -> Result<CubeFunction> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(CubeFunction { r: self.r, n: self.n, values })
    }

    pub fn pointwise_mul(&self, other: &CubeFunction) -> Result<CubeFunction> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(CubeFunction { r: self.r, n: self.n, values })
    }

    /// Normalized inner product `2^{-rn} sum f g`.
    pub fn inner(&self, other: &CubeFunction) -> Result<Rational> {
        self.check_same(other)?;
        let s: Rational = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * pow2(-((self.r * self.n) as i64)))
    }

    /// Unnormalized inner product `sum f g`, the Fourier-side pairing.
    pub fn inner_unnormalized(&self, other: &CubeFunction) -> Result<Rational> {
        self.check_same(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    /// `(f * g)(x) = 2^{-rn} sum_y f(y) g(x + y)`.
    pub fn convolve(&self, other: &CubeFunction) -> Result<CubeFunction> {
        self.check_same(other)?;
        let scale = pow2(-((self.r * self.n) as i64));
        let len = self.values.len();
        let values = (0..len)
            .map(|x| {
                let s: Rational = (0..len).map(|y| &self.values[y] * &other.values[x ^ y]).sum();
                s * &scale
            })
            .collect();
        Ok(CubeFunction { r: self.r, n: self.n, values })
    }

    pub fn sum(&self) -> Rational {
        self.values.iter().sum()
    }

    fn check_same(&self, other: &CubeFunction) -> Result<()> {
        if self.r != other.r || self.n != other.n {
            return Err(Error::Dimension(format!(
                "functions on {}x{} and {}x{} matrices",
                self.r, self.n, other.r, other.n
            )));
        }
        Ok(())
    }
}

fn check_oracle_size(r: usize, n: usize, limit_bits: usize) -> Result<()> {
    if r == 0 || n == 0 {
        return Err(Error::InvalidArgument("r and n must be positive".into()));
    }
    if r * n > limit_bits {
        return Err(Error::OracleLimit(format!("r*n = {} exceeds the oracle limit {limit_bits}", r * n)));
    }
    Ok(())
}

/// Partial Fourier transform `F_S(f)`: a normalized Walsh-Hadamard transform on
/// every row block in `S`, identity on the remaining rows.
pub fn partial_fourier(f: &CubeFunction, s: RowSubset) -> Result<CubeFunction> {
    if s.0 >> f.r != 0 {
        return Err(Error::Dimension(format!("subset {:#b} of [{}]", s.0, f.r)));
    }
    let mut values = f.values.clone();
    let len = values.len();
    for i in (0..f.r).filter(|&i| s.contains(i)) {
        for b in i * f.n..(i + 1) * f.n {
            let step = 1usize << b;
            for idx in 0..len {
                if idx & step == 0 {
                    let hi = idx | step;
                    let sum = &values[idx] + &values[hi];
                    let diff = &values[idx] - &values[hi];
                    values[idx] = sum;
                    values[hi] = diff;
                }
            }
        }
    }
    let scale = pow2(-((s.len() * f.n) as i64));
    if !s.is_empty() {
        for v in &mut values {
            *v *= &scale;
        }
    }
    Ok(CubeFunction { r: f.r, n: f.n, values })
}

/// Full Fourier transform `f^ = F_[r](f)`.
pub fn fourier(f: &CubeFunction) -> CubeFunction {
    partial_fourier(f, RowSubset::full(f.r)).expect("full subset is valid")
}

/// Level-set indicator `L_alpha(X) = [cf_X = alpha]`.
pub fn level_set(alpha: &MultiIndex, n: usize) -> Result<CubeFunction> {
    if alpha.n() != n {
        return Err(Error::Dimension(format!("composition of {} for n = {n}", alpha.n())));
    }
    CubeFunction::from_fn(alpha.r(), n, |x| {
        if column_enumerator(x) == *alpha {
            Rational::one()
        } else {
            Rational::zero()
        }
    })
}

/// Integer-valued convenience constructor.
pub fn int_function(r: usize, n: usize, values: &[i64]) -> Result<CubeFunction> {
    CubeFunction::from_values(r, n, values.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect())
}
