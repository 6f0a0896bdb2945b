//! Multivariate Krawtchouk polynomials `K_alpha(beta)` and their partial
//! versions `K^S_alpha(beta)`.
//!
//! For `alpha, beta` in `I_{r,n}`,
//!
//! ```text
//! K_alpha(beta) = coef_{w^alpha} prod_u ( sum_v chi_u(v) w_v )^{beta_u}
//! ```
//!
//! which equals `2^{rn} L^_alpha(X)` for any `X` with `cf_X = beta`. The whole
//! vector `alpha -> K_alpha(beta)` falls out of one polynomial expansion, so
//! tables are filled a row (fixed `beta`) at a time.
//!
//! Partial values factor over the blocks of the rearrangement `alpha^S`:
//! `K^S_alpha(beta) = prod_v K_{alpha^S_v}(beta^S_v)` when every block has the
//! same size in `alpha` and `beta`, and `0` otherwise.
//!
//! Values satisfy `|K| <= 2^{rn}`; they are held in `i128` while `rn` leaves
//! headroom and in `BigInt` beyond.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use parking_lot::RwLock;

use crate::cube::RowSubset;
use crate::error::{Error, Result};
use crate::indexset::{enumerate_index_set, multinomial, IndexSet, MultiIndex};
use crate::oracle::Report;
use crate::rational::{big, pow2, Rational};

/// Largest `r * n` for which values are computed in `i128`.
pub const SMALL_BITS: usize = 124;

/// Rows of a full table are kept in memory only while `|I_{r,n}|` is at most this.
pub const ROW_CACHE_LIMIT: usize = 4096;

const CACHE_MAGIC: &[u8; 4] = b"DLKT";
const CACHE_VERSION: u32 = 1;

#[inline]
fn odd(x: usize) -> bool {
    x.count_ones() & 1 == 1
}

/// Split `u` into its bits on `S` and off `S`, each compressed to the low end.
pub fn split_bits(u: usize, s: RowSubset, r: usize) -> (usize, usize) {
    let (mut on, mut off, mut kon, mut koff) = (0, 0, 0, 0);
    for i in 0..r {
        let b = (u >> i) & 1;
        if s.contains(i) {
            on |= b << kon;
            kon += 1;
        } else {
            off |= b << koff;
            koff += 1;
        }
    }
    (on, off)
}

/// Inverse of [`split_bits`].
pub fn join_bits(on: usize, off: usize, s: RowSubset, r: usize) -> usize {
    let (mut u, mut kon, mut koff) = (0, 0, 0);
    for i in 0..r {
        let b = if s.contains(i) {
            kon += 1;
            (on >> (kon - 1)) & 1
        } else {
            koff += 1;
            (off >> (koff - 1)) & 1
        };
        u |= b << i;
    }
    u
}

/// The rearrangement `alpha^S`: a `2^{r-|S|} x 2^{|S|}` array with
/// `alpha^S[u''][u'] = alpha_u`, where `u'` is the part of `u` on `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixRearrangement {
    s: RowSubset,
    blocks: Vec<Vec<u32>>,
}

impl MatrixRearrangement {
    pub fn new(alpha: &MultiIndex, s: RowSubset) -> Result<Self> {
        let r = alpha.r();
        if s.0 >> r != 0 {
            return Err(Error::Dimension(format!("subset {:#b} of [{r}]", s.0)));
        }
        let k = s.len();
        let mut blocks = vec![vec![0u32; 1 << k]; 1 << (r - k)];
        for (u, &c) in alpha.counts().iter().enumerate() {
            let (on, off) = split_bits(u, s, r);
            blocks[off][on] = c;
        }
        Ok(MatrixRearrangement { s, blocks })
    }

    pub fn subset(&self) -> RowSubset {
        self.s
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    /// Row sums `alpha^S_v . 1`.
    pub fn marginals(&self) -> Vec<u32> {
        self.blocks.iter().map(|b| b.iter().sum()).collect()
    }
}

/// Sparse polynomial expansion machinery for a fixed `(r, n)`.
struct Expander {
    r: usize,
    /// `succ[k][i * 2^r + v]`: rank at degree `k + 1` of monomial `i` times `w_v`.
    succ: Vec<Vec<u32>>,
    sizes: Vec<usize>,
}

impl Expander {
    fn new(r: usize, n: usize) -> Result<Self> {
        let bins = 1usize << r;
        let mut levels: Vec<Vec<MultiIndex>> = vec![vec![MultiIndex::from_counts(r, vec![0; bins])?]];
        for k in 1..=n {
            levels.push(enumerate_index_set(r, k)?);
        }
        let mut succ = Vec::with_capacity(n);
        for k in 0..n {
            let next: HashMap<u128, u32> =
                levels[k + 1].iter().enumerate().map(|(i, a)| (a.key(), i as u32)).collect();
            let mut table = Vec::with_capacity(levels[k].len() * bins);
            let mut counts = vec![0u32; bins];
            for a in &levels[k] {
                for v in 0..bins {
                    counts.copy_from_slice(a.counts());
                    counts[v] += 1;
                    let key = MultiIndex::from_counts(r, counts.clone())?.key();
                    table.push(next[&key]);
                }
            }
            succ.push(table);
        }
        let sizes = levels.iter().map(Vec::len).collect();
        Ok(Expander { r, succ, sizes })
    }

    /// Coefficients of `prod_u (sum_v chi_u(v) w_v)^{beta_u}` over `I_{r,n}`.
    fn expand<T>(&self, beta: &MultiIndex) -> Vec<T>
    where
        T: Clone + Zero + One + for<'a> std::ops::AddAssign<&'a T> + for<'a> std::ops::SubAssign<&'a T>,
    {
        let bins = 1usize << self.r;
        let mut cur = vec![T::one()];
        let mut k = 0;
        for (u, &e) in beta.counts().iter().enumerate() {
            for _ in 0..e {
                let mut next = vec![T::zero(); self.sizes[k + 1]];
                let succ = &self.succ[k];
                for (i, c) in cur.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let base = i * bins;
                    for v in 0..bins {
                        let t = succ[base + v] as usize;
                        if odd(u & v) {
                            next[t] -= c;
                        } else {
                            next[t] += c;
                        }
                    }
                }
                cur = next;
                k += 1;
            }
        }
        cur
    }
}

/// A dense vector of Krawtchouk values.
#[derive(Clone, Debug, PartialEq)]
pub enum KValues {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

impl KValues {
    pub fn len(&self) -> usize {
        match self {
            KValues::Small(v) => v.len(),
            KValues::Big(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> BigInt {
        match self {
            KValues::Small(v) => BigInt::from(v[i]),
            KValues::Big(v) => v[i].clone(),
        }
    }

    pub fn is_zero_at(&self, i: usize) -> bool {
        match self {
            KValues::Small(v) => v[i] == 0,
            KValues::Big(v) => v[i].is_zero(),
        }
    }
}

/// Full Krawtchouk values `K_alpha(beta)` for one `(r, n)`, computed a row at a time.
pub struct FullTable {
    r: usize,
    n: usize,
    index: Arc<IndexSet>,
    expander: OnceLock<Result<Expander>>,
    rows: RwLock<HashMap<usize, Arc<KValues>>>,
    keep_rows: bool,
}

impl FullTable {
    fn new(r: usize, n: usize) -> Result<Self> {
        let index = Arc::new(IndexSet::new(r, n)?);
        let keep_rows = index.len() <= ROW_CACHE_LIMIT;
        Ok(FullTable { r, n, index, expander: OnceLock::new(), rows: RwLock::new(HashMap::new()), keep_rows })
    }

    pub fn index_set(&self) -> &Arc<IndexSet> {
        &self.index
    }

    fn expander(&self) -> Result<&Expander> {
        self.expander
            .get_or_init(|| Expander::new(self.r, self.n))
            .as_ref()
            .map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    /// `alpha -> K_alpha(beta)` in index-set order, for `beta` of the given rank.
    pub fn row(&self, beta_rank: usize) -> Result<Arc<KValues>> {
        if let Some(row) = self.rows.read().get(&beta_rank) {
            return Ok(row.clone());
        }
        let beta = self.index.get(beta_rank);
        let exp = self.expander()?;
        let values = if self.r * self.n <= SMALL_BITS {
            KValues::Small(exp.expand::<i128>(beta))
        } else {
            KValues::Big(exp.expand::<BigInt>(beta))
        };
        let row = Arc::new(values);
        if self.keep_rows {
            return Ok(self.rows.write().entry(beta_rank).or_insert(row).clone());
        }
        Ok(row)
    }
}

/// Nonzero values of one row `alpha -> K^S_alpha(beta)`, sorted by `alpha` rank.
#[derive(Clone, Debug, PartialEq)]
pub enum SparseRow {
    Small(Vec<(u32, i128)>),
    Big(Vec<(u32, BigInt)>),
}

impl SparseRow {
    pub fn len(&self) -> usize {
        match self {
            SparseRow::Small(v) => v.len(),
            SparseRow::Big(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries as `(alpha rank, value)`.
    pub fn entries(&self) -> Vec<(usize, BigInt)> {
        match self {
            SparseRow::Small(v) => v.iter().map(|&(a, x)| (a as usize, BigInt::from(x))).collect(),
            SparseRow::Big(v) => v.iter().map(|(a, x)| (*a as usize, x.clone())).collect(),
        }
    }

    pub fn get(&self, alpha_rank: usize) -> BigInt {
        let key = alpha_rank as u32;
        match self {
            SparseRow::Small(v) => v
                .binary_search_by_key(&key, |e| e.0)
                .map(|i| BigInt::from(v[i].1))
                .unwrap_or_default(),
            SparseRow::Big(v) => v.binary_search_by_key(&key, |e| e.0).map(|i| v[i].1.clone()).unwrap_or_default(),
        }
    }
}

/// Values `K^S_alpha(beta)` for a fixed `(r, n, S)`, filled lazily by rows.
pub struct KrawtchoukTable {
    r: usize,
    n: usize,
    s: RowSubset,
    index: Arc<IndexSet>,
    /// Full tables at `(|S|, m)` for `m = 0..=n` (index 0 unused).
    blocks: Vec<Option<Arc<FullTable>>>,
    rows: RwLock<HashMap<usize, Arc<SparseRow>>>,
    keep_rows: bool,
}

impl KrawtchoukTable {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subset(&self) -> RowSubset {
        self.s
    }

    pub fn index_set(&self) -> &Arc<IndexSet> {
        &self.index
    }

    /// `K^S_alpha(beta)`.
    pub fn get(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Result<BigInt> {
        let (a, b) = self.ranks(alpha, beta)?;
        Ok(self.row(b)?.get(a))
    }

    pub fn get_by_rank(&self, alpha_rank: usize, beta_rank: usize) -> Result<BigInt> {
        Ok(self.row(beta_rank)?.get(alpha_rank))
    }

    fn ranks(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Result<(usize, usize)> {
        let a = self.index.rank(alpha);
        let b = self.index.rank(beta);
        match (a, b) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Dimension(format!("indices outside I_{{{},{}}}", self.r, self.n))),
        }
    }

    /// The row `alpha -> K^S_alpha(beta)` for `beta` of the given rank.
    pub fn row(&self, beta_rank: usize) -> Result<Arc<SparseRow>> {
        if let Some(row) = self.rows.read().get(&beta_rank) {
            return Ok(row.clone());
        }
        let row = Arc::new(self.compute_row(beta_rank)?);
        if self.keep_rows {
            return Ok(self.rows.write().entry(beta_rank).or_insert(row).clone());
        }
        Ok(row)
    }

    fn compute_row(&self, beta_rank: usize) -> Result<SparseRow> {
        let r = self.r;
        let k = self.s.len();
        let beta = self.index.get(beta_rank);
        if k == 0 {
            return Ok(SparseRow::Small(vec![(beta_rank as u32, 1)]));
        }
        let re = MatrixRearrangement::new(beta, self.s)?;
        // Row of the block table for every nonempty off-S block.
        let mut fetched: Vec<Option<(Arc<FullTable>, Arc<KValues>)>> = Vec::with_capacity(re.blocks.len());
        for block in &re.blocks {
            let m: u32 = block.iter().sum();
            if m == 0 {
                fetched.push(None);
                continue;
            }
            let table = self.blocks[m as usize].clone().expect("block table present");
            let sub = MultiIndex::from_counts(k, block.clone())?;
            let rank = table.index_set().rank(&sub).expect("block is a composition");
            let values = table.row(rank)?;
            fetched.push(Some((table, values)));
        }
        // Nonzero (sub-composition, value) options per block.
        let per_block: Vec<Option<Vec<(&[u32], BigInt)>>> = fetched
            .iter()
            .map(|f| {
                f.as_ref().map(|(table, values)| {
                    (0..values.len())
                        .filter(|&i| !values.is_zero_at(i))
                        .map(|i| (table.index_set().get(i).counts(), values.get(i)))
                        .collect()
                })
            })
            .collect();

        let mut out: Vec<(u32, BigInt)> = Vec::new();
        let mut counts = vec![0u32; 1 << r];
        self.product(&per_block, 0, BigInt::one(), &mut counts, &mut out);
        out.sort_unstable_by_key(|e| e.0);
        if r * self.n <= SMALL_BITS {
            Ok(SparseRow::Small(out.into_iter().map(|(a, v)| (a, v.to_i128().expect("bounded by 2^{rn}"))).collect()))
        } else {
            Ok(SparseRow::Big(out))
        }
    }

    fn product(
        &self,
        per_block: &[Option<Vec<(&[u32], BigInt)>>],
        v: usize,
        acc: BigInt,
        counts: &mut Vec<u32>,
        out: &mut Vec<(u32, BigInt)>,
    ) {
        if v == per_block.len() {
            let rank = self.index.rank_of_counts(counts).expect("assembled composition");
            out.push((rank as u32, acc));
            return;
        }
        match &per_block[v] {
            None => {
                for on in 0..1usize << self.s.len() {
                    counts[join_bits(on, v, self.s, self.r)] = 0;
                }
                self.product(per_block, v + 1, acc, counts, out);
            }
            Some(opts) => {
                for (sub, val) in opts {
                    for (on, &c) in sub.iter().enumerate() {
                        counts[join_bits(on, v, self.s, self.r)] = c;
                    }
                    self.product(per_block, v + 1, &acc * val, counts, out);
                }
            }
        }
    }

    /// Write every nonzero value to a little-endian binary cache file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&(self.r as u8).to_le_bytes())?;
        w.write_all(&(self.n as u16).to_le_bytes())?;
        w.write_all(&self.s.0.to_le_bytes())?;
        let mut records = Vec::new();
        for b in 0..self.index.len() {
            for (a, v) in self.row(b)?.entries() {
                records.push((a as u32, b as u32, v));
            }
        }
        w.write_all(&(records.len() as u64).to_le_bytes())?;
        for (a, b, v) in records {
            w.write_all(&a.to_le_bytes())?;
            w.write_all(&b.to_le_bytes())?;
            let (sign, mag) = v.to_bytes_le();
            w.write_all(&[u8::from(sign == Sign::Minus)])?;
            w.write_all(&(mag.len() as u16).to_le_bytes())?;
            w.write_all(&mag)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fill rows from a cache file written by [`KrawtchoukTable::save`].
    pub fn load(&self, path: &Path) -> Result<()> {
        let mut rd = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        rd.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::CacheFormat("bad magic".into()));
        }
        let version = read_u32(&mut rd)?;
        if version != CACHE_VERSION {
            return Err(Error::CacheFormat(format!("version {version}, expected {CACHE_VERSION}")));
        }
        let mut r = [0u8; 1];
        rd.read_exact(&mut r)?;
        let n = read_u16(&mut rd)?;
        let s = read_u32(&mut rd)?;
        if r[0] as usize != self.r || n as usize != self.n || s != self.s.0 {
            return Err(Error::CacheFormat(format!(
                "file holds (r={}, n={n}, S={s:#b}), table is (r={}, n={}, S={:#b})",
                r[0], self.r, self.n, self.s.0
            )));
        }
        let mut count = [0u8; 8];
        rd.read_exact(&mut count)?;
        let count = u64::from_le_bytes(count);
        let mut rows: HashMap<usize, Vec<(u32, BigInt)>> = HashMap::new();
        for _ in 0..count {
            let a = read_u32(&mut rd)?;
            let b = read_u32(&mut rd)?;
            let mut sign = [0u8; 1];
            rd.read_exact(&mut sign)?;
            let len = read_u16(&mut rd)? as usize;
            let mut mag = vec![0u8; len];
            rd.read_exact(&mut mag)?;
            let sign = match sign[0] {
                0 => Sign::Plus,
                1 => Sign::Minus,
                other => return Err(Error::CacheFormat(format!("sign byte {other}"))),
            };
            if a as usize >= self.index.len() || b as usize >= self.index.len() {
                return Err(Error::CacheFormat("index out of range".into()));
            }
            rows.entry(b as usize).or_default().push((a, BigInt::from_bytes_le(sign, &mag)));
        }
        let mut guard = self.rows.write();
        for b in 0..self.index.len() {
            let mut entries = rows.remove(&b).unwrap_or_default();
            entries.sort_unstable_by_key(|e| e.0);
            let row = if self.r * self.n <= SMALL_BITS {
                SparseRow::Small(
                    entries
                        .into_iter()
                        .map(|(a, v)| v.to_i128().map(|x| (a, x)))
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| Error::CacheFormat("value exceeds 2^{rn}".into()))?,
                )
            } else {
                SparseRow::Big(entries)
            };
            guard.insert(b, Arc::new(row));
        }
        Ok(())
    }
}

fn read_u32(rd: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    rd.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u16(rd: &mut impl Read) -> Result<u16> {
    let mut b = [0u8; 2];
    rd.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

/// Shared store of tables keyed by `(r, n)` and `(r, n, S)`.
#[derive(Default)]
pub struct KrawtchoukCache {
    full: RwLock<HashMap<(usize, usize), Arc<FullTable>>>,
    tables: RwLock<HashMap<(usize, usize, u32), Arc<KrawtchoukTable>>>,
    dir: Option<PathBuf>,
}

impl KrawtchoukCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tables are loaded from and persisted to files in `dir`.
    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        KrawtchoukCache { dir: Some(dir.into()), ..Self::default() }
    }

    /// Process-wide cache without persistence.
    pub fn global() -> &'static KrawtchoukCache {
        static GLOBAL: OnceLock<KrawtchoukCache> = OnceLock::new();
        GLOBAL.get_or_init(KrawtchoukCache::new)
    }

    pub fn full(&self, r: usize, n: usize) -> Result<Arc<FullTable>> {
        if let Some(t) = self.full.read().get(&(r, n)) {
            return Ok(t.clone());
        }
        let t = Arc::new(FullTable::new(r, n)?);
        Ok(self.full.write().entry((r, n)).or_insert(t).clone())
    }

    pub fn table(&self, r: usize, n: usize, s: RowSubset) -> Result<Arc<KrawtchoukTable>> {
        if let Some(t) = self.tables.read().get(&(r, n, s.0)) {
            return Ok(t.clone());
        }
        if s.0 >> r != 0 {
            return Err(Error::Dimension(format!("subset {:#b} of [{r}]", s.0)));
        }
        let index = if s.len() == r { self.full(r, n)?.index_set().clone() } else { Arc::new(IndexSet::new(r, n)?) };
        let mut blocks = vec![None];
        for m in 1..=n {
            blocks.push(if s.is_empty() { None } else { Some(self.full(s.len(), m)?) });
        }
        let keep_rows = index.len() <= ROW_CACHE_LIMIT;
        let table = Arc::new(KrawtchoukTable { r, n, s, index, blocks, rows: RwLock::new(HashMap::new()), keep_rows });
        if let Some(path) = self.file_for(r, n, s) {
            if path.exists() {
                match table.load(&path) {
                    Ok(()) => log::debug!("loaded Krawtchouk cache {}", path.display()),
                    Err(e) => log::warn!("ignoring cache file {}: {e}", path.display()),
                }
            }
        }
        Ok(self.tables.write().entry((r, n, s.0)).or_insert(table).clone())
    }

    pub fn file_for(&self, r: usize, n: usize, s: RowSubset) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("k_r{r}_n{n}_s{}.bin", s.0)))
    }

    /// Persist every table currently held (no-op without a directory).
    pub fn persist(&self) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        std::fs::create_dir_all(dir)?;
        let tables: Vec<_> = self.tables.read().values().cloned().collect();
        for t in tables {
            let path = self.file_for(t.r, t.n, t.s).expect("dir set");
            if !path.exists() {
                t.save(&path)?;
            }
        }
        Ok(())
    }
}

fn check_pair(alpha: &MultiIndex, beta: &MultiIndex) -> Result<()> {
    if !alpha.same_shape(beta) {
        return Err(Error::Dimension(format!(
            "alpha in I_{{{},{}}} and beta in I_{{{},{}}}",
            alpha.r(),
            alpha.n(),
            beta.r(),
            beta.n()
        )));
    }
    Ok(())
}

/// `K_alpha(beta)` by generating-function expansion.
pub fn krawtchouk(alpha: &MultiIndex, beta: &MultiIndex) -> Result<BigInt> {
    check_pair(alpha, beta)?;
    let table = KrawtchoukCache::global().full(alpha.r(), alpha.n())?;
    let a = table.index_set().rank(alpha).expect("alpha in I_{r,n}");
    let b = table.index_set().rank(beta).expect("beta in I_{r,n}");
    Ok(table.row(b)?.get(a))
}

/// `K_alpha(beta)` by summing over contingency tables `A` with row sums `beta`
/// and column sums `alpha`:
/// `sum_A prod_u C(beta_u; A_u) (-1)^{sum <u,v> A_uv}`.
pub fn krawtchouk_contingency(alpha: &MultiIndex, beta: &MultiIndex) -> Result<BigInt> {
    check_pair(alpha, beta)?;
    let bins = alpha.counts().len();
    let mut cols: Vec<u32> = alpha.counts().to_vec();
    let mut total = BigInt::zero();
    contingency_rows(beta.counts(), 0, &mut cols, BigInt::one(), &mut vec![0; bins], &mut total, bins);
    Ok(total)
}

fn contingency_rows(
    beta: &[u32],
    u: usize,
    cols: &mut Vec<u32>,
    acc: BigInt,
    row: &mut Vec<u32>,
    total: &mut BigInt,
    bins: usize,
) {
    if u == bins {
        if cols.iter().all(|&c| c == 0) {
            *total += acc;
        }
        return;
    }
    contingency_cells(beta, u, 0, beta[u], cols, &acc, row, total, bins);
}

#[allow(clippy::too_many_arguments)]
fn contingency_cells(
    beta: &[u32],
    u: usize,
    v: usize,
    left: u32,
    cols: &mut Vec<u32>,
    acc: &BigInt,
    row: &mut Vec<u32>,
    total: &mut BigInt,
    bins: usize,
) {
    if v + 1 == bins {
        if left > cols[v] {
            return;
        }
        row[v] = left;
        // Row complete: multinomial C(beta_u; row) with the sign.
        let mut term = acc.clone();
        let mut m = 0u64;
        let mut negative = false;
        for (w, &a) in row.iter().enumerate() {
            for j in 1..=a as u64 {
                m += 1;
                term = term * m / j;
            }
            if odd(u & w) && a % 2 == 1 {
                negative = !negative;
            }
        }
        if negative {
            term = -term;
        }
        for (w, &a) in row.iter().enumerate() {
            cols[w] -= a;
        }
        contingency_rows(beta, u + 1, cols, term, &mut vec![0; bins], total, bins);
        for (w, &a) in row.iter().enumerate() {
            cols[w] += a;
        }
        return;
    }
    for a in 0..=left.min(cols[v]) {
        row[v] = a;
        contingency_cells(beta, u, v + 1, left - a, cols, acc, row, total, bins);
    }
}

/// Univariate closed form `K_k(i) = sum_j (-1)^j C(i,j) C(n-i,k-j)`.
pub fn krawtchouk_univariate(n: u32, k: u32, i: u32) -> BigInt {
    let mut s = BigInt::zero();
    for j in 0..=k.min(i) {
        if k - j > n - i {
            continue;
        }
        let term = binom(i, j) * binom(n - i, k - j);
        if j % 2 == 0 {
            s += term;
        } else {
            s -= term;
        }
    }
    s
}

pub(crate) fn binom(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// `K^S_alpha(beta)`, evaluated block by block from full Krawtchouk values.
pub fn partial_krawtchouk(alpha: &MultiIndex, beta: &MultiIndex, s: RowSubset) -> Result<BigInt> {
    check_pair(alpha, beta)?;
    let ra = MatrixRearrangement::new(alpha, s)?;
    let rb = MatrixRearrangement::new(beta, s)?;
    if ra.marginals() != rb.marginals() {
        return Ok(BigInt::zero());
    }
    let k = s.len();
    if k == 0 {
        return Ok(if alpha == beta { BigInt::one() } else { BigInt::zero() });
    }
    let mut acc = BigInt::one();
    for (a, b) in ra.blocks.iter().zip(&rb.blocks) {
        if a.iter().all(|&c| c == 0) {
            continue;
        }
        let a = MultiIndex::from_counts(k, a.clone())?;
        let b = MultiIndex::from_counts(k, b.clone())?;
        acc *= krawtchouk(&a, &b)?;
        if acc.is_zero() {
            break;
        }
    }
    Ok(acc)
}

/// `sum_gamma m(gamma) K_alpha(gamma) K_beta(gamma) = C(n, alpha) [alpha = beta]`
/// with `m(gamma) = 2^{-rn} C(n, gamma)`, checked for every pair.
pub fn check_orthogonality(r: usize, n: usize) -> Result<Report> {
    if r > 2 || n > 8 {
        return Err(Error::OracleLimit(format!("orthogonality check limited to r <= 2, n <= 8 (got r={r}, n={n})")));
    }
    let table = KrawtchoukCache::global().full(r, n)?;
    let idx = table.index_set().clone();
    let rows: Vec<Arc<KValues>> = (0..idx.len()).map(|g| table.row(g)).collect::<Result<_>>()?;
    let weights: Vec<Rational> = idx.items().iter().map(multinomial).collect();
    let scale = pow2(-((r * n) as i64));
    let mut report = Report::new();
    for a in 0..idx.len() {
        for b in 0..idx.len() {
            let mut sum = BigInt::zero();
            for g in 0..idx.len() {
                if rows[g].is_zero_at(a) || rows[g].is_zero_at(b) {
                    continue;
                }
                sum += weights[g].numer() * rows[g].get(a) * rows[g].get(b);
            }
            let lhs = big(sum) * &scale;
            let rhs = if a == b { weights[a].clone() } else { Rational::zero() };
            report.compare(
                "krawtchouk.orthogonality",
                format!("r={r} n={n} alpha={:?} beta={:?}", idx.get(a).counts(), idx.get(b).counts()),
                &lhs,
                &rhs,
            );
        }
    }
    Ok(report)
}

/// Transformation rules of `K^S` under row permutations and elementary row
/// operations `x_i <- x_i + x_j`:
///
/// * permutation `P`: `K^S_{P^{-1} alpha}(beta) = K^{p^{-1}(S)}_alpha(P beta)`;
/// * `i, j` in `S`: `K^S_{E alpha}(beta) = K^S_alpha(E^T beta)`;
/// * `i, j` off `S`: `K^S_{E alpha}(beta) = K^S_alpha(E beta)`;
/// * `i` in `S`, `j` off `S`: `K^S_{E alpha}(beta) = (-1)^{sum_u beta_u u_i u_j} K^S_alpha(beta)`.
pub fn check_symmetries(r: usize, n: usize) -> Result<Report> {
    use crate::indexset::{act, GlElement};
    if !(2..=3).contains(&r) || n > 5 {
        return Err(Error::OracleLimit(format!("symmetry check limited to r in 2..=3, n <= 5 (got r={r}, n={n})")));
    }
    let cache = KrawtchoukCache::global();
    let idx = IndexSet::new(r, n)?;
    let tables: Vec<Arc<KrawtchoukTable>> =
        RowSubset::all(r).map(|s| cache.table(r, n, s)).collect::<Result<_>>()?;
    let value = |s: RowSubset, a: &MultiIndex, b: &MultiIndex| tables[s.0 as usize].get(a, b);
    let mut report = Report::new();

    for pi in permutations(r) {
        let p = GlElement::permutation(&pi)?;
        let p_inv = p.inverse();
        for s in RowSubset::all(r) {
            let s2 = s.preimage(&pi);
            let mut outcome = Tally::default();
            for a in idx.items() {
                let pa = act(&p_inv, a)?;
                for b in idx.items() {
                    let lhs = value(s, &pa, b)?;
                    let rhs = value(s2, a, &act(&p, b)?)?;
                    outcome.add(lhs, rhs, || format!("alpha={:?} beta={:?}", a.counts(), b.counts()));
                }
            }
            outcome.finish(&mut report, "krawtchouk.row_permutation", format!("r={r} n={n} pi={pi:?} S={:#b}", s.0));
        }
    }

    for i in 0..r {
        for j in (0..r).filter(|&j| j != i) {
            let e = GlElement::elementary(r, i, j)?;
            let et = e.transpose();
            for s in RowSubset::all(r) {
                let (case, check) = match (s.contains(i), s.contains(j)) {
                    (true, true) => ("both_in", "krawtchouk.gl_transpose"),
                    (false, false) => ("both_out", "krawtchouk.gl_direct"),
                    (true, false) => ("in_out", "krawtchouk.gl_sign"),
                    (false, true) => continue,
                };
                let mut outcome = Tally::default();
                for a in idx.items() {
                    let ea = act(&e, a)?;
                    for b in idx.items() {
                        let lhs = value(s, &ea, b)?;
                        let rhs = match case {
                            "both_in" => value(s, a, &act(&et, b)?)?,
                            "both_out" => value(s, a, &act(&e, b)?)?,
                            _ => {
                                let parity: u32 = b
                                    .counts()
                                    .iter()
                                    .enumerate()
                                    .filter(|(u, _)| (u >> i) & 1 == 1 && (u >> j) & 1 == 1)
                                    .map(|(_, &c)| c)
                                    .sum();
                                let v = value(s, a, b)?;
                                if parity % 2 == 1 {
                                    -v
                                } else {
                                    v
                                }
                            }
                        };
                        outcome.add(lhs, rhs, || format!("alpha={:?} beta={:?}", a.counts(), b.counts()));
                    }
                }
                outcome.finish(&mut report, check, format!("r={r} n={n} i={} j={} S={:#b}", i + 1, j + 1, s.0));
            }
        }
    }
    Ok(report)
}

/// Aggregates many integer comparisons into one report entry.
#[derive(Default)]
struct Tally {
    count: u64,
    failure: Option<(String, BigInt, BigInt)>,
}

impl Tally {
    fn add(&mut self, lhs: BigInt, rhs: BigInt, what: impl FnOnce() -> String) {
        self.count += 1;
        if lhs != rhs && self.failure.is_none() {
            self.failure = Some((what(), lhs, rhs));
        }
    }

    fn finish(self, report: &mut Report, check: &str, params: String) {
        match self.failure {
            None => report.pass_many(check, params, self.count),
            Some((what, l, r)) => report.compare(check, format!("{params} {what}"), &big(l), &big(r)),
        }
    }
}

/// All permutations of `0..r` in lexicographic order.
pub fn permutations(r: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                cur.push(k);
                go(cur, used, out);
                cur.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; r], &mut out);
    out
}

/// Magnitude check `|K| <= 2^{rn}`, used when converting to fixed width.
pub fn fits_bound(v: &BigInt, r: usize, n: usize) -> bool {
    v.abs().bits() as usize <= r * n + 1
}
