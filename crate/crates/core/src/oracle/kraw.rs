//! Krawtchouk identities checked against direct character sums.

use crate::cube::{column_enumerator, BitMatrix, CubeFunction, RowSubset};
use crate::error::{Error, Result};
use crate::indexset::IndexSet;
use crate::krawtchouk::{krawtchouk, krawtchouk_contingency, krawtchouk_univariate, KrawtchoukCache};
use crate::rational::{big, int, pow2};

use super::fourier::brute_partial_fourier;
use super::Report;

/// `K_alpha(cf_X) = 2^{rn} F(L_alpha)(X)` for every `alpha` and `X`, with the
/// transform of the level-set indicator taken from the definition.
pub fn verify_level_set_identity(r: usize, n: usize) -> Result<Report> {
    if r > 2 || n > 4 {
        return Err(Error::OracleLimit(format!("level-set identity limited to r <= 2, n <= 4 (got r={r}, n={n})")));
    }
    let idx = IndexSet::new(r, n)?;
    let scale = pow2((r * n) as i64);
    let mut report = Report::new();
    for alpha in idx.items() {
        let indicator = CubeFunction::from_fn(r, n, |x| {
            // Column counts computed here rather than through the cube helpers.
            let mut counts = vec![0u32; 1 << r];
            for j in 0..n {
                let col = (0..r).fold(0usize, |acc, i| acc | ((((x.rows()[i] >> j) & 1) as usize) << i));
                counts[col] += 1;
            }
            int(i64::from(counts == alpha.counts()))
        })?;
        let transform = brute_partial_fourier(&indicator, RowSubset::full(r))?;
        for xi in 0..1usize << (r * n) {
            let x = BitMatrix::from_index(xi, r, n);
            let lhs = big(krawtchouk(alpha, &column_enumerator(&x))?);
            let rhs = transform.at(&x) * &scale;
            report.compare("krawtchouk.level_set", format!("r={r} n={n} alpha={:?} X={xi}", alpha.counts()), &lhs, &rhs);
        }
    }
    Ok(report)
}

/// Generating-function values against the contingency-table formula.
pub fn verify_contingency_agreement(r: usize, n: usize) -> Result<Report> {
    if r > 2 || n > 6 {
        return Err(Error::OracleLimit(format!("contingency check limited to r <= 2, n <= 6 (got r={r}, n={n})")));
    }
    let table = KrawtchoukCache::global().full(r, n)?;
    let idx = table.index_set().clone();
    let mut report = Report::new();
    for (b, beta) in idx.items().iter().enumerate() {
        let row = table.row(b)?;
        for (a, alpha) in idx.items().iter().enumerate() {
            let lhs = big(row.get(a));
            let rhs = big(krawtchouk_contingency(alpha, beta)?);
            report.compare(
                "krawtchouk.contingency",
                format!("r={r} n={n} alpha={:?} beta={:?}", alpha.counts(), beta.counts()),
                &lhs,
                &rhs,
            );
        }
    }
    Ok(report)
}

/// `r = 1` table entries against `sum_{|y| = k} (-1)^{<x, y>}` with `|x| = i`,
/// and against the alternating binomial closed form.
pub fn verify_univariate(n: usize) -> Result<Report> {
    if n > 12 {
        return Err(Error::OracleLimit(format!("univariate check limited to n <= 12 (got {n})")));
    }
    let table = KrawtchoukCache::global().full(1, n)?;
    let mut report = Report::new();
    for i in 0..=n {
        let x: u64 = (1u64 << i) - 1;
        let row = table.row(i)?;
        for k in 0..=n {
            let sum: i64 = (0..1u64 << n)
                .filter(|y| y.count_ones() as usize == k)
                .map(|y| if (x & y).count_ones() % 2 == 0 { 1 } else { -1 })
                .sum();
            let params = format!("n={n} k={k} i={i}");
            let value = big(row.get(k));
            report.compare("krawtchouk.univariate_sum", params.clone(), &value, &int(sum));
            let closed = big(krawtchouk_univariate(n as u32, k as u32, i as u32));
            report.compare("krawtchouk.univariate_closed_form", params, &value, &closed);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_set_small() {
        let rep = verify_level_set_identity(1, 3).unwrap();
        assert_eq!(rep.len(), 4 * 8);
        assert!(rep.all_passed());
        let rep = verify_level_set_identity(2, 2).unwrap();
        assert!(rep.all_passed(), "{rep}");
    }

    #[test]
    fn limits() {
        assert!(matches!(verify_level_set_identity(3, 2), Err(Error::OracleLimit(_))));
    }
}
