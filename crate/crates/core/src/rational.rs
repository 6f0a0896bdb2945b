//! Helpers around exact rationals: decimal rendering, conversions and root
//! comparisons used when reporting bounds.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn big(v: BigInt) -> Rational {
    Rational::from_integer(v)
}

/// `2^e` for a possibly negative exponent.
pub fn pow2(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Large operands: shift both down to keep the leading bits.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (q.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    (n / d) * 2f64.powi((shift_n - shift_d) as i32)
}

/// Approximate `log2(q)` for positive `q`.
pub fn log2(q: &Rational) -> f64 {
    if !q.is_positive() {
        return f64::NEG_INFINITY;
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (q.numer() >> shift_n as usize).to_f64().unwrap_or(1.0);
    let d = (q.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    n.log2() - d.log2() + (shift_n - shift_d) as f64
}

/// Exact `floor(log2(q))` for positive `q`.
pub fn floor_log2(q: &Rational) -> Option<i64> {
    if !q.is_positive() {
        return None;
    }
    let mut k = log2(q).floor() as i64;
    // Correct the float estimate against exact powers of two.
    while pow2(k) > *q {
        k -= 1;
    }
    while pow2(k + 1) <= *q {
        k += 1;
    }
    Some(k)
}

/// Round to `places` decimals with ties to even, rendered as text.
pub fn to_decimal_string(q: &Rational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = q * Rational::from_integer(scale.clone());
    let fl = scaled.floor();
    let frac = &scaled - &fl;
    let half = ratio(1, 2);
    let mut units = fl.to_integer();
    if frac > half || (frac == half && units.is_odd()) {
        units += 1;
    }
    let negative = units.is_negative();
    let digits = units.abs().to_string();
    let body = if places == 0 {
        digits
    } else {
        let padded = format!("{:0>width$}", digits, width = places + 1);
        let (int_part, frac_part) = padded.split_at(padded.len() - places);
        format!("{int_part}.{frac_part}")
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Decimal text when the expansion terminates (denominator of the form 2^a 5^b).
pub fn exact_decimal(q: &Rational) -> Option<String> {
    let mut den = q.denom().clone();
    let mut twos = 0usize;
    let mut fives = 0usize;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let places = twos.max(fives);
    if places == 0 {
        return Some(q.numer().to_string());
    }
    Some(to_decimal_string(q, places))
}

/// Largest integer `m` with `m^k <= q` (q >= 0).
pub fn floor_root(q: &Rational, k: u32) -> BigInt {
    assert!(k >= 1);
    if !q.is_positive() {
        return BigInt::zero();
    }
    let fl = q.floor().to_integer();
    let mut m = fl.nth_root(k);
    while Rational::from_integer(num_traits::pow(m.clone() + 1, k as usize)) <= *q {
        m += 1;
    }
    while m.sign() == Sign::Plus && Rational::from_integer(num_traits::pow(m.clone(), k as usize)) > *q {
        m -= 1;
    }
    m
}

/// `q^(1/k)` as a float, for reporting only.
pub fn root_f64(q: &Rational, k: u32) -> f64 {
    (log2(q) / k as f64).exp2()
}

/// Exact test of `a^(1/p) <= b^(1/q)` for nonnegative `a`, `b`.
pub fn root_le(a: &Rational, p: u32, b: &Rational, q: u32) -> bool {
    // a^(1/p) <= b^(1/q)  <=>  a^q <= b^p
    num_traits::pow(a.clone(), q as usize) <= num_traits::pow(b.clone(), p as usize)
}

/// JSON form of a rational: numerator and denominator as strings plus a decimal.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
    pub decimal: String,
}

impl RationalJson {
    pub fn new(q: &Rational, places: usize) -> Self {
        RationalJson {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
            decimal: to_decimal_string(q, places),
        }
    }
}

/// Render as `p/q` (or `p` for integers).
pub fn fraction_string(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Expand `q` to `digits` digits after the point, truncating toward zero.
pub fn truncated_decimal(q: &Rational, digits: usize) -> String {
    let neg = q.is_negative();
    let a = q.abs();
    let scale = BigInt::from(10u32).pow(digits as u32);
    let units = (a * Rational::from_integer(scale)).floor().to_integer();
    let s = format!("{:0>width$}", units.to_string(), width = digits + 1);
    let (i, f) = s.split_at(s.len() - digits);
    let body = if digits == 0 { i.to_string() } else { format!("{i}.{f}") };
    if neg && !units.is_zero() {
        format!("-{body}")
    } else {
        body
    }
}
