//! Exact integers, rationals and p-adic valuations of rationals.
//!
//! Everything in the crate that is a slope, a valuation or a matrix entry over
//! `Q` goes through [`BigRational`]; there is no floating point in any
//! computation, only in display code.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use num_rational::BigRational;

/// Shorthand for an exact rational `num/den`.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// A p-adic valuation: a rational number or `+∞` (the valuation of zero).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValuationQ {
    Finite(BigRational),
    Infinite,
}

impl ValuationQ {
    pub fn zero() -> Self {
        ValuationQ::Finite(BigRational::zero())
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ValuationQ::Finite(r) => Some(r),
            ValuationQ::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ValuationQ::Infinite)
    }

    /// Divides a finite valuation by `h` (p-adic to q-adic normalization).
    pub fn scaled_down(&self, h: u32) -> Self {
        match self {
            ValuationQ::Finite(r) => ValuationQ::Finite(r / BigRational::from_integer(BigInt::from(h))),
            ValuationQ::Infinite => ValuationQ::Infinite,
        }
    }
}

impl From<BigRational> for ValuationQ {
    fn from(r: BigRational) -> Self {
        ValuationQ::Finite(r)
    }
}

impl PartialOrd for ValuationQ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ValuationQ {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ValuationQ::Infinite, ValuationQ::Infinite) => Ordering::Equal,
            (ValuationQ::Infinite, _) => Ordering::Greater,
            (_, ValuationQ::Infinite) => Ordering::Less,
            (ValuationQ::Finite(a), ValuationQ::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for ValuationQ {
    type Output = ValuationQ;
    fn add(self, rhs: ValuationQ) -> ValuationQ {
        match (self, rhs) {
            (ValuationQ::Finite(a), ValuationQ::Finite(b)) => ValuationQ::Finite(a + b),
            _ => ValuationQ::Infinite,
        }
    }
}

impl fmt::Display for ValuationQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuationQ::Finite(r) => write!(f, "{r}"),
            ValuationQ::Infinite => write!(f, "inf"),
        }
    }
}

/// Deterministic primality test for the small primes this crate works with.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut f = 3u64;
    while f.saturating_mul(f) <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

pub fn ensure_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// `x (x-1) ... (x-n+1)`, with `x[0] = 1`.
pub fn falling_factorial(x: &BigInt, n: u32) -> BigInt {
    let mut acc = BigInt::one();
    let mut term = x.clone();
    for _ in 0..n {
        acc *= &term;
        term -= 1;
    }
    acc
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `1/n!` for `n >= 0`, and exactly `0` for negative `n`.
pub fn reciprocal_factorial(n: i64) -> BigRational {
    if n < 0 {
        return BigRational::zero();
    }
    BigRational::new(BigInt::one(), factorial(n as u32))
}

/// Exponent of `p` in a nonzero integer.
pub fn vp_int(x: &BigInt, p: u64) -> u64 {
    debug_assert!(!x.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut y = x.abs();
    loop {
        let (q, r) = y.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        y = q;
        v += 1;
    }
}

/// p-adic valuation of a rational (normalized `v(p) = 1`).
pub fn vp_rational(x: &BigRational, p: u64) -> Result<ValuationQ> {
    ensure_prime(p)?;
    if x.is_zero() {
        return Ok(ValuationQ::Infinite);
    }
    let v = vp_int(x.numer(), p) as i64 - vp_int(x.denom(), p) as i64;
    Ok(ValuationQ::Finite(rat_int(v)))
}

/// Exponent of `p` in a nonzero `u64`.
pub fn vp_u64(mut x: u64, p: u64) -> u32 {
    debug_assert!(x != 0);
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

/// `p^e` as `u64`, failing on overflow.
pub fn checked_pow(p: u64, e: u32) -> Result<u64> {
    p.checked_pow(e)
        .ok_or_else(|| Error::Overflow(format!("{p}^{e} does not fit in 64 bits")))
}

/// Reduces an integer into `[0, m)`.
pub fn bigint_mod_u64(x: &BigInt, m: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(m));
    r.to_u64().expect("residue below modulus")
}

/// Inverse of `a` modulo `m` for `gcd(a, m) = 1`.
pub fn inv_mod_u64(a: u64, m: u64) -> Option<u64> {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(m));
    if !e.gcd.is_one() {
        return None;
    }
    Some(bigint_mod_u64(&e.x, m))
}

/// Reduces a p-integral rational `n/d` into `Z/m` where `m` is a power of `p`.
pub fn rational_mod(x: &BigRational, m: u64) -> Result<u64> {
    let den = bigint_mod_u64(x.denom(), m);
    let inv = inv_mod_u64(den, m)
        .ok_or_else(|| Error::Integrality(format!("{x} is not integral at the working prime")))?;
    let num = bigint_mod_u64(x.numer(), m);
    Ok(((num as u128 * inv as u128) % m as u128) as u64)
}

/// Decimal rendering for display only.
pub fn to_decimal(x: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = (x * BigRational::from_integer(scale.clone())).round().to_integer();
    let neg = scaled.is_negative();
    let s = scaled.abs().to_string();
    let s = if s.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - s.len()), s)
    } else {
        s
    };
    let (int, frac) = s.split_at(s.len() - places);
    format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
}

/// `[numerator, denominator]` as JSON; integers that overflow `i64` are
/// written as decimal strings.
pub fn rational_json(r: &BigRational) -> serde_json::Value {
    let part = |x: &BigInt| match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(x.to_string()),
    };
    serde_json::Value::Array(vec![part(r.numer()), part(r.denom())])
}

/// `serialize_with` helpers for exact rationals.
pub mod ser {
    use serde::Serializer;

    use super::{rational_json, BigRational, ValuationQ};

    pub fn rational<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(rational_json(r).as_array().expect("pair"))
    }

    pub fn rationals<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(rational_json))
    }

    /// `+∞` becomes `null`.
    pub fn valuation<S: Serializer>(v: &ValuationQ, s: S) -> Result<S::Ok, S::Error> {
        match v.finite() {
            Some(r) => rational(r, s),
            None => s.serialize_none(),
        }
    }
}
