//! Exact arithmetic in `Z[ζ]` for `ζ` a primitive `p^M`-th root of unity.
//!
//! `ζ` is the class of `t` in `Z[t]/Φ_{p^M}(t)`; character values are powers
//! of this fixed `ζ`. Valuations are read off the norm
//! `N(x) = Res(Φ_{p^M}, x)`, since `p` is totally ramified in `Q(ζ)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{rat, vp_int, ValuationQ};
use crate::linalg::bareiss_det;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CyclotomicInt {
    p: u64,
    level: u32,
    coeffs: Vec<BigInt>,
}

fn totient(p: u64, level: u32) -> usize {
    (p.pow(level - 1) * (p - 1)) as usize
}

impl CyclotomicInt {
    pub fn zero(p: u64, level: u32) -> Self {
        assert!(level >= 1, "cyclotomic level must be >= 1");
        CyclotomicInt { p, level, coeffs: vec![BigInt::zero(); totient(p, level)] }
    }

    pub fn one(p: u64, level: u32) -> Self {
        Self::from_int(p, level, BigInt::one())
    }

    pub fn from_int(p: u64, level: u32, n: BigInt) -> Self {
        let mut z = Self::zero(p, level);
        z.coeffs[0] = n;
        z
    }

    /// Reduces an arbitrary-length coefficient vector mod `Φ_{p^M}`.
    pub fn from_unreduced(p: u64, level: u32, raw: &[BigInt]) -> Self {
        let order = p.pow(level) as usize;
        let mut folded = vec![BigInt::zero(); order];
        for (e, c) in raw.iter().enumerate() {
            folded[e % order] += c;
        }
        Self::reduce_folded(p, level, folded)
    }

    /// Builds `Σ counts[c] ζ^c` from a histogram indexed by `c mod p^M`.
    pub fn from_histogram(p: u64, level: u32, counts: &[u64]) -> Self {
        let raw: Vec<BigInt> = counts.iter().map(|&c| BigInt::from(c)).collect();
        Self::from_unreduced(p, level, &raw)
    }

    fn reduce_folded(p: u64, level: u32, mut folded: Vec<BigInt>) -> Self {
        let big_p = p.pow(level - 1) as usize;
        let phi = totient(p, level);
        // t^φ = -(1 + t^P + ... + t^{(p-2)P})
        for e in (phi..folded.len()).rev() {
            let c = std::mem::take(&mut folded[e]);
            if c.is_zero() {
                continue;
            }
            for i in 0..(p as usize - 1) {
                folded[e - phi + i * big_p] -= &c;
            }
        }
        folded.truncate(phi);
        CyclotomicInt { p, level, coeffs: folded }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Coordinates in the basis `1, ζ, ..., ζ^{φ(p^M)-1}`.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn from_coeffs(p: u64, level: u32, coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() != totient(p, level) {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates for Z[ζ_{}^{}], got {}",
                totient(p, level),
                p,
                level,
                coeffs.len()
            )));
        }
        Ok(CyclotomicInt { p, level, coeffs })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn check_same(&self, other: &Self) {
        assert!(self.p == other.p && self.level == other.level, "mixing cyclotomic rings");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        self.with_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        self.with_coeffs(coeffs)
    }

    fn with_coeffs(&self, coeffs: Vec<BigInt>) -> Self {
        CyclotomicInt { p: self.p, level: self.level, coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_same(other);
        let n = self.coeffs.len();
        let mut raw = vec![BigInt::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                raw[i + j] += a * b;
            }
        }
        Self::from_unreduced(self.p, self.level, &raw)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Exact division of every coordinate by `k`; `None` if some coordinate
    /// is not divisible (the element is not in `k·Z[ζ]`).
    pub fn div_exact(&self, k: &BigInt) -> Option<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            coeffs.push(q);
        }
        Some(self.with_coeffs(coeffs))
    }

    /// The Galois action `ζ -> ζ^u` for `u` prime to `p`.
    pub fn galois(&self, u: u64) -> Self {
        assert!(!u.is_multiple_of(self.p), "Galois exponent must be prime to p");
        let order = self.p.pow(self.level);
        let mut raw = vec![BigInt::zero(); order as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            raw[((i as u64 * u) % order) as usize] += c;
        }
        Self::from_unreduced(self.p, self.level, &raw)
    }

    /// Norm down to `Q`.
    pub fn norm(&self) -> BigInt {
        resultant(&cyclotomic_polynomial(self.p, self.level), &self.coeffs)
    }
}

impl fmt::Display for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c.abs())?,
                1 => write!(f, "{}ζ", c.abs())?,
                _ => write!(f, "{}ζ^{}", c.abs(), i)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `Φ_{p^M}(t) = Σ_{i<p} t^{i p^{M-1}}`, low degree first.
pub fn cyclotomic_polynomial(p: u64, level: u32) -> Vec<BigInt> {
    let big_p = p.pow(level - 1) as usize;
    let mut out = vec![BigInt::zero(); (p as usize - 1) * big_p + 1];
    for i in 0..p as usize {
        out[i * big_p] = BigInt::one();
    }
    out
}

/// `ζ^c`.
pub fn character_value(p: u64, level: u32, c: u64) -> CyclotomicInt {
    let order = p.pow(level);
    let mut raw = vec![BigInt::zero(); order as usize];
    raw[(c % order) as usize] = BigInt::one();
    CyclotomicInt::from_unreduced(p, level, &raw)
}

fn trimmed(f: &[BigInt]) -> &[BigInt] {
    let mut n = f.len();
    while n > 0 && f[n - 1].is_zero() {
        n -= 1;
    }
    &f[..n]
}

/// Exact resultant of two integer polynomials (low degree first), as the
/// determinant of the Sylvester matrix.
pub fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let f = trimmed(f);
    let g = trimmed(g);
    if f.is_empty() || g.is_empty() {
        return BigInt::zero();
    }
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    if size == 0 {
        return BigInt::one();
    }
    let mut rows = Vec::with_capacity(size);
    // n shifted copies of f, then m shifted copies of g, highest degree first
    for i in 0..n {
        let mut row = vec![BigInt::zero(); size];
        for (k, c) in f.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![BigInt::zero(); size];
        for (k, c) in g.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    bareiss_det(rows)
}

/// `v_p(N(x)) / φ(p^M)`, normalized so that `v(p) = 1`.
pub fn cyclo_valuation(x: &CyclotomicInt) -> ValuationQ {
    if x.is_zero() {
        return ValuationQ::Infinite;
    }
    let n = x.norm();
    debug_assert!(!n.is_zero(), "nonzero element with zero norm");
    let phi = totient(x.p, x.level) as i64;
    ValuationQ::Finite(rat(vp_int(&n, x.p) as i64, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(cs: &[i64]) -> Vec<BigInt> {
        cs.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn character_values() {
        assert_eq!(character_value(5, 1, 0), CyclotomicInt::one(5, 1));
        let z4 = character_value(5, 1, 4);
        assert_eq!(z4.coeffs(), poly(&[-1, -1, -1, -1]).as_slice());
        let total = (0..5).fold(CyclotomicInt::zero(5, 1), |acc, c| acc.add(&character_value(5, 1, c)));
        assert!(total.is_zero());
        let mut tot25 = CyclotomicInt::zero(5, 2);
        for c in 0..25 {
            tot25 = tot25.add(&character_value(5, 2, c));
        }
        assert!(tot25.is_zero());
    }

    #[test]
    fn resultant_examples() {
        assert_eq!(resultant(&poly(&[-3, 1]), &poly(&[-7, 1])), BigInt::from(3 - 7));
        assert_eq!(resultant(&cyclotomic_polynomial(5, 1), &poly(&[-1, 1])), BigInt::from(5));
        assert_eq!(resultant(&poly(&[1, 0, 1]), &poly(&[-2, 0, 1])), BigInt::from(9));
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(cyclo_valuation(&CyclotomicInt::from_int(5, 1, BigInt::from(5))), ValuationQ::Finite(rat(1, 1)));
        let zeta_minus_one = character_value(5, 1, 1).sub(&CyclotomicInt::one(5, 1));
        assert_eq!(cyclo_valuation(&zeta_minus_one), ValuationQ::Finite(rat(1, 4)));
        assert_eq!(cyclo_valuation(&CyclotomicInt::one(7, 1)), ValuationQ::zero());
        assert_eq!(cyclo_valuation(&CyclotomicInt::zero(7, 1)), ValuationQ::Infinite);
        assert_eq!(
            cyclo_valuation(&CyclotomicInt::from_int(5, 2, BigInt::from(25))),
            ValuationQ::Finite(rat(2, 1))
        );
    }

    #[test]
    fn powers_of_zeta_minus_one() {
        for p in [3u64, 5, 7] {
            let base = character_value(p, 1, 1).sub(&CyclotomicInt::one(p, 1));
            let mut acc = CyclotomicInt::one(p, 1);
            for k in 0..=2 * (p as i64 - 1) {
                assert_eq!(cyclo_valuation(&acc), ValuationQ::Finite(rat(k, p as i64 - 1)));
                acc = acc.mul(&base);
            }
        }
    }

    #[test]
    fn units_and_galois() {
        for c in 0..25 {
            assert_eq!(cyclo_valuation(&character_value(5, 2, c)), ValuationQ::zero());
        }
        let x = CyclotomicInt::from_coeffs(5, 1, poly(&[3, -1, 4, 10])).unwrap();
        for u in 1..5 {
            assert_eq!(cyclo_valuation(&x.galois(u)), cyclo_valuation(&x));
        }
        assert_eq!(x.galois(1), x);
    }

    fn arb_elt(p: u64, level: u32) -> impl Strategy<Value = CyclotomicInt> {
        let n = totient(p, level);
        proptest::collection::vec(-30i64..30, n)
            .prop_map(move |v| CyclotomicInt::from_coeffs(p, level, poly(&v)).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn valuation_is_multiplicative(x in arb_elt(5, 1), y in arb_elt(5, 1)) {
            prop_assert_eq!(cyclo_valuation(&x.mul(&y)), cyclo_valuation(&x) + cyclo_valuation(&y));
        }

        #[test]
        fn valuation_is_ultrametric(x in arb_elt(5, 2), y in arb_elt(5, 2)) {
            let s = x.add(&y);
            prop_assert!(cyclo_valuation(&s) >= cyclo_valuation(&x).min(cyclo_valuation(&y)));
        }

        #[test]
        fn galois_is_a_ring_map(x in arb_elt(7, 1), y in arb_elt(7, 1), u in 1u64..7) {
            prop_assert_eq!(x.mul(&y).galois(u), x.galois(u).mul(&y.galois(u)));
        }
    }
}
