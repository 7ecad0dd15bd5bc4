//! `Z_q[π]/(π^{p-1} + p)` modulo `p^K`. This is the ring of integers of
//! `Q_q(ζ_p)`, which contains Dwork's `γ`; `v(π) = 1/(p-1)`.

use std::fmt;

use num_bigint::BigInt;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{rat, rational_json, rational_mod, vp_u64, BigRational, ValuationQ};
use crate::finite::{FieldDesc, FiniteField, ZqElt, ZqRing};

/// What a valuation computed at finite precision tells us.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reading {
    Exact(BigRational),
    /// The element vanishes below this bound; its valuation is unknown.
    AtLeast(BigRational),
}

impl Reading {
    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Reading::Exact(v) => Some(v),
            Reading::AtLeast(_) => None,
        }
    }

    /// The valuation is certainly `>= bound`.
    pub fn at_least(&self, bound: &BigRational) -> bool {
        match self {
            Reading::Exact(v) | Reading::AtLeast(v) => v >= bound,
        }
    }

    pub fn scaled_down(&self, h: u32) -> Reading {
        let h = BigRational::from_integer(BigInt::from(h));
        match self {
            Reading::Exact(v) => Reading::Exact(v / h),
            Reading::AtLeast(v) => Reading::AtLeast(v / h),
        }
    }
}

/// `{"exact": [n, d]}` or `{"at_least": [n, d]}`.
impl Serialize for Reading {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(1))?;
        match self {
            Reading::Exact(v) => map.serialize_entry("exact", &rational_json(v))?,
            Reading::AtLeast(v) => map.serialize_entry("at_least", &rational_json(v))?,
        }
        map.end()
    }
}

impl fmt::Display for Reading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reading::Exact(v) => write!(f, "{v}"),
            Reading::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// `Σ a_i π^i`, `0 <= i < p-1`, each `a_i ∈ Z_q / p^K` stored as `h`
/// coordinates; coefficient `i` occupies `[i*h, (i+1)*h)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EisensteinElt(Vec<u64>);

impl EisensteinElt {
    pub fn raw(&self) -> &[u64] {
        &self.0
    }
}

#[derive(Debug, Clone)]
pub struct EisensteinRing {
    zq: ZqRing,
    e: usize,
    h: usize,
    k: u32,
    guard: u32,
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

impl EisensteinRing {
    /// At least `pi_digits` digits of π-adic precision (rounded up to a whole
    /// power of `p`) over the unramified ring described by `desc`.
    pub fn new(desc: &FieldDesc, pi_digits: u32, guard: u32) -> Result<Self> {
        let p = desc.p();
        if p == 2 {
            return Err(Error::InvalidInput("the Eisenstein presentation needs p odd".into()));
        }
        let e = (p - 1) as usize;
        let k = (pi_digits as usize).div_ceil(e).max(1) as u32;
        if guard as usize >= e * k as usize {
            return Err(Error::InvalidInput(format!(
                "guard {guard} leaves no usable digits at precision {}",
                e * k as usize
            )));
        }
        let zq = ZqRing::new(desc, k)?;
        Ok(EisensteinRing { h: desc.degree(), zq, e, k, guard })
    }

    pub fn zq(&self) -> &ZqRing {
        &self.zq
    }

    pub fn p(&self) -> u64 {
        self.zq.p()
    }

    /// Ramification index `p - 1`.
    pub fn e(&self) -> usize {
        self.e
    }

    pub fn h(&self) -> usize {
        self.h
    }

    /// Absolute p-adic precision `K`; elements live modulo `p^K`.
    pub fn p_precision(&self) -> u32 {
        self.k
    }

    pub fn pi_digits(&self) -> u32 {
        self.e as u32 * self.k
    }

    pub fn guard(&self) -> u32 {
        self.guard
    }

    /// Largest trusted valuation (exclusive), `(N_π - guard)/(p-1)`.
    pub fn limit(&self) -> BigRational {
        rat((self.pi_digits() - self.guard) as i64, self.e as i64)
    }

    fn modulus(&self) -> u64 {
        self.zq.modulus()
    }

    pub fn zero(&self) -> EisensteinElt {
        EisensteinElt(vec![0; self.e * self.h])
    }

    pub fn one(&self) -> EisensteinElt {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> EisensteinElt {
        let mut x = self.zero();
        x.0[0] = c.rem_euclid(self.modulus() as i64) as u64;
        x
    }

    /// A p-integral rational.
    pub fn from_rational(&self, r: &BigRational) -> Result<EisensteinElt> {
        let mut x = self.zero();
        x.0[0] = rational_mod(r, self.modulus())?;
        Ok(x)
    }

    pub fn from_zq(&self, a: &ZqElt) -> EisensteinElt {
        let mut x = self.zero();
        x.0[..self.h].copy_from_slice(a.coeffs());
        x
    }

    pub fn pi(&self) -> EisensteinElt {
        let mut x = self.zero();
        x.0[self.h] = 1;
        x
    }

    /// The `Z_q` coefficient of `π^i`.
    pub fn coeff(&self, x: &EisensteinElt, i: usize) -> ZqElt {
        ZqElt(x.0[i * self.h..(i + 1) * self.h].to_vec())
    }

    pub fn is_zero(&self, x: &EisensteinElt) -> bool {
        x.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &EisensteinElt, b: &EisensteinElt) -> EisensteinElt {
        let m = self.modulus();
        EisensteinElt(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % m).collect())
    }

    pub fn add_assign(&self, a: &mut EisensteinElt, b: &EisensteinElt) {
        let m = self.modulus();
        for (x, y) in a.0.iter_mut().zip(&b.0) {
            *x = (*x + y) % m;
        }
    }

    pub fn sub(&self, a: &EisensteinElt, b: &EisensteinElt) -> EisensteinElt {
        let m = self.modulus();
        EisensteinElt(a.0.iter().zip(&b.0).map(|(x, y)| (x + m - y) % m).collect())
    }

    pub fn neg(&self, a: &EisensteinElt) -> EisensteinElt {
        let m = self.modulus();
        EisensteinElt(a.0.iter().map(|x| (m - x) % m).collect())
    }

    pub fn scale_int(&self, a: &EisensteinElt, c: i64) -> EisensteinElt {
        let m = self.modulus();
        let c = c.rem_euclid(m as i64) as u64;
        EisensteinElt(a.0.iter().map(|&x| mulmod(x, c, m)).collect())
    }

    pub fn mul(&self, a: &EisensteinElt, b: &EisensteinElt) -> EisensteinElt {
        let (e, h, m) = (self.e, self.h, self.modulus());
        let mut conv = vec![0u64; (2 * e - 1) * h];
        if h == 1 {
            for (i, &x) in a.0.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.0.iter().enumerate() {
                    if y != 0 {
                        conv[i + j] = ((conv[i + j] as u128 + x as u128 * y as u128) % m as u128) as u64;
                    }
                }
            }
        } else {
            let mut tmp = vec![0u64; h];
            for i in 0..e {
                let x = &a.0[i * h..(i + 1) * h];
                if x.iter().all(|&c| c == 0) {
                    continue;
                }
                for j in 0..e {
                    let y = &b.0[j * h..(j + 1) * h];
                    if y.iter().all(|&c| c == 0) {
                        continue;
                    }
                    self.zq.mul_into(x, y, &mut tmp);
                    for (c, t) in conv[(i + j) * h..(i + j + 1) * h].iter_mut().zip(&tmp) {
                        *c = (*c + t) % m;
                    }
                }
            }
        }
        // π^{e+t} = -p π^t
        let neg_p = (m - self.p() % m) % m;
        for t in (e..2 * e - 1).rev() {
            for c in 0..h {
                let hi = conv[t * h + c];
                if hi != 0 {
                    let lo = &mut conv[(t - e) * h + c];
                    *lo = (*lo + mulmod(hi, neg_p, m)) % m;
                }
            }
        }
        conv.truncate(e * h);
        EisensteinElt(conv)
    }

    pub fn pow(&self, a: &EisensteinElt, mut n: u128) -> EisensteinElt {
        let mut acc = self.one();
        let mut base = a.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Exact division by π of an element with `π | x`; the leading π-digit
    /// of the quotient is unknown and returned as zero.
    pub fn div_pi(&self, a: &EisensteinElt) -> Result<EisensteinElt> {
        let (e, h, p) = (self.e, self.h, self.p());
        if a.0[..h].iter().any(|&c| c % p != 0) {
            return Err(Error::InvalidInput("division by π of a unit".into()));
        }
        let mut out = vec![0u64; e * h];
        out[..(e - 1) * h].copy_from_slice(&a.0[h..]);
        // a_0 = p b = -π^{e} b
        for c in 0..h {
            out[(e - 1) * h + c] = (self.modulus() - a.0[c] / p) % self.modulus();
        }
        Ok(EisensteinElt(out))
    }

    /// Frobenius on the `Z_q` coefficients; fixes π.
    pub fn frobenius(&self, a: &EisensteinElt) -> EisensteinElt {
        let mut out = Vec::with_capacity(a.0.len());
        for i in 0..self.e {
            out.extend_from_slice(self.zq.frobenius(&self.coeff(a, i)).coeffs());
        }
        EisensteinElt(out)
    }

    /// π-adic order, `None` for an element that vanishes at this precision.
    pub fn pi_order(&self, a: &EisensteinElt) -> Option<u64> {
        let p = self.p();
        (0..self.e)
            .filter_map(|i| {
                self.coeff(a, i)
                    .coeffs()
                    .iter()
                    .filter(|&&c| c != 0)
                    .map(|&c| vp_u64(c, p) as u64)
                    .min()
                    .map(|v| i as u64 + self.e as u64 * v)
            })
            .min()
    }

    /// Valuation normalized by `v(p) = 1`; `Infinite` means zero mod `p^K`.
    pub fn valuation(&self, a: &EisensteinElt) -> ValuationQ {
        match self.pi_order(a) {
            Some(v) => ValuationQ::Finite(rat(v as i64, self.e as i64)),
            None => ValuationQ::Infinite,
        }
    }

    /// Valuation trusted only below [`EisensteinRing::limit`].
    pub fn reading(&self, a: &EisensteinElt) -> Reading {
        self.reading_below(a, &self.limit())
    }

    /// As [`EisensteinRing::reading`] with a tighter external cutoff.
    pub fn reading_below(&self, a: &EisensteinElt, cutoff: &BigRational) -> Reading {
        let limit = self.limit();
        let cutoff = if cutoff < &limit { cutoff.clone() } else { limit };
        match self.valuation(a) {
            ValuationQ::Finite(v) if v < cutoff => Reading::Exact(v),
            _ => Reading::AtLeast(cutoff),
        }
    }

    /// Exact valuation or a precision error naming `what`.
    pub fn exact_valuation(&self, a: &EisensteinElt, what: &str) -> Result<BigRational> {
        match self.reading(a) {
            Reading::Exact(v) => Ok(v),
            Reading::AtLeast(b) => Err(Error::Precision(format!(
                "valuation of {what} reaches the guard band (>= {b}) at {} π-digits",
                self.pi_digits()
            ))),
        }
    }

    /// Inverse of a unit (valuation 0) by Newton iteration from the inverse
    /// of its constant coefficient.
    pub fn inverse_unit(&self, a: &EisensteinElt) -> Result<EisensteinElt> {
        let a0 = self.coeff(a, 0);
        let field = FiniteField::new(self.zq.desc())?;
        if field.is_zero(&self.zq.residue(&a0)) {
            return Err(Error::InvalidInput("inverse of a non-unit".into()));
        }
        let inv0 = self
            .zq
            .inverse(&a0)
            .ok_or_else(|| Error::InvalidInput("inverse of a non-unit".into()))?;
        let mut y = self.from_zq(&inv0);
        let two = self.from_int(2);
        let mut correct = 1u32;
        while correct < self.pi_digits() {
            y = self.mul(&y, &self.sub(&two, &self.mul(a, &y)));
            correct *= 2;
        }
        debug_assert_eq!(self.mul(a, &y), self.one());
        Ok(y)
    }
}
