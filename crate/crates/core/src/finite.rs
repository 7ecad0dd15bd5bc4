//! Residue fields `F_{p^n}`, unramified rings `Z_{p^n}/p^N`, Teichmüller lifts,
//! traces and the Frobenius lift.
//!
//! Both rings are presented as `Z[t]/(p^N, G(t))` where `G` is the canonical
//! monic irreducible modulus of [`make_extension`], lifted to `Z` with
//! coefficients in `[0, p)`. Elements are coefficient vectors in the power
//! basis `1, g, ..., g^{n-1}`. Arithmetic is driven by a ring context object,
//! so elements stay plain vectors and the hot loops avoid reference counting.

use std::fmt;

use crate::error::{Error, Result};
use crate::exact::{checked_pow, ensure_prime, inv_mod_u64};

/// Polynomials over `F_p`, coefficients low degree first.
mod fp_poly {
    pub fn trim(a: &mut Vec<u64>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut r: Vec<u64> = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut r);
        r
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = crate::exact::inv_mod_u64(m[dm], p).expect("nonzero leading coefficient");
        while r.len() > dm {
            let e = r.len() - 1;
            let c = r[e] * lead_inv % p;
            for k in 0..=dm {
                let idx = e - dm + k;
                r[idx] = (r[idx] + p - c * m[k] % p) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut r = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + x * y) % p;
            }
        }
        rem(&r, m, p)
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    /// `t^(p^k) mod m`.
    pub fn frobenius_power_of_t(m: &[u64], p: u64, k: usize) -> Vec<u64> {
        let mut cur = rem(&[0, 1], m, p);
        for _ in 0..k {
            let base = cur.clone();
            let mut acc = vec![1u64];
            let mut e = p;
            let mut sq = base;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(&acc, &sq, m, p);
                }
                sq = mulmod(&sq, &sq, m, p);
                e >>= 1;
            }
            cur = acc;
        }
        cur
    }
}

fn prime_factors(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut f = 2u128;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test for a monic polynomial over `F_p`.
pub fn is_irreducible(modulus: &[u64], p: u64) -> bool {
    let n = modulus.len() - 1;
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let t = vec![0u64, 1];
    let full = fp_poly::frobenius_power_of_t(modulus, p, n);
    if !fp_poly::sub(&full, &fp_poly::rem(&t, modulus, p), p).is_empty() {
        return false;
    }
    for r in prime_factors(n as u128) {
        let k = n / r as usize;
        let tk = fp_poly::frobenius_power_of_t(modulus, p, k);
        let g = fp_poly::gcd(modulus, &fp_poly::sub(&tk, &t, p), p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// The field `F_{p^n}`: prime, degree and a monic irreducible modulus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldDesc {
    p: u64,
    degree: usize,
    modulus: Vec<u64>,
}

impl FieldDesc {
    /// Uses the given modulus after checking it is monic and irreducible.
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self> {
        ensure_prime(p)?;
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidInput(format!(
                "modulus {modulus:?} must be monic of degree >= 1 with coefficients in [0, {p})"
            )));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::InvalidInput(format!("modulus {modulus:?} is reducible mod {p}")));
        }
        Ok(FieldDesc { p, degree: modulus.len() - 1, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Monic modulus, low degree first, length `degree + 1`.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> u128 {
        (self.p as u128).pow(self.degree as u32)
    }
}

impl fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {:?}", self.p, self.degree, self.modulus)
    }
}

/// `F_{p^degree}` with the canonical modulus: the first monic irreducible
/// polynomial when coefficient vectors are ordered lexicographically with the
/// constant term varying fastest.
pub fn make_extension(p: u64, degree: usize) -> Result<FieldDesc> {
    ensure_prime(p)?;
    if degree == 0 {
        return Err(Error::InvalidInput("extension degree must be >= 1".into()));
    }
    let mut cs = vec![0u64; degree];
    loop {
        let mut modulus = cs.clone();
        modulus.push(1);
        if is_irreducible(&modulus, p) {
            return Ok(FieldDesc { p, degree, modulus });
        }
        // odometer increment, constant term fastest
        let mut i = 0;
        loop {
            cs[i] += 1;
            if cs[i] < p {
                break;
            }
            cs[i] = 0;
            i += 1;
            if i == degree {
                unreachable!("irreducible polynomials exist in every degree");
            }
        }
    }
}

/// Element of an unramified ring `Z_{p^n}/p^N` (coefficients in `[0, p^N)`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZqElt(pub(crate) Vec<u64>);

impl ZqElt {
    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }
}

/// Element of a residue field `F_{p^n}` (coefficients in `[0, p)`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqElt(pub(crate) Vec<u64>);

impl FqElt {
    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }
}

/// Arithmetic context for `Z[t]/(p^N, G)`.
#[derive(Debug, Clone)]
pub struct ZqRing {
    desc: FieldDesc,
    prec: u32,
    modulus: u64,
    neg_g: Vec<u64>,
    small: bool,
    trace_basis: Vec<u64>,
    frob_powers: Vec<Vec<u64>>,
}

const MAX_DEGREE: usize = 48;

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

impl ZqRing {
    pub fn new(desc: &FieldDesc, prec: u32) -> Result<Self> {
        if prec == 0 {
            return Err(Error::InvalidInput("precision must be >= 1".into()));
        }
        let n = desc.degree;
        if n > MAX_DEGREE {
            return Err(Error::InvalidInput(format!("degree {n} above supported {MAX_DEGREE}")));
        }
        let modulus = checked_pow(desc.p, prec)?;
        if modulus >= 1 << 62 {
            return Err(Error::Overflow(format!("p^N = {}^{} exceeds 62 bits", desc.p, prec)));
        }
        let neg_g = desc.modulus[..n].iter().map(|&c| (modulus - c) % modulus).collect();
        let small = (modulus as u128) * (modulus as u128) * (2 * n as u128 + 2) < u64::MAX as u128;
        let mut ring = ZqRing {
            desc: desc.clone(),
            prec,
            modulus,
            neg_g,
            small,
            trace_basis: Vec::new(),
            frob_powers: Vec::new(),
        };
        ring.trace_basis = ring.compute_trace_basis();
        ring.frob_powers = ring.compute_frobenius_powers()?;
        Ok(ring)
    }

    pub fn desc(&self) -> &FieldDesc {
        &self.desc
    }

    pub fn p(&self) -> u64 {
        self.desc.p
    }

    pub fn degree(&self) -> usize {
        self.desc.degree
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// `p^N`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn zero(&self) -> ZqElt {
        ZqElt(vec![0; self.degree()])
    }

    pub fn one(&self) -> ZqElt {
        self.scalar(1)
    }

    pub fn scalar(&self, c: u64) -> ZqElt {
        let mut v = vec![0; self.degree()];
        v[0] = c % self.modulus;
        ZqElt(v)
    }

    /// The ring generator `g` (class of `t`).
    pub fn generator(&self) -> ZqElt {
        let mut v = vec![0; self.degree()];
        if self.degree() == 1 {
            v[0] = self.neg_g[0];
        } else {
            v[1] = 1;
        }
        ZqElt(v)
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<ZqElt> {
        if coeffs.len() != self.degree() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                self.degree(),
                coeffs.len()
            )));
        }
        Ok(ZqElt(coeffs.iter().map(|c| c % self.modulus).collect()))
    }

    pub fn is_zero(&self, a: &ZqElt) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &ZqElt, b: &ZqElt) -> ZqElt {
        ZqElt(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % self.modulus).collect())
    }

    pub fn sub(&self, a: &ZqElt, b: &ZqElt) -> ZqElt {
        ZqElt(a.0.iter().zip(&b.0).map(|(x, y)| (x + self.modulus - y) % self.modulus).collect())
    }

    pub fn neg(&self, a: &ZqElt) -> ZqElt {
        ZqElt(a.0.iter().map(|x| (self.modulus - x) % self.modulus).collect())
    }

    pub fn scale(&self, a: &ZqElt, c: u64) -> ZqElt {
        ZqElt(a.0.iter().map(|&x| mulmod(x, c, self.modulus)).collect())
    }

    pub fn mul(&self, a: &ZqElt, b: &ZqElt) -> ZqElt {
        let mut out = vec![0; self.degree()];
        self.mul_into(&a.0, &b.0, &mut out);
        ZqElt(out)
    }

    /// `out = a * b`; slices have length `degree`. Allocation free.
    pub fn mul_into(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let n = self.degree();
        let m = self.modulus;
        let mut buf = [0u64; 2 * MAX_DEGREE];
        let conv = &mut buf[..2 * n - 1];
        if self.small {
            for (i, &x) in a.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate() {
                    conv[i + j] += x * y;
                }
            }
            for e in (n..2 * n - 1).rev() {
                let c = conv[e] % m;
                if c == 0 {
                    continue;
                }
                for k in 0..n {
                    conv[e - n + k] += c * self.neg_g[k];
                }
            }
            for k in 0..n {
                out[k] = conv[k] % m;
            }
        } else {
            for (i, &x) in a.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate() {
                    conv[i + j] = (conv[i + j] + mulmod(x, y, m)) % m;
                }
            }
            for e in (n..2 * n - 1).rev() {
                let c = conv[e];
                if c == 0 {
                    continue;
                }
                for k in 0..n {
                    conv[e - n + k] = (conv[e - n + k] + mulmod(c, self.neg_g[k], m)) % m;
                }
            }
            out.copy_from_slice(&conv[..n]);
        }
    }

    pub fn pow(&self, a: &ZqElt, mut e: u128) -> ZqElt {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Reduction mod `p`.
    pub fn residue(&self, a: &ZqElt) -> FqElt {
        FqElt(a.0.iter().map(|c| c % self.p()).collect())
    }

    /// Any lift of a residue-field element (coefficients copied).
    pub fn naive_lift(&self, x: &FqElt) -> ZqElt {
        ZqElt(x.0.clone())
    }

    /// `y^p` applied `k` times.
    fn pow_p_iter(&self, y: &ZqElt, k: usize) -> ZqElt {
        let mut y = y.clone();
        for _ in 0..k {
            y = self.pow(&y, self.p() as u128);
        }
        y
    }

    /// The Teichmüller lift of `x`: the unique `y ≡ x mod p` with `y^Q = y`,
    /// `Q = p^n`. Any lift raised to `Q^(N-1)` is already fixed mod `p^N`.
    pub fn teichmuller(&self, x: &FqElt) -> ZqElt {
        let y = self.naive_lift(x);
        self.pow_p_iter(&y, self.degree() * (self.prec as usize - 1))
    }

    /// Same as [`ZqRing::teichmuller`] but iterates `y -> y^Q` until a fixed
    /// point; used to cross-check the closed iteration count.
    pub fn teichmuller_by_iteration(&self, x: &FqElt) -> ZqElt {
        let mut y = self.naive_lift(x);
        for _ in 0..=self.prec {
            let z = self.pow_p_iter(&y, self.degree());
            if z == y {
                return y;
            }
            y = z;
        }
        y
    }

    fn compute_trace_basis(&self) -> Vec<u64> {
        let n = self.degree();
        let mut basis = Vec::with_capacity(n);
        let mut unit = vec![0u64; n];
        unit[0] = 1;
        let mut gi = ZqElt(unit);
        let g = self.generator();
        for _ in 0..n {
            basis.push(self.trace_regular(&gi));
            gi = self.mul(&gi, &g);
        }
        basis
    }

    /// Trace of multiplication-by-`y` on the power basis.
    fn trace_regular(&self, y: &ZqElt) -> u64 {
        let n = self.degree();
        let mut acc = 0u64;
        for j in 0..n {
            let mut e = vec![0u64; n];
            e[j] = 1;
            let col = self.mul(y, &ZqElt(e));
            acc = (acc + col.0[j]) % self.modulus;
        }
        acc
    }

    /// `Tr(g^i)` for the power basis.
    pub fn trace_basis(&self) -> &[u64] {
        &self.trace_basis
    }

    /// Trace to `Z/p^N` of the regular representation (the field trace).
    pub fn trace_to_base(&self, y: &ZqElt) -> u64 {
        self.trace_slice(&y.0)
    }

    pub fn trace_slice(&self, y: &[u64]) -> u64 {
        y.iter()
            .zip(&self.trace_basis)
            .fold(0u64, |acc, (&c, &t)| (acc + mulmod(c, t, self.modulus)) % self.modulus)
    }

    /// Inverse of a unit (nonzero residue), by inversion in the residue field
    /// followed by Newton lifting.
    pub fn inverse(&self, a: &ZqElt) -> Option<ZqElt> {
        let field = FiniteField::new(&self.desc).ok()?;
        let r = field.inverse(&self.residue(a))?;
        let mut x = self.naive_lift(&r);
        let two = self.scalar(2);
        let mut correct = 1u32;
        while correct < self.prec {
            x = self.mul(&x, &self.sub(&two, &self.mul(a, &x)));
            correct *= 2;
        }
        Some(x)
    }

    fn eval_modulus(&self, r: &ZqElt) -> (ZqElt, ZqElt) {
        // Horner for G and G'
        let g = self.desc.modulus.clone();
        let n = self.degree();
        let mut val = self.scalar(g[n]);
        let mut der = self.zero();
        for k in (0..n).rev() {
            der = self.add(&self.mul(&der, r), &val);
            val = self.add(&self.mul(&val, r), &self.scalar(g[k]));
        }
        (val, der)
    }

    fn compute_frobenius_powers(&self) -> Result<Vec<Vec<u64>>> {
        let n = self.degree();
        // root of G congruent to g^p mod p
        let g = self.generator();
        let gp = self.pow(&g, self.p() as u128);
        let mut r = ZqElt(gp.0.iter().map(|c| c % self.p()).collect());
        for _ in 0..=self.prec {
            let (val, der) = self.eval_modulus(&r);
            if self.is_zero(&val) {
                break;
            }
            let inv = self.inverse(&der).ok_or_else(|| {
                Error::Hensel(format!("G'(root) is not a unit for {}", self.desc))
            })?;
            r = self.sub(&r, &self.mul(&val, &inv));
        }
        let (val, _) = self.eval_modulus(&r);
        if !self.is_zero(&val) {
            return Err(Error::Hensel(format!("no convergence for {}", self.desc)));
        }
        let mut powers = Vec::with_capacity(n);
        let mut cur = self.one();
        for _ in 0..n {
            powers.push(cur.0.clone());
            cur = self.mul(&cur, &r);
        }
        Ok(powers)
    }

    /// The Frobenius automorphism `φ`, reducing to `x -> x^p` mod `p`.
    pub fn frobenius(&self, y: &ZqElt) -> ZqElt {
        let mut out = vec![0u64; self.degree()];
        for (c, pw) in y.0.iter().zip(&self.frob_powers) {
            for (o, w) in out.iter_mut().zip(pw) {
                *o = (*o + mulmod(*c, *w, self.modulus)) % self.modulus;
            }
        }
        ZqElt(out)
    }

    pub fn frobenius_pow(&self, y: &ZqElt, k: usize) -> ZqElt {
        (0..k).fold(y.clone(), |acc, _| self.frobenius(&acc))
    }
}

/// Arithmetic context for the residue field `F_{p^n}`.
#[derive(Debug, Clone)]
pub struct FiniteField {
    desc: FieldDesc,
    neg_g: Vec<u64>,
    trace_basis: Vec<u64>,
}

impl FiniteField {
    pub fn new(desc: &FieldDesc) -> Result<Self> {
        let n = desc.degree;
        if n > MAX_DEGREE {
            return Err(Error::InvalidInput(format!("degree {n} above supported {MAX_DEGREE}")));
        }
        let p = desc.p;
        if (p as u128) * (p as u128) * (2 * n as u128 + 2) >= u64::MAX as u128 {
            return Err(Error::Overflow(format!("p = {p} too large for native residue-field arithmetic")));
        }
        let neg_g = desc.modulus[..n].iter().map(|&c| (p - c) % p).collect();
        let mut f = FiniteField { desc: desc.clone(), neg_g, trace_basis: Vec::new() };
        // trace of g^i = sum of the Frobenius conjugates; computed through
        // the regular representation for symmetry with ZqRing
        let mut basis = Vec::with_capacity(n);
        let mut gi = f.one();
        let g = f.generator();
        for _ in 0..n {
            let mut tr = 0;
            for j in 0..n {
                let mut e = vec![0u64; n];
                e[j] = 1;
                tr = (tr + f.mul(&gi, &FqElt(e)).0[j]) % p;
            }
            basis.push(tr);
            gi = f.mul(&gi, &g);
        }
        f.trace_basis = basis;
        Ok(f)
    }

    pub fn desc(&self) -> &FieldDesc {
        &self.desc
    }

    pub fn p(&self) -> u64 {
        self.desc.p
    }

    pub fn degree(&self) -> usize {
        self.desc.degree
    }

    pub fn order(&self) -> u128 {
        self.desc.order()
    }

    pub fn zero(&self) -> FqElt {
        FqElt(vec![0; self.degree()])
    }

    pub fn one(&self) -> FqElt {
        self.scalar(1)
    }

    pub fn scalar(&self, c: u64) -> FqElt {
        let mut v = vec![0; self.degree()];
        v[0] = c % self.p();
        FqElt(v)
    }

    pub fn generator(&self) -> FqElt {
        let mut v = vec![0; self.degree()];
        if self.degree() == 1 {
            v[0] = self.neg_g[0];
        } else {
            v[1] = 1;
        }
        FqElt(v)
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FqElt> {
        if coeffs.len() != self.degree() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                self.degree(),
                coeffs.len()
            )));
        }
        Ok(FqElt(coeffs.iter().map(|c| c % self.p()).collect()))
    }

    pub fn is_zero(&self, a: &FqElt) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FqElt, b: &FqElt) -> FqElt {
        FqElt(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % self.p()).collect())
    }

    pub fn sub(&self, a: &FqElt, b: &FqElt) -> FqElt {
        FqElt(a.0.iter().zip(&b.0).map(|(x, y)| (x + self.p() - y) % self.p()).collect())
    }

    pub fn scale(&self, a: &FqElt, c: u64) -> FqElt {
        FqElt(a.0.iter().map(|x| x * (c % self.p()) % self.p()).collect())
    }

    pub fn mul(&self, a: &FqElt, b: &FqElt) -> FqElt {
        let mut out = vec![0; self.degree()];
        self.mul_into(&a.0, &b.0, &mut out);
        FqElt(out)
    }

    /// `out = a * b`, allocation free.
    pub fn mul_into(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let n = self.degree();
        let p = self.p();
        let mut buf = [0u64; 2 * MAX_DEGREE];
        let conv = &mut buf[..2 * n - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                conv[i + j] += x * y;
            }
        }
        for e in (n..2 * n - 1).rev() {
            let c = conv[e] % p;
            if c == 0 {
                continue;
            }
            for k in 0..n {
                conv[e - n + k] += c * self.neg_g[k];
            }
        }
        for k in 0..n {
            out[k] = conv[k] % p;
        }
    }

    pub fn pow(&self, a: &FqElt, mut e: u128) -> FqElt {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    pub fn inverse(&self, a: &FqElt) -> Option<FqElt> {
        if self.is_zero(a) {
            return None;
        }
        if self.degree() == 1 {
            return inv_mod_u64(a.0[0], self.p()).map(|x| FqElt(vec![x]));
        }
        Some(self.pow(a, self.order() - 2))
    }

    /// Absolute trace `F_{p^n} -> F_p`.
    pub fn trace(&self, a: &FqElt) -> u64 {
        self.trace_slice(&a.0)
    }

    pub fn trace_slice(&self, a: &[u64]) -> u64 {
        a.iter().zip(&self.trace_basis).map(|(x, t)| x * t % self.p()).sum::<u64>() % self.p()
    }

    pub fn trace_basis(&self) -> &[u64] {
        &self.trace_basis
    }

    /// Element with the given rank: base-`p` digits, constant term least significant.
    pub fn from_rank(&self, mut rank: u128) -> FqElt {
        let p = self.p() as u128;
        FqElt(
            (0..self.degree())
                .map(|_| {
                    let d = (rank % p) as u64;
                    rank /= p;
                    d
                })
                .collect(),
        )
    }

    pub fn rank(&self, a: &FqElt) -> u128 {
        a.0.iter().rev().fold(0u128, |acc, &c| acc * self.p() as u128 + c as u128)
    }

    /// Nonzero elements in rank order.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = FqElt> + '_ {
        (1..self.order()).map(move |r| self.from_rank(r))
    }

    pub fn is_primitive(&self, a: &FqElt) -> bool {
        if self.is_zero(a) {
            return false;
        }
        let n = self.order() - 1;
        prime_factors(n).into_iter().all(|l| self.pow(a, n / l) != self.one())
    }

    /// First primitive element in rank order.
    pub fn first_primitive(&self) -> FqElt {
        self.nonzero_elements().find(|a| self.is_primitive(a)).expect("multiplicative group is cyclic")
    }

    /// Image of `sub`'s generator in `self`, when `sub.degree()` divides
    /// `self.degree()`: the first root (in rank order) of `sub`'s modulus.
    pub fn embedding_root(&self, sub: &FieldDesc) -> Result<FqElt> {
        if sub.p != self.p() || !self.degree().is_multiple_of(sub.degree) {
            return Err(Error::InvalidInput(format!("{sub} does not embed into {}", self.desc)));
        }
        if sub.degree == 1 {
            // generator of a prime field is the root of its linear modulus
            return Ok(self.scalar((self.p() - sub.modulus[0]) % self.p()));
        }
        (0..self.order())
            .map(|r| self.from_rank(r))
            .find(|x| {
                let mut acc = self.zero();
                for &c in sub.modulus.iter().rev() {
                    acc = self.add(&self.mul(&acc, x), &self.scalar(c));
                }
                self.is_zero(&acc)
            })
            .ok_or_else(|| Error::InvalidInput(format!("{sub} has no root in {}", self.desc)))
    }

    /// Maps an element of the subfield described by `sub` into `self`.
    pub fn embed(&self, sub: &FieldDesc, root: &FqElt, a: &[u64]) -> FqElt {
        let mut acc = self.zero();
        let mut pw = self.one();
        for (i, &c) in a.iter().enumerate() {
            acc = self.add(&acc, &self.scale(&pw, c));
            if i + 1 < sub.degree {
                pw = self.mul(&pw, root);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent scan: a monic quadratic is irreducible iff it has no root.
    fn quadratic_irreducible_by_roots(c0: u64, c1: u64, p: u64) -> bool {
        (0..p).all(|x| !(x * x + c1 * x + c0).is_multiple_of(p))
    }

    #[test]
    fn prime_field_modulus() {
        let d = make_extension(5, 1).unwrap();
        assert_eq!(d.modulus(), &[0, 1]);
        assert_eq!(make_extension(4, 1), Err(Error::NotPrime(4)));
    }

    #[test]
    fn quadratic_modulus_matches_exhaustive_scan() {
        let p = 5;
        let mut expected = None;
        'scan: for c1 in 0..p {
            for c0 in 0..p {
                if quadratic_irreducible_by_roots(c0, c1, p) {
                    expected = Some(vec![c0, c1, 1]);
                    break 'scan;
                }
            }
        }
        assert_eq!(make_extension(5, 2).unwrap().modulus(), expected.unwrap().as_slice());
        assert_eq!(make_extension(5, 2).unwrap().modulus(), &[2, 0, 1]);
    }

    #[test]
    fn quartic_over_f7() {
        let d = make_extension(7, 4).unwrap();
        assert_eq!(d.modulus(), &[1, 1, 0, 0, 1]);
        let p = 7;
        let t = vec![0u64, 1];
        for k in 1..=2 {
            let tk = fp_poly::frobenius_power_of_t(d.modulus(), p, k);
            let g = fp_poly::gcd(d.modulus(), &fp_poly::sub(&tk, &t, p), p);
            assert_eq!(g.len(), 1, "gcd(t^(7^{k}) - t, G) must be constant");
        }
    }

    #[test]
    fn rabin_agrees_with_root_scan_on_all_quadratics() {
        for p in [2u64, 3, 5, 7] {
            for c1 in 0..p {
                for c0 in 0..p {
                    assert_eq!(
                        is_irreducible(&[c0, c1, 1], p),
                        quadratic_irreducible_by_roots(c0, c1, p),
                        "p={p} c0={c0} c1={c1}"
                    );
                }
            }
        }
    }

    #[test]
    fn field_elements_satisfy_x_pow_q() {
        let f = FiniteField::new(&make_extension(3, 4).unwrap()).unwrap();
        for x in f.nonzero_elements().step_by(7) {
            assert_eq!(f.pow(&x, f.order()), x);
        }
    }

    #[test]
    fn teichmuller_examples() {
        let d = make_extension(5, 1).unwrap();
        let f = FiniteField::new(&d).unwrap();
        let r = ZqRing::new(&d, 2).unwrap();
        let t = r.teichmuller(&f.scalar(2));
        assert_eq!(t.coeffs(), &[7]);
        assert_eq!(r.pow(&t, 4), r.one());
        assert_eq!(r.teichmuller(&f.one()), r.one());
        assert_eq!(r.teichmuller(&f.zero()), r.zero());
        assert_eq!(r.teichmuller_by_iteration(&f.scalar(2)), t);
    }

    #[test]
    fn teichmuller_is_multiplicative_and_fixed() {
        let d = make_extension(5, 3).unwrap();
        let f = FiniteField::new(&d).unwrap();
        let r = ZqRing::new(&d, 3).unwrap();
        let elems: Vec<_> = f.nonzero_elements().step_by(11).collect();
        for x in &elems {
            let tx = r.teichmuller(x);
            assert_eq!(r.pow(&tx, f.order()), tx);
            assert_eq!(r.residue(&tx), *x);
            assert_eq!(r.teichmuller_by_iteration(x), tx);
        }
        for w in elems.windows(2) {
            let lhs = r.mul(&r.teichmuller(&w[0]), &r.teichmuller(&w[1]));
            assert_eq!(lhs, r.teichmuller(&f.mul(&w[0], &w[1])));
        }
    }

    #[test]
    fn trace_examples() {
        let d = make_extension(7, 3).unwrap();
        let r = ZqRing::new(&d, 2).unwrap();
        assert_eq!(r.trace_to_base(&r.one()), 3);
        assert_eq!(r.trace_to_base(&r.scalar(5)), 15);
        // companion matrix trace: -(coefficient of t^{n-1})
        let expect = (49 - d.modulus()[2]) % 49;
        assert_eq!(r.trace_to_base(&r.generator()), expect);
    }

    #[test]
    fn trace_is_linear_and_galois_invariant() {
        let d = make_extension(5, 4).unwrap();
        let r = ZqRing::new(&d, 3).unwrap();
        let m = r.modulus();
        let f = FiniteField::new(&d).unwrap();
        let samples: Vec<ZqElt> = (0..40u64)
            .map(|s| r.from_coeffs(&[s * 7 + 1, s * s % m, (s * 31 + 3) % m, s * 101 % m]).unwrap())
            .collect();
        for w in samples.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            assert_eq!(r.trace_to_base(&r.frobenius(a)), r.trace_to_base(a));
            assert_eq!(
                r.trace_to_base(&r.add(a, b)),
                (r.trace_to_base(a) + r.trace_to_base(b)) % m
            );
            assert_eq!(r.trace_to_base(&r.scale(a, 17)), r.trace_to_base(a) * 17 % m);
        }
        // residue-field trace agrees with the ring trace mod p
        for x in f.nonzero_elements().step_by(13) {
            assert_eq!(f.trace(&x), r.trace_to_base(&r.naive_lift(&x)) % 5);
        }
    }

    #[test]
    fn frobenius_examples() {
        let d1 = make_extension(5, 1).unwrap();
        let r1 = ZqRing::new(&d1, 4).unwrap();
        let y = r1.scalar(123);
        assert_eq!(r1.frobenius(&y), y);

        let d = make_extension(5, 2).unwrap();
        let f = FiniteField::new(&d).unwrap();
        let r = ZqRing::new(&d, 2).unwrap();
        for x in f.nonzero_elements() {
            // Teichmüller lift of x maps to the Teichmüller lift of x^p
            let lhs = r.frobenius(&r.teichmuller(&x));
            let rhs = r.teichmuller(&f.pow(&x, 5));
            assert_eq!(lhs, rhs);
        }
        let r3 = ZqRing::new(&make_extension(3, 5).unwrap(), 3).unwrap();
        for s in 0..20u64 {
            let y = r3.from_coeffs(&[s, s * 3 + 1, 7, s * s, 26 - s]).unwrap();
            assert_eq!(r3.frobenius_pow(&y, 5), y);
            // ring homomorphism
            let z = r3.from_coeffs(&[1, s, 2, 0, s + 4]).unwrap();
            assert_eq!(r3.frobenius(&r3.mul(&y, &z)), r3.mul(&r3.frobenius(&y), &r3.frobenius(&z)));
        }
    }

    #[test]
    fn unit_inverse() {
        let r = ZqRing::new(&make_extension(7, 3).unwrap(), 5).unwrap();
        let a = r.from_coeffs(&[3, 14, 700]).unwrap();
        let inv = r.inverse(&a).unwrap();
        assert_eq!(r.mul(&a, &inv), r.one());
        assert!(r.inverse(&r.scalar(7)).is_none());
    }

    #[test]
    fn embedding_is_a_field_map() {
        let sub = make_extension(5, 2).unwrap();
        let fsub = FiniteField::new(&sub).unwrap();
        let big = FiniteField::new(&make_extension(5, 6).unwrap()).unwrap();
        let root = big.embedding_root(&sub).unwrap();
        for a in fsub.nonzero_elements().step_by(3) {
            let b = fsub.mul(&a, &fsub.generator());
            let ea = big.embed(&sub, &root, a.coeffs());
            let eb = big.embed(&sub, &root, b.coeffs());
            assert_eq!(big.mul(&ea, &root), eb);
            // image lies in F_25: fixed by x -> x^25
            assert_eq!(big.pow(&ea, 25), ea);
        }
    }

    #[test]
    fn rank_round_trip_and_primitive() {
        let f = FiniteField::new(&make_extension(5, 2).unwrap()).unwrap();
        for r in 0..25 {
            assert_eq!(f.rank(&f.from_rank(r)), r);
        }
        let g = f.first_primitive();
        let mut seen = std::collections::HashSet::new();
        let mut x = f.one();
        for _ in 0..24 {
            seen.insert(x.clone());
            x = f.mul(&x, &g);
        }
        assert_eq!(seen.len(), 24);
    }
}
