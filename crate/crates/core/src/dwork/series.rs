//! The Artin–Hasse exponential, its root `γ` and the splitting coefficients
//! `γ_m` of `θ(t) = E(γt)`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::eisenstein::{EisensteinElt, EisensteinRing, Reading};
use crate::error::{Error, Result};
use crate::exact::{rat, vp_rational, BigRational, ValuationQ};

/// `e_0..e_count` with `E(t) = exp(Σ_m t^{p^m}/p^m) = Σ e_n t^n`, from
/// `n e_n = Σ_{p^m <= n} e_{n - p^m}`. Each `e_n` is checked p-integral.
pub fn artin_hasse_coeffs(p: u64, count: usize) -> Result<Vec<BigRational>> {
    let mut e = vec![BigRational::one()];
    for n in 1..=count {
        let mut acc = BigRational::zero();
        let mut pm = 1usize;
        while pm <= n {
            acc += &e[n - pm];
            pm = match pm.checked_mul(p as usize) {
                Some(x) => x,
                None => break,
            };
        }
        let en = acc / BigRational::from_integer(BigInt::from(n));
        if let ValuationQ::Finite(v) = vp_rational(&en, p)? {
            if v < BigRational::zero() {
                return Err(Error::Integrality(format!("e_{n} = {en} is not {p}-integral")));
            }
        }
        e.push(en);
    }
    Ok(e)
}

/// The terms `(-1)^{e_m} p^{e_m - m}` (mod `p^K`) with exponents `p^m`,
/// `m >= 2`, `e_m = (p^m - 1)/(p - 1)`, that survive at precision `K`.
fn tail_terms(p: u64, k: u32) -> Vec<(i64, i64, u128)> {
    let mut out = Vec::new();
    for m in 2u32.. {
        let pm = match (p as u128).checked_pow(m) {
            Some(x) => x,
            None => break,
        };
        let em = (pm - 1) / (p as u128 - 1);
        if em - m as u128 >= k as u128 {
            break;
        }
        let sign = if em.is_multiple_of(2) { 1 } else { -1 };
        let pw = (p as i64).pow((em - m as u128) as u32);
        let full = if em >= k as u128 { 0 } else { (p as i64).pow(em as u32) };
        out.push((sign * pw, sign * full, pm));
    }
    out
}

/// With `γ = π u` the equation `Σ_m γ^{p^m}/p^m = 0` becomes
/// `G(u) = u - u^p + Σ_{m>=2} (-1)^{e_m} p^{e_m - m} u^{p^m} = 0`,
/// using `π^{p^m} = π (-p)^{e_m}`. Returns `(G(u), G'(u))`.
fn g_and_derivative(ring: &EisensteinRing, u: &EisensteinElt, tail: &[(i64, i64, u128)]) -> (EisensteinElt, EisensteinElt) {
    let p = ring.p();
    let up1 = ring.pow(u, (p - 1) as u128);
    let up = ring.mul(&up1, u);
    let mut g = ring.sub(u, &up);
    let mut dg = ring.sub(&ring.one(), &ring.scale_int(&up1, p as i64));
    for &(c, dc, pm) in tail {
        let upm1 = ring.pow(u, pm - 1);
        ring.add_assign(&mut g, &ring.scale_int(&ring.mul(&upm1, u), c));
        ring.add_assign(&mut dg, &ring.scale_int(&upm1, dc));
    }
    (g, dg)
}

/// Dwork's `γ`: the root of `Σ_m t^{p^m}/p^m` with `v(γ) = 1/(p-1)` on the
/// branch `γ/π ≡ 1 (mod π)`, by Newton iteration on `u = γ/π`.
pub fn solve_gamma(ring: &EisensteinRing) -> Result<EisensteinElt> {
    let tail = tail_terms(ring.p(), ring.p_precision());
    let mut u = ring.one();
    for _ in 0..64 {
        let (g, dg) = g_and_derivative(ring, &u, &tail);
        if ring.is_zero(&g) {
            return Ok(ring.mul(&ring.pi(), &u));
        }
        u = ring.sub(&u, &ring.mul(&g, &ring.inverse_unit(&dg)?));
    }
    Err(Error::Hensel("Newton iteration for γ did not converge".into()))
}

/// `Σ_m γ^{p^m}/p^m` summed directly, dividing by `p^m = (-π^{p-1})^m`
/// digit by digit. Each division forgets one leading π-digit, so the
/// reading is cut off accordingly.
pub fn gamma_residual(ring: &EisensteinRing, gamma: &EisensteinElt) -> Result<Reading> {
    let p = ring.p() as u128;
    let e = ring.e() as i64;
    let k = ring.p_precision() as i64;
    let mut sum = ring.zero();
    let mut lost = 0i64;
    let mut pm = 1u128;
    for m in 0i64.. {
        // v(γ^{p^m}/p^m) = p^m/(p-1) - m
        if pm as i128 - (m * e) as i128 >= (k * e) as i128 {
            break;
        }
        let mut t = ring.pow(gamma, pm);
        for _ in 0..m * e {
            t = ring.div_pi(&t)?;
        }
        if m % 2 == 1 {
            t = ring.neg(&t);
        }
        ring.add_assign(&mut sum, &t);
        lost = lost.max(m * e);
        pm *= p;
    }
    let usable = k * e - lost - ring.guard() as i64;
    if usable <= 0 {
        return Err(Error::Precision("too few π-digits to check the equation for γ".into()));
    }
    Ok(ring.reading_below(&sum, &rat(usable, e)))
}

/// The independent check on `γ`: `T = E(γ) = Σ e_n γ^n` is a nontrivial
/// p-th root of unity, so `v(T - 1) = 1/(p-1)` and `T^p = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThetaCheck {
    pub v_t_minus_one: String,
    pub t_pow_p_is_one: bool,
    pub pass: bool,
}

pub fn theta_at_one(ring: &EisensteinRing, gamma: &EisensteinElt, e: &[BigRational]) -> Result<ThetaCheck> {
    let terms = ring.pi_digits() as usize;
    if e.len() <= terms {
        return Err(Error::InvalidInput(format!("need {} Artin–Hasse coefficients", terms + 1)));
    }
    let mut t = ring.zero();
    let mut gn = ring.one();
    for en in &e[..=terms] {
        ring.add_assign(&mut t, &ring.mul(&ring.from_rational(en)?, &gn));
        gn = ring.mul(&gn, gamma);
    }
    let one = ring.one();
    let v = ring.reading(&ring.sub(&t, &one));
    let tp = ring.pow(&t, ring.p() as u128);
    let root = matches!(ring.reading(&ring.sub(&tp, &one)), Reading::AtLeast(_));
    let pass = root && v == Reading::Exact(rat(1, ring.e() as i64));
    Ok(ThetaCheck { v_t_minus_one: v.to_string(), t_pow_p_is_one: root, pass })
}

/// `γ_m = e_m γ^m` for `m = 0..=count`, each checked against
/// `v(γ_m) >= m/(p-1)`.
pub fn splitting_coeffs(ring: &EisensteinRing, gamma: &EisensteinElt, e: &[BigRational], count: usize) -> Result<Vec<EisensteinElt>> {
    if e.len() <= count {
        return Err(Error::InvalidInput(format!("need {} Artin–Hasse coefficients", count + 1)));
    }
    let mut out = Vec::with_capacity(count + 1);
    let mut gm = ring.one();
    for (m, em) in e[..=count].iter().enumerate() {
        let c = ring.mul(&ring.from_rational(em)?, &gm);
        let bound = rat(m as i64, ring.e() as i64);
        if let Reading::Exact(v) = ring.reading(&c) {
            if v < bound {
                return Err(Error::Integrality(format!("v(γ_{m}) = {v} < {bound}")));
            }
        }
        out.push(c);
        gm = ring.mul(&gm, gamma);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{factorial, rat_int};
    use crate::finite::make_extension;

    fn ring(p: u64, digits: u32) -> EisensteinRing {
        EisensteinRing::new(&make_extension(p, 1).unwrap(), digits, 6).unwrap()
    }

    #[test]
    fn artin_hasse_examples() {
        let e5 = artin_hasse_coeffs(5, 6).unwrap();
        assert_eq!(e5[0], rat_int(1));
        assert_eq!(e5[1], rat_int(1));
        assert_eq!(e5[2], rat(1, 2));
        // below p the series agrees with exp
        for (n, en) in e5.iter().enumerate().take(5) {
            assert_eq!(*en, BigRational::new(BigInt::one(), factorial(n as u32)));
        }
        // e_5 = 1/5! + 1/5
        assert_eq!(e5[5], rat(1, 120) + rat(1, 5));
        let e2 = artin_hasse_coeffs(2, 4).unwrap();
        assert_eq!(e2[2], rat_int(1));
    }

    #[test]
    fn artin_hasse_matches_series_exponential() {
        // exp of Σ t^{p^m}/p^m through f' = f·(log f)'
        for p in [2u64, 3, 5, 7] {
            let n = 30;
            let e = artin_hasse_coeffs(p, n).unwrap();
            let mut log = vec![BigRational::zero(); n + 1];
            let mut pm = 1usize;
            while pm <= n {
                log[pm] = rat(1, pm as i64);
                pm *= p as usize;
            }
            let mut f = vec![BigRational::zero(); n + 1];
            f[0] = BigRational::one();
            for k in 1..=n {
                let mut acc = BigRational::zero();
                for j in 1..=k {
                    acc += &log[j] * rat_int(j as i64) * &f[k - j];
                }
                f[k] = acc / rat_int(k as i64);
            }
            assert_eq!(e, f);
        }
    }

    #[test]
    fn gamma_properties() {
        for (p, digits) in [(3u64, 20), (5, 20), (7, 30), (19, 126)] {
            let r = ring(p, digits);
            let g = solve_gamma(&r).unwrap();
            assert_eq!(r.valuation(&g), ValuationQ::Finite(rat(1, p as i64 - 1)));
            assert!(matches!(gamma_residual(&r, &g).unwrap(), Reading::AtLeast(_)));
            // branch: γ/π ≡ 1 mod π
            assert_eq!(r.coeff(&g, 1).coeffs()[0] % p, 1);
            let e = artin_hasse_coeffs(p, r.pi_digits() as usize).unwrap();
            let theta = theta_at_one(&r, &g, &e).unwrap();
            assert!(theta.pass, "{theta:?}");
        }
    }

    #[test]
    fn wrong_root_fails_theta_check() {
        let r = ring(5, 20);
        let e = artin_hasse_coeffs(5, 20).unwrap();
        let g = solve_gamma(&r).unwrap();
        assert!(theta_at_one(&r, &g, &e).unwrap().pass);
        // a perturbation of size p·π is still a uniformizer but not a root
        let bad = r.add(&g, &r.scale_int(&r.pi(), 5));
        let theta = theta_at_one(&r, &bad, &e).unwrap();
        assert!(!theta.t_pow_p_is_one);
        assert!(!theta.pass);
        assert!(!matches!(gamma_residual(&r, &bad).unwrap(), Reading::AtLeast(_)));
    }

    #[test]
    fn splitting_coefficients() {
        let r = ring(5, 24);
        let g = solve_gamma(&r).unwrap();
        let e = artin_hasse_coeffs(5, 12).unwrap();
        let gm = splitting_coeffs(&r, &g, &e, 12).unwrap();
        assert_eq!(gm[0], r.one());
        assert_eq!(gm[1], g);
        for m in 0..5u32 {
            let lhs = r.scale_int(&gm[m as usize], factorial(m).try_into().unwrap());
            assert_eq!(lhs, r.pow(&g, m as u128));
        }
        // v(γ_5) >= 5/4
        assert!(r.reading(&gm[5]).at_least(&rat(5, 4)));
    }
}
