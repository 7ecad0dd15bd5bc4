//! Exact check of the determinant lemma behind the slope formula: the matrix
//! `M(s) = (a^{i+j} / ((ki-i-j)! (i+j)!))` with `p = dk - 1` has a p-adic
//! unit determinant, through an explicit chain of factorizations.
//!
//! Indices `i, j, t` below run over `1..=s` as in the mathematical statement;
//! storage is 0-based.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{ensure_prime, falling_factorial, factorial, reciprocal_factorial, vp_rational, BigRational, ValuationQ};
use crate::linalg::{rational_det, rational_matmul};

pub type RationalMatrix = Vec<Vec<BigRational>>;

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ff(x: i64, n: i64) -> BigRational {
    if n < 0 {
        return BigRational::zero();
    }
    BigRational::from_integer(falling_factorial(&BigInt::from(x), n as u32))
}

/// Validated lemma parameters: `p ≡ -1 (mod d)`, `k = (p+1)/d`,
/// `1 <= s <= d-1`, `gcd(a, p) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LemmaParams {
    pub d: u32,
    pub p: u64,
    pub a: i64,
    pub s: usize,
    pub k: i64,
}

impl LemmaParams {
    pub fn new(d: u32, p: u64, a: i64, s: usize) -> Result<Self> {
        ensure_prime(p)?;
        if d < 2 || !(p + 1).is_multiple_of(d as u64) {
            return Err(Error::InvalidInput(format!("need p ≡ -1 mod d, got p = {p}, d = {d}")));
        }
        if p + 1 < 2 * d as u64 {
            return Err(Error::InvalidInput(format!("need k = (p+1)/d >= 2, got p = {p}, d = {d}")));
        }
        if s < 1 || s > d as usize - 1 {
            return Err(Error::InvalidInput(format!("need 1 <= s <= d-1, got s = {s}")));
        }
        if a.rem_euclid(p as i64) == 0 {
            return Err(Error::InvalidInput(format!("a = {a} is not prime to p = {p}")));
        }
        Ok(LemmaParams { d, p, a, s, k: ((p + 1) / d as u64) as i64 })
    }
}

/// `M(s)`; entries with `ki - i - j < 0` are zero.
pub fn build_m(params: &LemmaParams) -> RationalMatrix {
    let LemmaParams { a, s, k, .. } = *params;
    let a = int(a);
    (1..=s as i64)
        .map(|i| {
            (1..=s as i64)
                .map(|j| {
                    let pw = num_traits::pow(a.clone(), (i + j) as usize);
                    pw * reciprocal_factorial(k * i - i - j) * reciprocal_factorial(i + j)
                })
                .collect()
        })
        .collect()
}

/// Exact determinant and its p-adic valuation.
pub fn det_and_valuation(m: &RationalMatrix, p: u64) -> Result<(BigRational, ValuationQ)> {
    let det = rational_det(m.clone());
    let v = vp_rational(&det, p)?;
    Ok((det, v))
}

/// `c_0(j) = ((1-k)j - 1)[j-1]`.
pub fn c0(k: i64, j: i64) -> BigRational {
    ff((1 - k) * j - 1, j - 1)
}

/// `a^{s(s+1)} (-1)^{⌊s/2⌋} Π_i i^{s-i} c_0(i) / ((ki-i-1)! (i+s)!)`.
pub fn closed_form_det(params: &LemmaParams) -> BigRational {
    let LemmaParams { a, s, k, .. } = *params;
    let s = s as i64;
    let mut acc = num_traits::pow(int(a), (s * (s + 1)) as usize);
    if (s / 2) % 2 == 1 {
        acc = -acc;
    }
    for i in 1..=s {
        let num = num_traits::pow(int(i), (s - i) as usize) * c0(k, i);
        let den = BigRational::from_integer(factorial((k * i - i - 1) as u32) * factorial((i + s) as u32));
        acc = acc * num / den;
    }
    acc
}

/// Coefficients `c_t(j)`, `t = 0..j-1`, of `((k-1)x - 1)[j-1]` in the basis
/// `(x+j)[t]`, solved at the sample points `x = -j + r`, where
/// `(x+j)[t] = r[t]` makes the system lower triangular.
pub fn basis_coeffs(k: i64, j: i64) -> Vec<BigRational> {
    let n = j as usize;
    let mut c: Vec<BigRational> = Vec::with_capacity(n);
    for r in 0..n as i64 {
        let x = -j + r;
        let target = ff((k - 1) * x - 1, j - 1);
        let known = (0..r as usize).fold(BigRational::zero(), |acc, t| acc + &c[t] * ff(r, t as i64));
        // diagonal entry r[r] = r!
        let diag = ff(r, r);
        c.push((target - known) / diag);
    }
    c
}

/// Coefficients of `x[n] = Σ_t c'_t(n) x^t` (signed Stirling numbers of the
/// first kind), `t = 0..=n`.
pub fn falling_factorial_coeffs(n: usize) -> Vec<BigRational> {
    let mut poly = vec![BigInt::one()];
    for m in 0..n as i64 {
        // multiply by (x - m)
        let mut next = vec![BigInt::zero(); poly.len() + 1];
        for (t, c) in poly.iter().enumerate() {
            next[t + 1] += c;
            next[t] -= c * BigInt::from(m);
        }
        poly = next;
    }
    poly.into_iter().map(BigRational::from_integer).collect()
}

/// The matrices of the factorization chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub m: RationalMatrix,
    pub m_prime: RationalMatrix,
    pub m_dd: RationalMatrix,
    pub m1: RationalMatrix,
    pub m2: RationalMatrix,
    pub m11: RationalMatrix,
    pub m12: RationalMatrix,
    pub diag: RationalMatrix,
}

pub fn factorization(params: &LemmaParams) -> Factorization {
    let LemmaParams { a, s, k, .. } = *params;
    let si = s as i64;
    let idx = || 1..=si;
    let m = build_m(params);
    let one = LemmaParams { a: 1, ..*params };
    let m_prime = build_m(&one);
    let diag: RationalMatrix = idx()
        .map(|i| idx().map(|j| if i == j { num_traits::pow(int(a), i as usize) } else { BigRational::zero() }).collect())
        .collect();
    let m_dd: RationalMatrix = idx()
        .map(|i| {
            let scale = BigRational::from_integer(factorial((k * i - i - 1) as u32) * factorial((i + si) as u32));
            idx().map(|j| &m_prime[(i - 1) as usize][(j - 1) as usize] * &scale).collect()
        })
        .collect();
    let m1: RationalMatrix = idx().map(|i| idx().map(|t| ff(i + si, si - t)).collect()).collect();
    let cs: Vec<Vec<BigRational>> = idx().map(|j| basis_coeffs(k, j)).collect();
    let m2: RationalMatrix = idx()
        .map(|t| {
            idx()
                .map(|j| if j < t { BigRational::zero() } else { cs[(j - 1) as usize][(j - t) as usize].clone() })
                .collect()
        })
        .collect();
    let m11: RationalMatrix = idx().map(|i| idx().map(|t| num_traits::pow(int(i + si), (t - 1) as usize)).collect()).collect();
    let m12: RationalMatrix = idx()
        .map(|t| {
            idx()
                .map(|j| {
                    let n = (si - j) as usize;
                    falling_factorial_coeffs(n).get((t - 1) as usize).cloned().unwrap_or_else(BigRational::zero)
                })
                .collect()
        })
        .collect();
    Factorization { m, m_prime, m_dd, m1, m2, m11, m12, diag }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationReport {
    pub params: LemmaParams,
    pub det: BigRational,
    pub det_valuation: ValuationQ,
    pub closed_form: BigRational,
    pub checks: Vec<IdentityCheck>,
}

impl FactorizationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn first_difference(a: &RationalMatrix, b: &RationalMatrix) -> Option<String> {
    for (i, (ra, rb)) in a.iter().zip(b).enumerate() {
        for (j, (x, y)) in ra.iter().zip(rb).enumerate() {
            if x != y {
                return Some(format!("entry ({}, {}): {x} vs {y}", i + 1, j + 1));
            }
        }
    }
    None
}

fn matrix_check(name: &str, lhs: &RationalMatrix, rhs: &RationalMatrix) -> IdentityCheck {
    match first_difference(lhs, rhs) {
        None => IdentityCheck { name: name.into(), pass: true, detail: "exact".into() },
        Some(d) => IdentityCheck { name: name.into(), pass: false, detail: d },
    }
}

fn value_check(name: &str, got: BigRational, want: BigRational) -> IdentityCheck {
    IdentityCheck { name: name.into(), pass: got == want, detail: format!("{got} vs {want}") }
}

/// Runs every identity of the factorization chain exactly.
pub fn verify_factorizations(params: &LemmaParams) -> Result<FactorizationReport> {
    let f = factorization(params);
    let s = params.s as i64;
    let k = params.k;
    let (det, det_valuation) = det_and_valuation(&f.m, params.p)?;
    let closed_form = closed_form_det(params);
    let mut checks = Vec::new();
    checks.push(value_check("det M(s) = closed form", det.clone(), closed_form.clone()));
    checks.push(IdentityCheck {
        name: "v_p(det M(s)) = 0".into(),
        pass: det_valuation == ValuationQ::zero(),
        detail: format!("v = {det_valuation}"),
    });
    let dmd = rational_matmul(&rational_matmul(&f.diag, &f.m_prime), &f.diag);
    checks.push(matrix_check("M(s) = D M' D", &f.m, &dmd));
    checks.push(matrix_check("M'' = M1 M2", &f.m_dd, &rational_matmul(&f.m1, &f.m2)));
    checks.push(matrix_check("M1 = M11 M12", &f.m1, &rational_matmul(&f.m11, &f.m12)));
    let sign = if (s / 2) % 2 == 1 { int(-1) } else { int(1) };
    checks.push(value_check("det M12 = (-1)^[s/2]", rational_det(f.m12.clone()), sign));
    let prod_c0 = (1..=s).fold(BigRational::one(), |acc, i| acc * c0(k, i));
    checks.push(value_check("det M2 = Π c_0(i)", rational_det(f.m2.clone()), prod_c0));
    let vdm = (1..=s).fold(BigRational::one(), |acc, t| acc * num_traits::pow(int(t), (s - t) as usize));
    checks.push(value_check("det M11 = Π t^(s-t)", rational_det(f.m11.clone()), vdm));
    for j in 1..=s {
        let v = vp_rational(&c0(k, j), params.p)?;
        checks.push(IdentityCheck {
            name: format!("v_p(c_0({j})) = 0"),
            pass: v == ValuationQ::zero(),
            detail: format!("c_0({j}) = {}", c0(k, j)),
        });
    }
    Ok(FactorizationReport { params: *params, det, det_valuation, closed_form, checks })
}

/// Re-evaluates `c_0(j) + Σ c_t(j) (x+j)[t]` against `((k-1)x-1)[j-1]` at
/// `x = 0..=upto`.
pub fn basis_solve_consistent(k: i64, j: i64, upto: i64) -> bool {
    let c = basis_coeffs(k, j);
    (0..=upto).all(|x| {
        let lhs = c.iter().enumerate().fold(BigRational::zero(), |acc, (t, ct)| acc + ct * ff(x + j, t as i64));
        lhs == ff((k - 1) * x - 1, j - 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn m_examples() {
        let p1 = LemmaParams::new(3, 5, 1, 1).unwrap();
        assert_eq!(build_m(&p1), vec![vec![rat(1, 2)]]);
        let p2 = LemmaParams::new(3, 5, 1, 2).unwrap();
        assert_eq!(build_m(&p2), vec![vec![rat(1, 2), rat(0, 1)], vec![rat(1, 6), rat(1, 24)]]);
        let (det, v) = det_and_valuation(&build_m(&p2), 5).unwrap();
        assert_eq!(det, rat(1, 48));
        assert_eq!(v, ValuationQ::zero());
    }

    #[test]
    fn single_entry_determinant() {
        for (d, p, a) in [(3u32, 5u64, 2i64), (4, 7, 3), (5, 19, 2)] {
            let prm = LemmaParams::new(d, p, a, 1).unwrap();
            let k = prm.k;
            let want = rat(a * a, 1) * reciprocal_factorial(k - 2) * rat(1, 2);
            let (det, v) = det_and_valuation(&build_m(&prm), p).unwrap();
            assert_eq!(det, want);
            assert_eq!(v, ValuationQ::zero());
        }
    }

    #[test]
    fn four_by_four_at_nineteen() {
        let prm = LemmaParams::new(5, 19, 1, 4).unwrap();
        let (det, v) = det_and_valuation(&build_m(&prm), 19).unwrap();
        assert_eq!(v, ValuationQ::zero());
        assert_eq!(det, closed_form_det(&prm));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(c0(2, 1), rat(1, 1));
        assert_eq!(c0(2, 2), rat(-3, 1));
        let prm = LemmaParams::new(3, 5, 1, 2).unwrap();
        assert_eq!(closed_form_det(&prm), rat(1, 48));
    }

    #[test]
    fn factorization_examples() {
        let prm = LemmaParams::new(3, 5, 1, 2).unwrap();
        let f = factorization(&prm);
        assert_eq!(rational_det(f.m11.clone()), rat(1, 1));
        assert_eq!(rational_det(f.m12.clone()), rat(-1, 1));
        assert_eq!(rational_det(f.m2.clone()), rat(-3, 1));
        let report = verify_factorizations(&prm).unwrap();
        assert!(report.all_pass(), "{:?}", report.checks);
    }

    #[test]
    fn stirling_coefficients() {
        // x[3] = x^3 - 3x^2 + 2x
        assert_eq!(falling_factorial_coeffs(3), vec![rat(0, 1), rat(2, 1), rat(-3, 1), rat(1, 1)]);
        assert_eq!(falling_factorial_coeffs(0), vec![rat(1, 1)]);
    }

    #[test]
    fn basis_solve_reproduces_targets() {
        for k in 2..6 {
            for j in 1..7 {
                assert!(basis_solve_consistent(k, j, 8), "k={k} j={j}");
                assert_eq!(basis_coeffs(k, j)[0], c0(k, j));
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LemmaParams::new(3, 7, 1, 1).is_err());
        assert!(LemmaParams::new(3, 5, 1, 3).is_err());
        assert!(LemmaParams::new(3, 5, 10, 1).is_err());
        assert_eq!(LemmaParams::new(3, 9, 1, 1), Err(Error::NotPrime(9)));
    }

    #[test]
    fn scaling_by_a() {
        let prm = LemmaParams::new(4, 11, 2, 3).unwrap();
        let f = factorization(&prm);
        let dmd = rational_matmul(&rational_matmul(&f.diag, &f.m_prime), &f.diag);
        assert_eq!(f.m, dmd);
    }
}
