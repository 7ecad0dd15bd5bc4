//! Brute-force exponential sums `S*_m(f, χ)` and the L-polynomial they
//! generate, for `f(x) = x^d + a x^{d-1}` over `F_q`.

use num_bigint::BigInt;

use crate::cyclotomic::{cyclo_valuation, CyclotomicInt};
use crate::error::{Error, Result};
use crate::exact::{ensure_prime, ValuationQ};
use crate::finite::{make_extension, FieldDesc, FiniteField, FqElt, ZqRing};
use crate::parallel::Workers;

/// Default cap on the number of field elements enumerated for one `S_m`.
pub const DEFAULT_ENUMERATION_CAP: u128 = 200_000_000;

/// The curve `x^d + a x^{d-1}` over `F_q`, `q = p^h`, with a character of
/// order `p^M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveConfig {
    p: u64,
    h: usize,
    d: u32,
    level: u32,
    field: FieldDesc,
    a: Vec<u64>,
}

impl CurveConfig {
    /// `a` is given by its coordinates in the canonical basis of `F_q`.
    pub fn new(p: u64, h: usize, d: u32, a: &[u64], level: u32) -> Result<Self> {
        ensure_prime(p)?;
        if h == 0 {
            return Err(Error::InvalidInput("h must be >= 1".into()));
        }
        if d < 2 {
            return Err(Error::InvalidInput("d must be >= 2".into()));
        }
        if (d as u64).is_multiple_of(p) {
            return Err(Error::InvalidInput(format!("p = {p} divides d = {d}")));
        }
        if level == 0 {
            return Err(Error::InvalidInput("character level M must be >= 1".into()));
        }
        if a.len() != h {
            return Err(Error::InvalidInput(format!("a needs {h} coordinates, got {}", a.len())));
        }
        let a: Vec<u64> = a.iter().map(|c| c % p).collect();
        if a.iter().all(|&c| c == 0) {
            return Err(Error::InvalidInput("a must be nonzero".into()));
        }
        let field = make_extension(p, h)?;
        Ok(CurveConfig { p, h, d, level, field, a })
    }

    /// Convenience for prime fields.
    pub fn prime_field(p: u64, d: u32, a: u64, level: u32) -> Result<Self> {
        Self::new(p, 1, d, &[a], level)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn a(&self) -> &[u64] {
        &self.a
    }

    /// `p^{M-1} d`.
    pub fn l_degree(&self) -> usize {
        (self.p.pow(self.level - 1) * self.d as u64) as usize
    }

    /// `F_{q^m}` together with the image of `a` in it.
    fn extension(&self, m: u32) -> Result<(FiniteField, FqElt)> {
        let big = FiniteField::new(&make_extension(self.p, self.h * m as usize)?)?;
        let root = big.embedding_root(&self.field)?;
        let a = big.embed(&self.field, &root, &self.a);
        Ok((big, a))
    }
}

/// Enumeration settings for the brute-force route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumOptions {
    pub cap: u128,
    pub workers: Workers,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { cap: DEFAULT_ENUMERATION_CAP, workers: Workers::single() }
    }
}

fn check_budget(field: &FiniteField, m: u32, cap: u128) -> Result<()> {
    let elements = field.order() - 1;
    if elements > cap {
        return Err(Error::Budget { m, elements, cap });
    }
    Ok(())
}

fn add_histograms(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Walks ranks `range` as base-`p` digit vectors without re-deriving each one.
fn for_each_in_range(p: u64, n: usize, range: std::ops::Range<u128>, mut f: impl FnMut(&[u64])) {
    let mut digits = vec![0u64; n];
    let mut r = range.start;
    for d in digits.iter_mut() {
        *d = (r % p as u128) as u64;
        r /= p as u128;
    }
    for _ in range {
        f(&digits);
        for d in digits.iter_mut() {
            *d += 1;
            if *d < p {
                break;
            }
            *d = 0;
        }
    }
}

/// `S*_m(f, χ)`. For `M = 1` the Teichmüller lift mod `p` is the residue
/// itself, so the sum runs in pure residue-field arithmetic; otherwise the
/// full Teichmüller pipeline at precision `M` is used.
pub fn exp_sum(cfg: &CurveConfig, m: u32, opts: &EnumOptions) -> Result<CyclotomicInt> {
    if cfg.level == 1 {
        exp_sum_residue(cfg, m, opts)
    } else {
        exp_sum_teichmuller(cfg, m, opts)
    }
}

fn exp_sum_residue(cfg: &CurveConfig, m: u32, opts: &EnumOptions) -> Result<CyclotomicInt> {
    let (field, a) = cfg.extension(m)?;
    check_budget(&field, m, opts.cap)?;
    let n = field.degree();
    let p = cfg.p;
    let d = cfg.d;
    let hist = opts.workers.map_reduce(
        1..field.order(),
        |range| {
            let mut hist = vec![0u64; p as usize];
            let mut y = vec![0u64; n];
            let mut z = vec![0u64; n];
            let mut ay = vec![0u64; n];
            for_each_in_range(p, n, range, |x| {
                // y = x^{d-1}, z = x^d
                y.copy_from_slice(x);
                for _ in 2..d {
                    field.mul_into(&y, x, &mut z);
                    y.copy_from_slice(&z);
                }
                field.mul_into(&y, x, &mut z);
                field.mul_into(&a.0, &y, &mut ay);
                let tr = (field.trace_slice(&z) + field.trace_slice(&ay)) % p;
                hist[tr as usize] += 1;
            });
            hist
        },
        vec![0u64; p as usize],
        add_histograms,
    );
    Ok(CyclotomicInt::from_histogram(p, 1, &hist))
}

/// `S*_m` through Teichmüller lifts in `Z_{q^m}/p^M` and the ring trace.
/// Valid for every level; the residue shortcut must agree with it at `M = 1`.
pub fn exp_sum_teichmuller(cfg: &CurveConfig, m: u32, opts: &EnumOptions) -> Result<CyclotomicInt> {
    let (field, a) = cfg.extension(m)?;
    check_budget(&field, m, opts.cap)?;
    let ring = ZqRing::new(field.desc(), cfg.level)?;
    let a_hat = ring.teichmuller(&a);
    let n = field.degree();
    let p = cfg.p;
    let buckets = ring.modulus() as usize;
    let d = cfg.d;
    let hist = opts.workers.map_reduce(
        1..field.order(),
        |range| {
            let mut hist = vec![0u64; buckets];
            let mut y = vec![0u64; n];
            let mut z = vec![0u64; n];
            let mut ay = vec![0u64; n];
            for_each_in_range(p, n, range, |x| {
                let w = ring.teichmuller(&FqElt(x.to_vec()));
                y.copy_from_slice(&w.0);
                for _ in 2..d {
                    ring.mul_into(&y, &w.0, &mut z);
                    y.copy_from_slice(&z);
                }
                ring.mul_into(&y, &w.0, &mut z);
                ring.mul_into(&a_hat.0, &y, &mut ay);
                let tr = (ring.trace_slice(&z) + ring.trace_slice(&ay)) % ring.modulus();
                hist[tr as usize] += 1;
            });
            hist
        },
        vec![0u64; buckets],
        add_histograms,
    );
    Ok(CyclotomicInt::from_histogram(p, cfg.level, &hist))
}

/// Coefficients `c_0..c_K` of `exp(Σ S_m t^m / m)` from `S_1..S_K`, via
/// `n c_n = Σ_{m=1}^{n} S_m c_{n-m}`. Every `c_n` must be integral.
pub fn l_from_sums(sums: &[CyclotomicInt]) -> Result<Vec<CyclotomicInt>> {
    let Some(first) = sums.first() else {
        return Err(Error::InvalidInput("need at least S_1".into()));
    };
    let (p, level) = (first.p(), first.level());
    let mut coeffs = vec![CyclotomicInt::one(p, level)];
    for n in 1..=sums.len() {
        let mut acc = CyclotomicInt::zero(p, level);
        for m in 1..=n {
            acc = acc.add(&sums[m - 1].mul(&coeffs[n - m]));
        }
        let c = acc
            .div_exact(&BigInt::from(n))
            .ok_or_else(|| Error::Integrality(format!("c_{n} = ({acc})/{n} is not integral")))?;
        coeffs.push(c);
    }
    Ok(coeffs)
}

/// `S_1..S_upto`.
pub fn exp_sums(cfg: &CurveConfig, upto: u32, opts: &EnumOptions) -> Result<Vec<CyclotomicInt>> {
    (1..=upto).map(|m| exp_sum(cfg, m, opts)).collect()
}

/// The first `upto + 1` coefficients of `L*(f, χ, t)`; needs only `S_1..S_upto`.
pub fn partial_l(cfg: &CurveConfig, upto: usize, opts: &EnumOptions) -> Result<Vec<CyclotomicInt>> {
    if upto > cfg.l_degree() {
        return Err(Error::InvalidInput(format!(
            "requested {upto} coefficients beyond the degree {}",
            cfg.l_degree()
        )));
    }
    if upto == 0 {
        return Ok(vec![CyclotomicInt::one(cfg.p, cfg.level)]);
    }
    l_from_sums(&exp_sums(cfg, upto as u32, opts)?)
}

/// `L*(f, χ, t)` with its degree-`p^{M-1} d` coefficient list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LPolynomial {
    config: CurveConfig,
    coeffs: Vec<CyclotomicInt>,
}

impl LPolynomial {
    /// Brute-force construction from `S_1..S_D`.
    pub fn compute(cfg: &CurveConfig, opts: &EnumOptions) -> Result<Self> {
        let coeffs = partial_l(cfg, cfg.l_degree(), opts)?;
        Ok(Self::from_coeffs(cfg.clone(), coeffs))
    }

    pub fn from_coeffs(config: CurveConfig, coeffs: Vec<CyclotomicInt>) -> Self {
        LPolynomial { config, coeffs }
    }

    pub fn config(&self) -> &CurveConfig {
        &self.config
    }

    pub fn coeffs(&self) -> &[CyclotomicInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    /// `v_q(c_i) = v_p(c_i) / h` for every stored coefficient.
    pub fn q_valuations(&self) -> Vec<ValuationQ> {
        q_valuations(&self.coeffs, self.config.h as u32)
    }
}

pub fn q_valuations(coeffs: &[CyclotomicInt], h: u32) -> Vec<ValuationQ> {
    coeffs.iter().map(|c| cyclo_valuation(c).scaled_down(h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::character_value;
    use crate::exact::rat;

    fn cyc(p: u64, cs: &[i64]) -> CyclotomicInt {
        CyclotomicInt::from_coeffs(p, 1, cs.iter().map(|&c| BigInt::from(c)).collect()).unwrap()
    }

    /// Direct oracle for prime-field sums: plain integers mod p.
    fn naive_s1(p: u64, d: u32, a: u64) -> CyclotomicInt {
        let mut acc = CyclotomicInt::zero(p, 1);
        for x in 1..p {
            let v = (x.pow(d) + a * x.pow(d - 1)) % p;
            acc = acc.add(&character_value(p, 1, v));
        }
        acc
    }

    #[test]
    fn first_sum_example() {
        let cfg = CurveConfig::prime_field(5, 3, 1, 1).unwrap();
        let s1 = exp_sum(&cfg, 1, &EnumOptions::default()).unwrap();
        assert_eq!(s1, cyc(5, &[1, 1, 2, 0]));
        assert_eq!(s1, naive_s1(5, 3, 1));
    }

    #[test]
    fn second_sum_frozen() {
        // exhaustive F_25 enumeration: ζ-multiplicities (3, 4, 9, 4, 4)
        let cfg = CurveConfig::prime_field(5, 3, 1, 1).unwrap();
        let s2 = exp_sum(&cfg, 2, &EnumOptions::default()).unwrap();
        assert_eq!(s2, cyc(5, &[-1, 0, 5, 0]));
    }

    #[test]
    fn shortcut_agrees_with_teichmuller_pipeline() {
        for (p, h, d, a) in [(5u64, 1usize, 3u32, vec![1u64]), (5, 2, 3, vec![1, 1]), (3, 1, 2, vec![2]), (7, 1, 4, vec![3])] {
            let cfg = CurveConfig::new(p, h, d, &a, 1).unwrap();
            let mut m = 1;
            while (p as u128).pow((h * m as usize) as u32) <= 5u128.pow(4) {
                let opts = EnumOptions::default();
                assert_eq!(exp_sum_residue(&cfg, m, &opts).unwrap(), exp_sum_teichmuller(&cfg, m, &opts).unwrap());
                m += 1;
            }
        }
    }

    #[test]
    fn partition_independence() {
        let cfg = CurveConfig::prime_field(5, 3, 2, 1).unwrap();
        let single = exp_sum(&cfg, 6, &EnumOptions::default()).unwrap();
        for w in [2, 3, 7] {
            let opts = EnumOptions { workers: Workers::new(w), ..Default::default() };
            assert_eq!(exp_sum(&cfg, 6, &opts).unwrap(), single);
        }
        let cfg2 = CurveConfig::prime_field(5, 3, 1, 2).unwrap();
        let a = exp_sum(&cfg2, 5, &EnumOptions::default()).unwrap();
        let b = exp_sum(&cfg2, 5, &EnumOptions { workers: Workers::new(4), ..Default::default() }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recurrence_examples() {
        let zeros = vec![CyclotomicInt::zero(5, 1); 4];
        let l = l_from_sums(&zeros).unwrap();
        assert!(l[0] == CyclotomicInt::one(5, 1) && l[1..].iter().all(|c| c.is_zero()));
        let s = vec![cyc(5, &[1, 1, 2, 0]), cyc(5, &[-1, 0, 5, 0])];
        assert_eq!(l_from_sums(&s).unwrap()[1], s[0]);
        let bad = vec![CyclotomicInt::zero(5, 1), CyclotomicInt::one(5, 1)];
        assert!(matches!(l_from_sums(&bad), Err(Error::Integrality(_))));
    }

    #[test]
    fn degree_is_exact_for_level_one() {
        let cfg = CurveConfig::prime_field(5, 3, 1, 1).unwrap();
        let sums = exp_sums(&cfg, 5, &EnumOptions::default()).unwrap();
        let c = l_from_sums(&sums).unwrap();
        assert!(!c[3].is_zero());
        assert!(c[4].is_zero() && c[5].is_zero());
    }

    #[test]
    fn partial_prefixes() {
        let cfg = CurveConfig::prime_field(5, 3, 1, 1).unwrap();
        let opts = EnumOptions::default();
        assert_eq!(partial_l(&cfg, 0, &opts).unwrap(), vec![CyclotomicInt::one(5, 1)]);
        let one = partial_l(&cfg, 1, &opts).unwrap();
        assert_eq!(one[1], exp_sum(&cfg, 1, &opts).unwrap());
        assert!(partial_l(&cfg, 4, &opts).is_err());
    }

    #[test]
    fn galois_conjugation_preserves_valuations() {
        let cfg = CurveConfig::prime_field(7, 4, 3, 1).unwrap();
        let l = LPolynomial::compute(&cfg, &EnumOptions::default()).unwrap();
        let v = l.q_valuations();
        for u in 2..7 {
            let conj: Vec<_> = l.coeffs().iter().map(|c| c.galois(u)).collect();
            assert_eq!(q_valuations(&conj, 1), v);
        }
        assert_eq!(v[0], ValuationQ::zero());
        assert_eq!(v[1], ValuationQ::zero());
        assert_eq!(v[4], ValuationQ::Finite(rat(3, 2)));
    }

    #[test]
    fn budget_cap() {
        let cfg = CurveConfig::prime_field(5, 3, 1, 1).unwrap();
        let opts = EnumOptions { cap: 100, ..Default::default() };
        assert!(exp_sum(&cfg, 2, &opts).is_ok());
        assert_eq!(exp_sum(&cfg, 3, &opts), Err(Error::Budget { m: 3, elements: 124, cap: 100 }));
    }

    #[test]
    fn config_validation() {
        assert_eq!(CurveConfig::prime_field(4, 3, 1, 1), Err(Error::NotPrime(4)));
        assert!(CurveConfig::prime_field(3, 3, 1, 1).is_err());
        assert!(CurveConfig::prime_field(5, 3, 0, 1).is_err());
        assert!(CurveConfig::prime_field(5, 3, 5, 1).is_err());
        assert!(CurveConfig::new(5, 2, 3, &[1], 1).is_err());
    }
}
