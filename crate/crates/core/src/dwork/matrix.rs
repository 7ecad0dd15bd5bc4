//! The Frobenius matrix `A_1 = (F_{pi-j} γ^{(j-i)/d})` with the `γ^{1/d}`
//! factors dropped, its principal minors and its Frobenius products.
//!
//! Conjugating by `diag(γ^{t/d})` leaves every principal minor unchanged, so
//! only the core entries `F_{pi-j}` are stored.

use super::eisenstein::{EisensteinElt, EisensteinRing, Reading};
use crate::error::{Error, Result};
use crate::exact::{rat, BigRational};
use crate::finite::ZqElt;

/// Everything needed to produce `F_i` for `x^d + a x^{d-1}`.
#[derive(Debug, Clone)]
pub struct SplittingData {
    pub d: u32,
    pub gamma: EisensteinElt,
    /// `γ_0, γ_1, ...`
    pub gammas: Vec<EisensteinElt>,
    /// Teichmüller lift of `a`.
    pub a_hat: ZqElt,
}

impl SplittingData {
    /// Largest index `i` for which `F_i` can be formed.
    pub fn max_index(&self) -> usize {
        (self.gammas.len() - 1) * (self.d as usize - 1)
    }
}

/// `F_i = Σ_{dm + (d-1)n = i} γ_m γ_n â^n`.
pub fn f_coeff(ring: &EisensteinRing, data: &SplittingData, i: usize) -> Result<EisensteinElt> {
    let d = data.d as usize;
    if i > data.max_index() {
        return Err(Error::InvalidInput(format!("F_{i} needs more splitting coefficients")));
    }
    let zq = ring.zq();
    let mut acc = ring.zero();
    let mut a_pow = zq.one();
    let mut n = 0usize;
    while (d - 1) * n <= i {
        let rest = i - (d - 1) * n;
        if rest.is_multiple_of(d) {
            let m = rest / d;
            let t = ring.mul(&ring.mul(&data.gammas[m], &data.gammas[n]), &ring.from_zq(&a_pow));
            ring.add_assign(&mut acc, &t);
        }
        a_pow = zq.mul(&a_pow, &data.a_hat);
        n += 1;
    }
    Ok(acc)
}

/// `v(F_i) >= i/(d(p-1))`, the bound making `A_1` nuclear.
pub fn f_bound(d: u32, p: u64, i: usize) -> BigRational {
    rat(i as i64, d as i64 * (p as i64 - 1))
}

/// Truncated core grid `core[i][j] = F_{pi-j}` (zero when `pi < j`).
/// The true entry of `A_h` is `core[i][j] γ^{(j-i)/d}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DworkMatrix {
    core: Vec<Vec<EisensteinElt>>,
}

impl DworkMatrix {
    pub fn size(&self) -> usize {
        self.core.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &EisensteinElt {
        &self.core[i][j]
    }

    /// Exponent of `γ^{1/d}` carried by entry `(i, j)`.
    pub fn tick(i: usize, j: usize) -> i64 {
        j as i64 - i as i64
    }
}

/// Highest `F_i` index used by an `n × n` truncation.
pub fn needed_index(p: u64, n: usize) -> usize {
    p as usize * n.saturating_sub(1)
}

pub fn build_matrix(ring: &EisensteinRing, data: &SplittingData, n: usize) -> Result<DworkMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("truncation must be >= 1".into()));
    }
    let p = ring.p() as usize;
    let f: Vec<EisensteinElt> = (0..=needed_index(ring.p(), n))
        .map(|i| f_coeff(ring, data, i))
        .collect::<Result<_>>()?;
    for (i, fi) in f.iter().enumerate() {
        if let Reading::Exact(v) = ring.reading(fi) {
            let bound = f_bound(data.d, ring.p(), i);
            if v < bound {
                return Err(Error::Integrality(format!("v(F_{i}) = {v} < {bound}")));
            }
        }
    }
    let core = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if p * i >= j { f[p * i - j].clone() } else { ring.zero() })
                .collect()
        })
        .collect();
    Ok(DworkMatrix { core })
}

/// `A φ(A) ... φ^{h-1}(A)` truncated to the same size. Frobenius fixes `π`
/// and `γ`, so the `γ^{1/d}` bookkeeping telescopes and the core grids
/// multiply directly.
pub fn matrix_product_frobenius(ring: &EisensteinRing, a: &DworkMatrix, h: usize) -> Result<DworkMatrix> {
    if h == 0 {
        return Err(Error::InvalidInput("h must be >= 1".into()));
    }
    let n = a.size();
    let mut acc = a.clone();
    let mut twisted = a.clone();
    for _ in 1..h {
        twisted = DworkMatrix {
            core: twisted.core.iter().map(|row| row.iter().map(|x| ring.frobenius(x)).collect()).collect(),
        };
        let mut core = vec![vec![ring.zero(); n]; n];
        for (i, row) in core.iter_mut().enumerate() {
            for k in 0..n {
                let x = &acc.core[i][k];
                if ring.is_zero(x) {
                    continue;
                }
                for (j, out) in row.iter_mut().enumerate() {
                    let y = &twisted.core[k][j];
                    if !ring.is_zero(y) {
                        ring.add_assign(out, &ring.mul(x, y));
                    }
                }
            }
        }
        acc = DworkMatrix { core };
    }
    Ok(acc)
}

/// Determinant of the principal submatrix on `indices`, by Laplace
/// expansion over column subsets (division free, `s 2^s` products).
pub fn principal_minor(ring: &EisensteinRing, m: &DworkMatrix, indices: &[usize]) -> EisensteinElt {
    let s = indices.len();
    let mut dp = vec![ring.zero(); 1 << s];
    dp[0] = ring.one();
    for mask in 1usize..(1 << s) {
        let k = mask.count_ones() as usize;
        let row = indices[k - 1];
        let mut acc = ring.zero();
        for c in 0..s {
            if mask & (1 << c) == 0 {
                continue;
            }
            let rest = mask & !(1 << c);
            let entry = &m.core[row][indices[c]];
            if ring.is_zero(entry) || ring.is_zero(&dp[rest]) {
                continue;
            }
            let t = ring.mul(entry, &dp[rest]);
            // sign from the columns of `mask` to the right of `c`
            if (mask >> (c + 1)).count_ones() % 2 == 1 {
                acc = ring.sub(&acc, &t);
            } else {
                ring.add_assign(&mut acc, &t);
            }
        }
        dp[mask] = acc;
    }
    dp.pop().expect("nonempty table")
}

pub fn principal_minor_valuation(ring: &EisensteinRing, m: &DworkMatrix, indices: &[usize]) -> Result<BigRational> {
    if let Some(&t) = indices.iter().find(|&&t| t >= m.size()) {
        return Err(Error::Truncation(format!("index {t} outside the {}x{} truncation", m.size(), m.size())));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("minor indices must be strictly increasing".into()));
    }
    let det = principal_minor(ring, m, indices);
    ring.exact_valuation(&det, &format!("det A({indices:?})"))
}
