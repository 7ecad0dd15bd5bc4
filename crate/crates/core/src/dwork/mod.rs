//! Dwork's side of the comparison: the splitting function, the nuclear
//! Frobenius matrix and its Fredholm determinant, all inside
//! `Z_q[π]/(π^{p-1} + p)` at finite, checked precision.

pub mod eisenstein;
pub mod fredholm;
pub mod matrix;
pub mod series;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{ser, BigRational};
use crate::finite::FiniteField;
use crate::lfunction::CurveConfig;
use crate::parallel::Workers;

pub use eisenstein::{EisensteinElt, EisensteinRing, Reading};
pub use fredholm::{
    check_zhu_hypothesis, entry_leading_terms, fredholm_coeffs, fredholm_slopes_below_one, index_sets,
    leading_minor_valuations, truncation_cutoff, EntryCheck, ZhuRow,
};
pub use matrix::{
    build_matrix, f_bound, f_coeff, matrix_product_frobenius, principal_minor, principal_minor_valuation,
    DworkMatrix, SplittingData,
};
pub use series::{artin_hasse_coeffs, gamma_residual, solve_gamma, splitting_coeffs, theta_at_one, ThetaCheck};

pub const DEFAULT_GUARD: u32 = 6;

/// `⌈d(d+3)/2⌉`: rows beyond it only touch valuations `>= (d+3)/2`.
pub fn default_truncation(d: u32) -> usize {
    (d as usize * (d as usize + 3)).div_ceil(2)
}

/// `(p-1)(d+2)` π-digits, i.e. `p`-adic precision `d+2`.
pub fn default_pi_digits(p: u64, d: u32) -> u32 {
    (p as u32 - 1) * (d + 2)
}

#[derive(Debug, Clone)]
pub struct DworkOptions {
    pub truncation: Option<usize>,
    pub pi_digits: Option<u32>,
    pub guard: u32,
    /// Fredholm coefficients `c_1..c_depth`; defaults to `d + 1`.
    pub depth: Option<usize>,
    pub workers: Workers,
    /// Attempts at doubled precision after a precision or truncation signal.
    pub max_attempts: u32,
}

impl Default for DworkOptions {
    fn default() -> Self {
        DworkOptions { truncation: None, pi_digits: None, guard: DEFAULT_GUARD, depth: None, workers: Workers::single(), max_attempts: 3 }
    }
}

/// Ring, splitting data and the matrices `A_1`, `A_h` at one precision.
#[derive(Debug, Clone)]
pub struct DworkEngine {
    pub ring: EisensteinRing,
    pub data: SplittingData,
    pub a1: DworkMatrix,
    pub ah: DworkMatrix,
    pub h: usize,
}

impl DworkEngine {
    pub fn new(cfg: &CurveConfig, truncation: usize, pi_digits: u32, guard: u32) -> Result<Self> {
        if cfg.level() != 1 {
            return Err(Error::InvalidInput(format!(
                "the Dwork route handles characters of order p only (M = 1), got M = {}",
                cfg.level()
            )));
        }
        let d = cfg.d();
        let ring = EisensteinRing::new(cfg.field(), pi_digits, guard)?;
        let gamma = solve_gamma(&ring)?;
        let count = matrix::needed_index(cfg.p(), truncation).div_ceil(d as usize - 1);
        let e = artin_hasse_coeffs(cfg.p(), count.max(ring.pi_digits() as usize))?;
        let gammas = splitting_coeffs(&ring, &gamma, &e, count)?;
        let field = FiniteField::new(cfg.field())?;
        let a_hat = ring.zq().teichmuller(&field.from_coeffs(cfg.a())?);
        let data = SplittingData { d, gamma, gammas, a_hat };
        let a1 = build_matrix(&ring, &data, truncation)?;
        let ah = matrix_product_frobenius(&ring, &a1, cfg.h())?;
        Ok(DworkEngine { ring, data, a1, ah, h: cfg.h() })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DworkReport {
    pub truncation: usize,
    pub pi_digits: u32,
    pub guard: u32,
    pub attempts: u32,
    pub gamma_residual: Reading,
    pub theta: ThetaCheck,
    /// `v_p(det A_1[s])` for `s = 1..=d`.
    #[serde(serialize_with = "ser::rationals")]
    pub minor_valuations: Vec<BigRational>,
    /// `v_p(c_s)` of `det(I - t A_h)`, `s = 1..=depth`.
    pub fredholm_valuations: Vec<Reading>,
    /// q-adic slopes below 1 of the Fredholm polygon.
    #[serde(serialize_with = "ser::rationals")]
    pub slopes: Vec<BigRational>,
    pub zhu: Vec<ZhuRow>,
    pub entry_checks: Vec<EntryCheck>,
}

impl DworkReport {
    pub fn zhu_holds(&self) -> bool {
        self.zhu.iter().all(|r| r.pass)
    }

    pub fn entries_hold(&self) -> bool {
        self.entry_checks.iter().all(|c| c.pass)
    }
}

fn analyze_once(cfg: &CurveConfig, opts: &DworkOptions, n: usize, digits: u32) -> Result<DworkReport> {
    let d = cfg.d();
    let engine = DworkEngine::new(cfg, n, digits, opts.guard)?;
    let ring = &engine.ring;
    let e = artin_hasse_coeffs(cfg.p(), ring.pi_digits() as usize)?;
    let theta = theta_at_one(ring, &engine.data.gamma, &e)?;
    if !theta.pass {
        return Err(Error::Hensel(format!("γ fails the E(γ) root-of-unity check: {theta:?}")));
    }
    let residual = gamma_residual(ring, &engine.data.gamma)?;
    let depth_minors = (d as usize).min(n);
    let minor_valuations = leading_minor_valuations(ring, &engine.a1, depth_minors)?;
    let zhu = check_zhu_hypothesis(ring, &engine.a1, d, depth_minors)?;
    let depth = opts.depth.unwrap_or(d as usize + 1);
    let fredholm_valuations = fredholm_coeffs(ring, &engine.ah, d, depth, opts.workers)?;
    let (_, slopes) = fredholm_slopes_below_one(&fredholm_valuations, cfg.h() as u32)?;
    let p = cfg.p();
    let entry_checks = if (p + 1).is_multiple_of(d as u64) && p + 1 >= 2 * d as u64 {
        entry_leading_terms(ring, &engine.data)?
    } else {
        Vec::new()
    };
    Ok(DworkReport {
        truncation: n,
        pi_digits: ring.pi_digits(),
        guard: opts.guard,
        attempts: 1,
        gamma_residual: residual,
        theta,
        minor_valuations,
        fredholm_valuations,
        slopes,
        zhu,
        entry_checks,
    })
}

/// Runs the whole Dwork side. A precision or truncation signal triggers a
/// retry with doubled π-precision (and `d` more rows for truncation).
pub fn analyze(cfg: &CurveConfig, opts: &DworkOptions) -> Result<DworkReport> {
    let d = cfg.d();
    let mut n = opts.truncation.unwrap_or_else(|| default_truncation(d));
    let mut digits = opts.pi_digits.unwrap_or_else(|| default_pi_digits(cfg.p(), d));
    let mut attempt = 1;
    loop {
        match analyze_once(cfg, opts, n, digits) {
            Ok(mut r) => {
                r.attempts = attempt;
                return Ok(r);
            }
            Err(err @ (Error::Precision(_) | Error::Truncation(_))) if attempt < opts.max_attempts => {
                log::warn!("dwork attempt {attempt} at n = {n}, {digits} π-digits: {err}; retrying");
                if matches!(err, Error::Truncation(_)) {
                    n += d as usize;
                }
                digits *= 2;
                attempt += 1;
            }
            Err(err) => return Err(err),
        }
    }
}
