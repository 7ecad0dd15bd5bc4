//! Run configuration, route dispatch and the cross-route verdict.

pub mod cache;
pub mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use crate::cyclotomic::CyclotomicInt;
use crate::dwork::{self, DworkOptions, DworkReport};
use crate::error::{Error, Result};
use crate::exact::BigRational;
use crate::lemma::{verify_factorizations, LemmaParams};
use crate::lfunction::{exp_sum, l_from_sums, q_valuations, CurveConfig, EnumOptions, DEFAULT_ENUMERATION_CAP};
use crate::parallel::Workers;
use crate::polygons::{
    above_hodge, compare_prefix, compare_slopes, gap_and_transfer, lower_hull, predict_theorem2, PolygonVerdict,
    SlopePrediction,
};

pub use cache::{CacheStats, SumCache, SumKey};
pub use report::{
    BruteForceSection, Comparison, GapEcho, IndexedValuation, InputEcho, LemmaRow, RouteError, Verdict, VerifyReport,
};

pub const CACHE_ENV: &str = "LSLOPES_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Predict,
    Lfun,
    Dwork,
    Lemma,
    Verify,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Predict => "predict",
            Route::Lfun => "lfun",
            Route::Dwork => "dwork",
            Route::Lemma => "lemma",
            Route::Verify => "verify",
        }
    }

    fn runs_lfun(&self) -> bool {
        matches!(self, Route::Lfun | Route::Verify)
    }

    fn runs_dwork(&self) -> bool {
        matches!(self, Route::Dwork | Route::Verify)
    }

    fn runs_lemma(&self) -> bool {
        matches!(self, Route::Lemma | Route::Verify)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Everything a run depends on. Two runs from equal configs produce the
/// same report apart from timing and cache counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub p: u64,
    pub d: u32,
    pub h: usize,
    pub level: u32,
    /// Coordinates of `a` in the canonical basis of `F_q`.
    pub a: Vec<u64>,
    pub route: Route,
    /// Largest `m` for which `S_m` is enumerated; `None` means up to the degree.
    pub max_m: Option<u32>,
    pub truncation: Option<usize>,
    pub guard: u32,
    pub threads: usize,
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
    pub enumeration_cap: u128,
}

impl RunConfig {
    pub fn new(p: u64, d: u32, h: usize, level: u32, a: Vec<u64>, route: Route) -> Self {
        RunConfig {
            p,
            d,
            h,
            level,
            a,
            route,
            max_m: None,
            truncation: None,
            guard: dwork::DEFAULT_GUARD,
            threads: 1,
            format: Format::Json,
            cache_dir: None,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn curve(&self) -> Result<CurveConfig> {
        if self.threads == 0 {
            return Err(Error::InvalidInput("--threads must be >= 1".into()));
        }
        if self.max_m == Some(0) {
            return Err(Error::InvalidInput("--max-m must be >= 1".into()));
        }
        if self.truncation == Some(0) {
            return Err(Error::InvalidInput("--trunc must be >= 1".into()));
        }
        if self.level > 1 && self.p.checked_pow(self.level - 1).is_none() {
            return Err(Error::InvalidInput("p^(M-1) overflows".into()));
        }
        CurveConfig::new(self.p, self.h, self.d, &self.a, self.level)
    }

    fn workers(&self) -> Workers {
        Workers::new(self.threads)
    }
}

/// Parses `a`: an integer when `h = 1`, otherwise `h` comma-separated
/// coordinates. Negative entries are reduced mod `p`.
pub fn parse_a(spec: &str, p: u64, h: usize) -> Result<Vec<u64>> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != h {
        return Err(Error::InvalidInput(format!("a = {spec:?} must have {h} coordinate(s)")));
    }
    parts
        .iter()
        .map(|s| {
            i128::from_str(s)
                .map(|v| v.rem_euclid(p as i128) as u64)
                .map_err(|_| Error::InvalidInput(format!("bad coordinate {s:?} in a")))
        })
        .collect()
}

/// Command-line surface of the `lslopes` binary.
#[derive(Debug, Parser)]
#[command(name = "lslopes", version, about = "Exact Newton-polygon slopes of L-functions of x^d + a x^(d-1)")]
pub struct Args {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub d: u32,
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    /// Integer (h = 1) or comma-separated coordinates in the canonical basis.
    #[arg(long, default_value = "1")]
    pub a: String,
    /// M: the additive character has order p^M.
    #[arg(long = "chi-level", default_value_t = 1)]
    pub chi_level: u32,
    #[arg(long, value_enum, default_value_t = Route::Verify)]
    pub route: Route,
    /// Enumerate S_m only for m <= max-m (prefix comparison).
    #[arg(long = "max-m")]
    pub max_m: Option<u32>,
    /// Size of the truncated Dwork matrix.
    #[arg(long)]
    pub trunc: Option<usize>,
    /// Guard π-digits kept below the working precision.
    #[arg(long, default_value_t = dwork::DEFAULT_GUARD)]
    pub guard: u32,
    /// Worker threads for the enumerations; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long = "cache-dir", env = CACHE_ENV)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long = "no-cache")]
    pub no_cache: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Args {
    pub fn into_config(self) -> Result<RunConfig> {
        let a = parse_a(&self.a, self.p, self.h)?;
        let threads = self
            .threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let cache_dir = if self.no_cache { None } else { Some(self.cache_dir.unwrap_or_else(default_cache_dir)) };
        Ok(RunConfig {
            max_m: self.max_m,
            truncation: self.trunc,
            guard: self.guard,
            threads,
            format: self.format,
            cache_dir,
            ..RunConfig::new(self.p, self.d, self.h, self.chi_level, a, self.route)
        })
    }
}

fn default_cache_dir() -> PathBuf {
    match std::env::var_os("HOME") {
        Some(home) => PathBuf::from(home).join(".cache").join("lslopes"),
        None => std::env::temp_dir().join("lslopes-cache"),
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Budget { .. } => "budget",
        Error::Precision(_) => "precision",
        Error::Truncation(_) => "truncation",
        _ => "error",
    }
}

fn route_error(route: &str, e: &Error) -> RouteError {
    RouteError { route: route.into(), kind: error_kind(e).into(), message: e.to_string() }
}

/// `S_1..S_upto`, through the cache when one is configured.
pub fn cached_sums(
    cfg: &CurveConfig,
    upto: u32,
    opts: &EnumOptions,
    cache: Option<&SumCache>,
    stats: &mut CacheStats,
) -> Result<Vec<CyclotomicInt>> {
    (1..=upto)
        .map(|m| match cache {
            Some(c) => c.get_or_compute(&SumKey::new(cfg, m), stats, || exp_sum(cfg, m, opts)),
            None => exp_sum(cfg, m, opts),
        })
        .collect()
}

fn bruteforce(
    cfg: &CurveConfig,
    run: &RunConfig,
    prediction: &SlopePrediction,
    cache: Option<&SumCache>,
    stats: &mut CacheStats,
) -> Result<(BruteForceSection, Vec<Comparison>)> {
    let degree = cfg.l_degree();
    let upto = run.max_m.map_or(degree, |m| (m as usize).min(degree));
    let opts = EnumOptions { cap: run.enumeration_cap, workers: run.workers() };
    let sums = cached_sums(cfg, upto as u32, &opts, cache, stats)?;
    let coeffs = l_from_sums(&sums)?;
    let vals = q_valuations(&coeffs, cfg.h() as u32);
    let points: Vec<(i64, _)> = vals.iter().cloned().enumerate().map(|(i, v)| (i as i64, v)).collect();
    let np = lower_hull(&points);
    let complete = upto == degree;
    let mut comparisons = Vec::new();
    if complete {
        let outcome = compare_slopes(&prediction.slopes, np.slopes());
        comparisons.push(polygon_comparison("lfun-vs-predict", &outcome));
        if cfg.level() == 1 {
            let ok = above_hodge(&np, cfg.d());
            comparisons.push(Comparison {
                name: "lfun-above-hodge".into(),
                outcome: if ok { Verdict::Match } else { Verdict::Mismatch },
                detail: "NP >= HP".into(),
            });
        }
    } else {
        let outcome = compare_prefix(&prediction.polygon(), &points);
        comparisons.push(Comparison {
            name: "lfun-vs-predict".into(),
            outcome: if outcome.is_match() { Verdict::PrefixMatch } else { Verdict::Mismatch },
            detail: outcome.to_string(),
        });
    }
    let section = BruteForceSection {
        expected_degree: degree,
        computed_upto: upto,
        complete,
        degree: complete.then(|| coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)),
        coeff_valuations: points.into_iter().map(|(i, v)| IndexedValuation(i, v)).collect(),
        slopes: np.slopes().to_vec(),
    };
    Ok((section, comparisons))
}

fn polygon_comparison(name: &str, outcome: &PolygonVerdict) -> Comparison {
    Comparison {
        name: name.into(),
        outcome: if *outcome == PolygonVerdict::Match { Verdict::Match } else { Verdict::Mismatch },
        detail: outcome.to_string(),
    }
}

fn pass_comparison(name: &str, pass: bool, detail: String) -> Comparison {
    Comparison { name: name.into(), outcome: if pass { Verdict::Match } else { Verdict::Mismatch }, detail }
}

fn dwork_comparisons(report: &DworkReport, prediction: &SlopePrediction) -> Vec<Comparison> {
    let one = BigRational::from_integer(1.into());
    let below: Vec<BigRational> = prediction.slopes.iter().filter(|s| **s < one).cloned().collect();
    let mut out = vec![polygon_comparison("dwork-vs-predict", &compare_slopes(&below, &report.slopes))];
    let mut sorted = prediction.slopes.clone();
    sorted.sort();
    let mut partial = BigRational::from_integer(0.into());
    let mut minors_ok = true;
    for (s, v) in report.minor_valuations.iter().enumerate() {
        partial += &sorted[s];
        minors_ok &= *v == partial;
    }
    out.push(pass_comparison(
        "dwork-minors",
        minors_ok,
        "v(det A[s]) equals the partial slope sums".into(),
    ));
    out.push(pass_comparison("dwork-zhu", report.zhu_holds(), format!("{} rows", report.zhu.len())));
    if !report.entry_checks.is_empty() {
        out.push(pass_comparison(
            "dwork-entries",
            report.entries_hold(),
            format!("{} leading-term statements", report.entry_checks.len()),
        ));
    }
    out
}

fn lemma_rows(run: &RunConfig) -> Result<Vec<LemmaRow>> {
    let a = run.a[0] as i64;
    (1..run.d as usize)
        .map(|s| Ok(verify_factorizations(&LemmaParams::new(run.d, run.p, a, s)?)?.into()))
        .collect()
}

fn combine(hypotheses_hold: bool, comparisons: &[Comparison], errors: &[RouteError], route: Route) -> Verdict {
    if !hypotheses_hold {
        return Verdict::HypothesisFailed;
    }
    if comparisons.iter().any(|c| c.outcome == Verdict::Mismatch) {
        return Verdict::Mismatch;
    }
    if comparisons.is_empty() {
        return if errors.is_empty() && route == Route::Predict { Verdict::Match } else { Verdict::Incomplete };
    }
    if comparisons.iter().any(|c| c.outcome == Verdict::PrefixMatch) {
        Verdict::PrefixMatch
    } else {
        Verdict::Match
    }
}

/// Runs the routes selected in `run` and cross-compares them. Budget and
/// precision failures are recorded in the report, never raised; only an
/// invalid configuration is an `Err`.
pub fn run_verify(run: &RunConfig) -> Result<VerifyReport> {
    let cfg = run.curve()?;
    let mut timing = BTreeMap::new();
    let mut errors = Vec::new();
    let mut notes = Vec::new();
    let mut comparisons = Vec::new();
    let mut stats = CacheStats::default();
    let cache = run.cache_dir.as_ref().map(SumCache::new);

    let clock = Instant::now();
    let prediction = predict_theorem2(run.d, run.p, run.h as u32, run.level);
    let g = gap_and_transfer(&prediction, run.d, run.p, run.h as u32);
    timing.insert("predict".to_string(), clock.elapsed().as_millis());

    let mut bruteforce_section = None;
    if run.route.runs_lfun() {
        let clock = Instant::now();
        match bruteforce(&cfg, run, &prediction, cache.as_ref(), &mut stats) {
            Ok((section, cmp)) => {
                bruteforce_section = Some(section);
                comparisons.extend(cmp);
            }
            Err(e) => errors.push(route_error("lfun", &e)),
        }
        timing.insert("lfun".to_string(), clock.elapsed().as_millis());
    }

    let mut dwork_report = None;
    if run.route.runs_dwork() {
        if cfg.level() > 1 {
            notes.push("dwork route skipped: it handles M = 1 only".into());
        } else {
            let clock = Instant::now();
            let opts = DworkOptions { truncation: run.truncation, guard: run.guard, workers: run.workers(), ..DworkOptions::default() };
            match dwork::analyze(&cfg, &opts) {
                Ok(r) => {
                    comparisons.extend(dwork_comparisons(&r, &prediction));
                    dwork_report = Some(r);
                }
                Err(e) => errors.push(route_error("dwork", &e)),
            }
            timing.insert("dwork".to_string(), clock.elapsed().as_millis());
        }
    }
    if let (Some(b), Some(dw)) = (&bruteforce_section, &dwork_report) {
        if b.complete {
            comparisons.push(polygon_comparison("dwork-vs-lfun", &compare_slopes(&b.slopes, &dw.slopes)));
        }
    }

    let mut lemma = None;
    if run.route.runs_lemma() {
        if run.h > 1 {
            notes.push("lemma route skipped: it takes an integer a (h = 1)".into());
        } else {
            let clock = Instant::now();
            match lemma_rows(run) {
                Ok(rows) => {
                    let ok = rows.iter().all(|r| r.pass);
                    comparisons.push(pass_comparison("lemma", ok, format!("s = 1..{}", run.d - 1)));
                    lemma = Some(rows);
                }
                Err(Error::InvalidInput(msg)) => notes.push(format!("lemma route skipped: {msg}")),
                Err(e) => errors.push(route_error("lemma", &e)),
            }
            timing.insert("lemma".to_string(), clock.elapsed().as_millis());
        }
    }

    let verdict = combine(prediction.hypotheses_hold(), &comparisons, &errors, run.route);
    Ok(VerifyReport {
        schema: report::REPORT_SCHEMA,
        input: InputEcho {
            p: run.p,
            d: run.d,
            h: run.h,
            level: run.level,
            a: cfg.a().to_vec(),
            modulus: cfg.field().modulus().to_vec(),
            route: run.route.as_str().into(),
            max_m: run.max_m,
        },
        hypotheses: prediction.checks.clone(),
        predicted_slopes: prediction.slopes.clone(),
        gap: GapEcho { gap: g.gap, bound: g.bound, within_bound: g.within_bound, transfer_ok: g.transfer_ok },
        bruteforce: bruteforce_section,
        dwork: dwork_report,
        lemma,
        comparisons,
        verdict,
        errors,
        notes,
        cache: stats,
        timing_ms: timing,
    })
}

/// 0 match or prefix-match, 1 mismatch, 2 hypothesis failed, 3 budget or
/// precision trouble.
pub fn exit_code(report: &VerifyReport) -> i32 {
    match report.verdict {
        Verdict::HypothesisFailed => 2,
        Verdict::Mismatch => 1,
        _ if !report.errors.is_empty() => 3,
        Verdict::Incomplete => 3,
        _ => 0,
    }
}

pub fn render(report: &VerifyReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
        Format::Table => report.to_table(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn quick(p: u64, d: u32, route: Route) -> RunConfig {
        RunConfig::new(p, d, 1, 1, vec![1], route)
    }

    #[test]
    fn parses_coefficients() {
        assert_eq!(parse_a("3", 5, 1).unwrap(), vec![3]);
        assert_eq!(parse_a("-1", 5, 1).unwrap(), vec![4]);
        assert_eq!(parse_a("0, 1", 5, 2).unwrap(), vec![0, 1]);
        assert!(parse_a("1", 5, 2).is_err());
        assert!(parse_a("x", 5, 1).is_err());
    }

    #[test]
    fn small_verify_matches() {
        let r = run_verify(&quick(5, 3, Route::Verify)).unwrap();
        assert_eq!(r.verdict, Verdict::Match, "{}", r.to_table());
        assert_eq!(exit_code(&r), 0);
        assert_eq!(r.predicted_slopes, vec![rat(0, 1), rat(1, 2), rat(1, 2)]);
        assert_eq!(r.bruteforce.as_ref().unwrap().slopes, r.predicted_slopes);
        assert_eq!(r.dwork.as_ref().unwrap().slopes, r.predicted_slopes);
        assert!(r.lemma.as_ref().unwrap().iter().all(|l| l.pass));
    }

    #[test]
    fn composite_p_is_rejected() {
        assert!(matches!(run_verify(&quick(4, 3, Route::Verify)), Err(Error::NotPrime(4))));
    }

    #[test]
    fn wrong_congruence_is_hypothesis_failed() {
        let r = run_verify(&quick(7, 3, Route::Predict)).unwrap();
        assert_eq!(r.verdict, Verdict::HypothesisFailed);
        assert_eq!(exit_code(&r), 2);
    }

    #[test]
    fn prefix_route() {
        let mut run = RunConfig::new(5, 3, 1, 2, vec![1], Route::Lfun);
        run.max_m = Some(4);
        let r = run_verify(&run).unwrap();
        assert_eq!(r.verdict, Verdict::PrefixMatch);
        assert_eq!(exit_code(&r), 0);
        assert_eq!(r.bruteforce.unwrap().computed_upto, 4);
    }

    #[test]
    fn budget_is_reported_not_raised() {
        let mut run = quick(5, 3, Route::Lfun);
        run.enumeration_cap = 10;
        let r = run_verify(&run).unwrap();
        assert_eq!(r.errors[0].kind, "budget");
        assert_eq!(r.verdict, Verdict::Incomplete);
        assert_eq!(exit_code(&r), 3);
    }

    #[test]
    fn csv_rows() {
        let r = run_verify(&quick(5, 3, Route::Predict)).unwrap();
        assert_eq!(r.to_csv(), "route,index,num,den\npredict,0,0,1\npredict,1,1,2\npredict,2,1,2\n");
    }
}
