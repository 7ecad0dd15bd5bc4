//! The verification report and its three renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use super::cache::CacheStats;
use crate::dwork::{DworkReport, Reading};
use crate::exact::{rational_json, ser, to_decimal, BigRational, ValuationQ};
use crate::lemma::{FactorizationReport, IdentityCheck};
use crate::polygons::HypothesisCheck;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Match,
    PrefixMatch,
    Mismatch,
    HypothesisFailed,
    /// No comparison could be completed, e.g. every route hit its budget.
    Incomplete,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::PrefixMatch => "prefix-match",
            Verdict::Mismatch => "mismatch",
            Verdict::HypothesisFailed => "hypothesis-failed",
            Verdict::Incomplete => "incomplete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputEcho {
    pub p: u64,
    pub d: u32,
    pub h: usize,
    #[serde(rename = "M")]
    pub level: u32,
    pub a: Vec<u64>,
    pub modulus: Vec<u64>,
    pub route: String,
    pub max_m: Option<u32>,
}

/// `(i, v_q(c_i))`, written `[i, [num, den]]` with `null` for `+∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedValuation(pub i64, pub ValuationQ);

impl Serialize for IndexedValuation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = match self.1.finite() {
            Some(r) => rational_json(r),
            None => serde_json::Value::Null,
        };
        s.collect_seq([serde_json::Value::from(self.0), v])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BruteForceSection {
    /// `deg L* = p^{M-1} d`.
    pub expected_degree: usize,
    /// Highest coefficient index computed.
    pub computed_upto: usize,
    pub complete: bool,
    /// Index of the last nonzero coefficient, when complete.
    pub degree: Option<usize>,
    pub coeff_valuations: Vec<IndexedValuation>,
    /// Slopes of the lower hull of the computed points.
    #[serde(serialize_with = "ser::rationals")]
    pub slopes: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaRow {
    pub s: usize,
    #[serde(serialize_with = "ser::rational")]
    pub det: BigRational,
    #[serde(serialize_with = "ser::valuation")]
    pub det_valuation: ValuationQ,
    #[serde(serialize_with = "ser::rational")]
    pub closed_form: BigRational,
    pub checks: Vec<IdentityCheck>,
    pub pass: bool,
}

impl From<FactorizationReport> for LemmaRow {
    fn from(r: FactorizationReport) -> Self {
        let pass = r.all_pass();
        LemmaRow {
            s: r.params.s,
            det: r.det,
            det_valuation: r.det_valuation,
            closed_form: r.closed_form,
            checks: r.checks,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapEcho {
    #[serde(serialize_with = "ser::rational")]
    pub gap: BigRational,
    #[serde(serialize_with = "ser::rational")]
    pub bound: BigRational,
    pub within_bound: bool,
    pub transfer_ok: bool,
}

/// One cross-route comparison and its outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub name: String,
    pub outcome: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RouteError {
    pub route: String,
    /// `budget`, `precision`, `truncation` or `error`.
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub input: InputEcho,
    pub hypotheses: Vec<HypothesisCheck>,
    #[serde(serialize_with = "ser::rationals")]
    pub predicted_slopes: Vec<BigRational>,
    pub gap: GapEcho,
    pub bruteforce: Option<BruteForceSection>,
    pub dwork: Option<DworkReport>,
    pub lemma: Option<Vec<LemmaRow>>,
    pub comparisons: Vec<Comparison>,
    pub verdict: Verdict,
    pub errors: Vec<RouteError>,
    pub notes: Vec<String>,
    pub cache: CacheStats,
    pub timing_ms: BTreeMap<String, u128>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `route,index,num,den`, one row per slope.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("route,index,num,den\n");
        let mut rows = |route: &str, slopes: &[BigRational]| {
            for (i, s) in slopes.iter().enumerate() {
                let _ = writeln!(out, "{route},{i},{},{}", s.numer(), s.denom());
            }
        };
        rows("predict", &self.predicted_slopes);
        if let Some(b) = &self.bruteforce {
            rows("lfun", &b.slopes);
        }
        if let Some(d) = &self.dwork {
            rows("dwork", &d.slopes);
        }
        out
    }

    pub fn to_table(&self) -> String {
        let dec = |r: &BigRational| to_decimal(r, 6);
        let list = |v: &[BigRational]| v.iter().map(dec).collect::<Vec<_>>().join("  ");
        let i = &self.input;
        let mut out = String::new();
        let _ = writeln!(out, "p = {}, d = {}, h = {}, M = {}, a = {:?}, modulus = {:?}", i.p, i.d, i.h, i.level, i.a, i.modulus);
        for h in &self.hypotheses {
            let _ = writeln!(out, "  [{}] {} ({})", mark(h.pass), h.name, h.detail);
        }
        let _ = writeln!(out, "predicted   {}", list(&self.predicted_slopes));
        if let Some(b) = &self.bruteforce {
            let tag = if b.complete { "lfun" } else { "lfun*" };
            let _ = writeln!(out, "{tag:<11} {}", list(&b.slopes));
        }
        if let Some(d) = &self.dwork {
            let _ = writeln!(out, "dwork       {}", list(&d.slopes));
            let minors: Vec<String> = d.minor_valuations.iter().map(dec).collect();
            let _ = writeln!(out, "  minors    {}", minors.join("  "));
            let fred: Vec<String> = d.fredholm_valuations.iter().map(reading_decimal).collect();
            let _ = writeln!(out, "  fredholm  {}", fred.join("  "));
        }
        if let Some(rows) = &self.lemma {
            for r in rows {
                let _ = writeln!(out, "lemma s={}   [{}] det = {}", r.s, mark(r.pass), r.det);
            }
        }
        for c in &self.comparisons {
            let _ = writeln!(out, "  {:<16} {:<14} {}", c.name, c.outcome.as_str(), c.detail);
        }
        for e in &self.errors {
            let _ = writeln!(out, "  error ({}, {}): {}", e.route, e.kind, e.message);
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        let _ = writeln!(out, "verdict: {}", self.verdict.as_str());
        out
    }
}

fn mark(pass: bool) -> &'static str {
    if pass {
        "ok"
    } else {
        "FAIL"
    }
}

fn reading_decimal(r: &Reading) -> String {
    match r {
        Reading::Exact(v) => to_decimal(v, 6),
        Reading::AtLeast(v) => format!(">={}", to_decimal(v, 6)),
    }
}
