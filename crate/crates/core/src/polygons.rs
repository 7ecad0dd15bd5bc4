//! Newton polygons, the Hodge polygon, the closed-form slope predictions and
//! the gap criterion that transfers slopes to higher-order characters.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::exact::{rat, rat_int, BigRational, ValuationQ};

/// Lower convex hull of `(index, valuation)` points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    points: Vec<(i64, ValuationQ)>,
    vertices: Vec<(i64, BigRational)>,
    slopes: Vec<BigRational>,
}

fn slope(a: &(i64, BigRational), b: &(i64, BigRational)) -> BigRational {
    (&b.1 - &a.1) / rat_int(b.0 - a.0)
}

/// Monotone-chain lower hull. Points at `+∞` never become vertices; the
/// remaining indices must be distinct.
pub fn lower_hull(points: &[(i64, ValuationQ)]) -> NewtonPolygon {
    let mut finite: Vec<(i64, BigRational)> = points
        .iter()
        .filter_map(|(i, v)| v.finite().map(|r| (*i, r.clone())))
        .collect();
    finite.sort_by_key(|(i, _)| *i);
    let mut hull: Vec<(i64, BigRational)> = Vec::with_capacity(finite.len());
    for pt in finite {
        while hull.len() >= 2 {
            let n = hull.len();
            if slope(&hull[n - 2], &hull[n - 1]) >= slope(&hull[n - 1], &pt) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut slopes = Vec::new();
    for w in hull.windows(2) {
        let s = slope(&w[0], &w[1]);
        for _ in 0..(w[1].0 - w[0].0) {
            slopes.push(s.clone());
        }
    }
    let mut pts = points.to_vec();
    pts.sort_by_key(|(i, _)| *i);
    NewtonPolygon { points: pts, vertices: hull, slopes }
}

/// Polygon starting at `(0, 0)` with the given slopes (sorted first).
pub fn polygon_from_slopes(slopes: &[BigRational]) -> NewtonPolygon {
    let mut sorted = slopes.to_vec();
    sorted.sort();
    let mut points = vec![(0i64, ValuationQ::zero())];
    let mut acc = BigRational::zero();
    for (i, s) in sorted.iter().enumerate() {
        acc += s;
        points.push((i as i64 + 1, ValuationQ::Finite(acc.clone())));
    }
    lower_hull(&points)
}

impl NewtonPolygon {
    pub fn points(&self) -> &[(i64, ValuationQ)] {
        &self.points
    }

    pub fn vertices(&self) -> &[(i64, BigRational)] {
        &self.vertices
    }

    /// Slopes with multiplicity, ascending.
    pub fn slopes(&self) -> &[BigRational] {
        &self.slopes
    }

    pub fn first_index(&self) -> Option<i64> {
        self.vertices.first().map(|v| v.0)
    }

    pub fn last_index(&self) -> Option<i64> {
        self.vertices.last().map(|v| v.0)
    }

    /// Height of the polygon at an integer abscissa inside its range.
    pub fn value_at(&self, x: i64) -> Option<BigRational> {
        let w = self.vertices.windows(2).find(|w| w[0].0 <= x && x <= w[1].0);
        match w {
            Some(w) => Some(&w[0].1 + slope(&w[0], &w[1]) * rat_int(x - w[0].0)),
            None => self.vertices.iter().find(|v| v.0 == x).map(|v| v.1.clone()),
        }
    }

    pub fn is_vertex(&self, x: i64) -> bool {
        self.vertices.iter().any(|v| v.0 == x)
    }

    /// Slopes strictly below `bound`, with multiplicity.
    pub fn slopes_below(&self, bound: &BigRational) -> Vec<BigRational> {
        self.slopes.iter().filter(|s| *s < bound).cloned().collect()
    }
}

/// A named pass/fail check with a human-readable detail line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl HypothesisCheck {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        HypothesisCheck { name: name.into(), pass, detail: detail.into() }
    }
}

/// Predicted slope multiset plus the hypotheses it rests on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopePrediction {
    pub d: u32,
    pub p: u64,
    pub h: u32,
    pub level: u32,
    pub slopes: Vec<BigRational>,
    pub checks: Vec<HypothesisCheck>,
}

impl SlopePrediction {
    pub fn hypotheses_hold(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn polygon(&self) -> NewtonPolygon {
        polygon_from_slopes(&self.slopes)
    }
}

/// `N(d) = (d²+3)/4` over the prime field and `d²/2` otherwise.
pub fn n_bound(d: u32, h: u32) -> BigRational {
    let d = d as i64;
    if h == 1 {
        rat(d * d + 3, 4)
    } else {
        rat(d * d, 2)
    }
}

/// The slope `w_i` for `p ≡ -1 (mod d)`.
pub fn w_slope(i: u32, d: u32, p: u64) -> BigRational {
    let (i, d, p) = (i as i64, d as i64, p as i64);
    let den = d * (p - 1);
    if 2 * i < d {
        rat((p + 1) * i, den)
    } else if 2 * i == d {
        rat((p + 1) * i - d, den)
    } else {
        rat((p + 1) * i - 2 * d, den)
    }
}

fn congruence_check(d: u32, p: u64) -> HypothesisCheck {
    let ok = (p + 1).is_multiple_of(d as u64);
    HypothesisCheck::new("p ≡ -1 mod d", ok, format!("p mod d = {}", p % d as u64))
}

fn n_check(d: u32, p: u64, h: u32) -> HypothesisCheck {
    let bound = n_bound(d, h);
    let ok = rat_int(p as i64) > bound;
    HypothesisCheck::new("p > N(d)", ok, format!("N({d}) = {bound} for h = {h}"))
}

/// Slopes `{w_0, ..., w_{d-1}}` of the Newton polygon of `L*(f, t)`.
pub fn predict_theorem1(d: u32, p: u64, h: u32) -> SlopePrediction {
    let slopes = (0..d).map(|i| w_slope(i, d, p)).collect();
    SlopePrediction { d, p, h, level: 1, slopes, checks: vec![congruence_check(d, p), n_check(d, p, h)] }
}

/// Slopes `{p^{1-M}(i + w_j)}` for a character of order `p^M`.
pub fn predict_theorem2(d: u32, p: u64, h: u32, level: u32) -> SlopePrediction {
    let base = predict_theorem1(d, p, h);
    let reps = p.pow(level - 1) as i64;
    let scale = rat(1, reps);
    let mut slopes: Vec<BigRational> = (0..reps)
        .flat_map(|i| base.slopes.iter().map(move |w| rat_int(i) + w))
        .map(|s| s * &scale)
        .collect();
    slopes.sort();
    let mut checks = base.checks;
    if level > 1 {
        let hb = rat(h as i64 * (d as i64 * d as i64 - 1), 4 * d as i64) + BigRational::one();
        let ok = rat_int(p as i64) > hb;
        checks.push(HypothesisCheck::new(
            "p > h(d²-1)/(4d) + 1",
            ok,
            format!("h(d²-1)/(4d) + 1 = {hb}"),
        ));
    }
    SlopePrediction { d, p, h, level, slopes, checks }
}

/// Polygon with vertices `(k, k(k-1)/(2d))` for `k = 0..=upto`.
pub fn hodge_polygon(d: u32, upto: i64) -> NewtonPolygon {
    let pts: Vec<(i64, ValuationQ)> = (0..=upto)
        .map(|k| (k, ValuationQ::Finite(rat(k * (k - 1), 2 * d as i64))))
        .collect();
    lower_hull(&pts)
}

/// Hodge height at an integer abscissa.
pub fn hodge_value(d: u32, k: i64) -> BigRational {
    rat(k * (k - 1), 2 * d as i64)
}

/// Every finite point of `np` lies on or above the Hodge polygon.
pub fn above_hodge(np: &NewtonPolygon, d: u32) -> bool {
    np.points().iter().all(|(k, v)| match v.finite() {
        Some(r) => *r >= hodge_value(d, *k),
        None => true,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapReport {
    pub gap: BigRational,
    pub bound: BigRational,
    pub within_bound: bool,
    pub transfer_ok: bool,
}

/// `gap(f) = max (NP - HP)` over one period `[0, d]`, compared with
/// `(d²-1)/(4d(p-1))` and with `1/h`.
pub fn gap_and_transfer(prediction: &SlopePrediction, d: u32, p: u64, h: u32) -> GapReport {
    let mut w = prediction.slopes.clone();
    w.sort();
    w.truncate(d as usize);
    let mut gap = BigRational::zero();
    let mut partial = BigRational::zero();
    for k in 0..=d as i64 {
        let diff = &partial - hodge_value(d, k);
        if diff > gap {
            gap = diff;
        }
        if let Some(s) = w.get(k as usize) {
            partial += s;
        }
    }
    let di = d as i64;
    let bound = rat(di * di - 1, 4 * di * (p as i64 - 1));
    let within_bound = gap <= bound;
    let transfer_ok = gap < rat(1, h as i64);
    GapReport { gap, bound, within_bound, transfer_ok }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolygonVerdict {
    Match,
    /// First slope index (0-based) where the sorted multisets differ.
    Mismatch { index: usize, left: Option<BigRational>, right: Option<BigRational> },
}

impl fmt::Display for PolygonVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolygonVerdict::Match => write!(f, "match"),
            PolygonVerdict::Mismatch { index, left, right } => {
                let show = |x: &Option<BigRational>| x.as_ref().map_or("-".to_string(), |r| r.to_string());
                write!(f, "mismatch at slope {index}: {} vs {}", show(left), show(right))
            }
        }
    }
}

/// Exact slope-multiset comparison.
pub fn compare_slopes(a: &[BigRational], b: &[BigRational]) -> PolygonVerdict {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort();
    b.sort();
    for i in 0..a.len().max(b.len()) {
        if a.get(i) != b.get(i) {
            return PolygonVerdict::Mismatch { index: i, left: a.get(i).cloned(), right: b.get(i).cloned() };
        }
    }
    PolygonVerdict::Match
}

pub fn compare_polygons(a: &NewtonPolygon, b: &NewtonPolygon) -> PolygonVerdict {
    compare_slopes(a.slopes(), b.slopes())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrefixVerdict {
    /// Every predicted vertex up to the shared range is hit exactly and every
    /// other computed point lies on or above the prediction.
    PrefixMatch { vertices_checked: Vec<i64> },
    VertexMismatch { index: i64, predicted: BigRational, computed: ValuationQ },
    BelowPrediction { index: i64, predicted: BigRational, computed: BigRational },
}

impl PrefixVerdict {
    pub fn is_match(&self) -> bool {
        matches!(self, PrefixVerdict::PrefixMatch { .. })
    }
}

impl fmt::Display for PrefixVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrefixVerdict::PrefixMatch { vertices_checked } => {
                write!(f, "prefix-match at vertices {vertices_checked:?}")
            }
            PrefixVerdict::VertexMismatch { index, predicted, computed } => {
                write!(f, "vertex {index}: predicted {predicted}, computed {computed}")
            }
            PrefixVerdict::BelowPrediction { index, predicted, computed } => {
                write!(f, "point {index}: computed {computed} below predicted {predicted}")
            }
        }
    }
}

/// Compares computed points `(i, v(c_i))` for a prefix of the coefficients
/// with the full predicted polygon.
pub fn compare_prefix(predicted: &NewtonPolygon, computed: &[(i64, ValuationQ)]) -> PrefixVerdict {
    let mut checked = Vec::new();
    for (i, v) in computed {
        let Some(pred) = predicted.value_at(*i) else { continue };
        if predicted.is_vertex(*i) {
            if v.finite() != Some(&pred) {
                return PrefixVerdict::VertexMismatch { index: *i, predicted: pred, computed: v.clone() };
            }
            checked.push(*i);
        } else if let Some(r) = v.finite() {
            if *r < pred {
                return PrefixVerdict::BelowPrediction { index: *i, predicted: pred, computed: r.clone() };
            }
        }
    }
    PrefixVerdict::PrefixMatch { vertices_checked: checked }
}

/// `[num, den]` pair for serialization.
pub fn rational_pair(r: &BigRational) -> [BigInt; 2] {
    [r.numer().clone(), r.denom().clone()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(n: i64, d: i64) -> ValuationQ {
        ValuationQ::Finite(rat(n, d))
    }

    fn rats(v: &[(i64, i64)]) -> Vec<BigRational> {
        v.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    #[test]
    fn hull_examples() {
        let np = lower_hull(&[(0, f(0, 1)), (1, f(0, 1)), (2, f(1, 2)), (3, f(1, 1))]);
        assert_eq!(np.slopes(), rats(&[(0, 1), (1, 2), (1, 2)]).as_slice());
        let np = lower_hull(&[(0, f(0, 1)), (1, f(5, 1)), (2, f(1, 1))]);
        assert_eq!(np.slopes(), rats(&[(1, 2), (1, 2)]).as_slice());
        let np = lower_hull(&[(0, f(0, 1)), (1, ValuationQ::Infinite), (2, f(1, 1))]);
        assert_eq!(np.slopes(), rats(&[(1, 2), (1, 2)]).as_slice());
        assert_eq!(np.vertices().len(), 2);
    }

    #[test]
    fn theorem1_examples() {
        assert_eq!(predict_theorem1(3, 5, 1).slopes, rats(&[(0, 1), (1, 2), (1, 2)]));
        assert_eq!(predict_theorem1(4, 7, 1).slopes, rats(&[(0, 1), (1, 3), (1, 2), (2, 3)]));
        assert_eq!(predict_theorem1(5, 19, 1).slopes, rats(&[(0, 1), (2, 9), (4, 9), (5, 9), (7, 9)]));
        assert!(predict_theorem1(3, 5, 1).hypotheses_hold());
        assert!(!predict_theorem1(3, 7, 1).hypotheses_hold());
        // N(3) = 4.5 for general q
        assert!(predict_theorem1(3, 5, 2).hypotheses_hold());
    }

    #[test]
    fn theorem2_examples() {
        assert_eq!(predict_theorem2(3, 5, 1, 1).slopes, predict_theorem1(3, 5, 1).slopes);
        let expect = rats(&[
            (0, 1), (1, 10), (1, 10), (1, 5), (3, 10), (3, 10), (2, 5), (1, 2), (1, 2),
            (3, 5), (7, 10), (7, 10), (4, 5), (9, 10), (9, 10),
        ]);
        let pred = predict_theorem2(3, 5, 1, 2);
        assert_eq!(pred.slopes, expect);
        assert!(pred.hypotheses_hold());
        let fail = predict_theorem2(3, 5, 6, 2);
        let c = fail.checks.iter().find(|c| c.name.starts_with("p > h")).unwrap();
        assert!(!c.pass);
    }

    #[test]
    fn hodge_examples() {
        let hp = hodge_polygon(3, 3);
        assert_eq!(
            hp.vertices(),
            &[(0, rat(0, 1)), (1, rat(0, 1)), (2, rat(1, 3)), (3, rat(1, 1))]
        );
        assert_eq!(hp.slopes(), rats(&[(0, 1), (1, 3), (2, 3)]).as_slice());
        assert_eq!(hodge_polygon(1, 2).slopes(), rats(&[(0, 1), (1, 1)]).as_slice());
        let hp7 = hodge_polygon(7, 10);
        for k in 0..10 {
            assert_eq!(hp7.slopes()[k as usize], rat(k, 7));
        }
    }

    #[test]
    fn gap_examples() {
        let pred = predict_theorem1(3, 5, 1);
        let g = gap_and_transfer(&pred, 3, 5, 1);
        assert_eq!(g.bound, rat(1, 6));
        // max over k of Σ_{i<k} w_i - k(k-1)/6: k = 2 gives 1/2 - 1/3
        assert_eq!(g.gap, rat(1, 6));
        assert!(g.within_bound && g.transfer_ok);
        let g6 = gap_and_transfer(&pred, 3, 5, 6);
        assert!(!g6.transfer_ok);
    }

    #[test]
    fn compare_examples() {
        let a = predict_theorem1(3, 5, 1).polygon();
        assert_eq!(compare_polygons(&a, &a), PolygonVerdict::Match);
        let b = hodge_polygon(3, 3);
        assert!(matches!(compare_polygons(&a, &b), PolygonVerdict::Mismatch { index: 1, .. }));
    }

    #[test]
    fn prefix_compare() {
        let pred = predict_theorem2(3, 5, 1, 2).polygon();
        let pts: Vec<(i64, ValuationQ)> = (0..=8)
            .map(|i| (i, ValuationQ::Finite(pred.value_at(i).unwrap())))
            .collect();
        let v = compare_prefix(&pred, &pts);
        assert_eq!(v, PrefixVerdict::PrefixMatch { vertices_checked: vec![0, 1, 3, 4, 6, 7] });
        let mut bad = pts.clone();
        bad[2].1 = f(1, 100);
        assert!(matches!(compare_prefix(&pred, &bad), PrefixVerdict::BelowPrediction { index: 2, .. }));
        bad = pts;
        bad[3].1 = f(1, 1);
        assert!(matches!(compare_prefix(&pred, &bad), PrefixVerdict::VertexMismatch { index: 3, .. }));
    }

    fn valid_pairs() -> Vec<(u32, u64)> {
        let mut out = Vec::new();
        for d in 2..12u32 {
            for p in (d as u64 + 1)..200 {
                if crate::exact::is_prime(p) && (p + 1) % d as u64 == 0 {
                    out.push((d, p));
                }
            }
        }
        out
    }

    #[test]
    fn slope_sums_and_partial_sum_bound() {
        for (d, p) in valid_pairs() {
            let w = predict_theorem1(d, p, 1).slopes;
            let total: BigRational = w.iter().sum();
            assert_eq!(total, rat(d as i64 - 1, 2), "d={d} p={p}");
            let di = d as i64;
            let extra = rat(di * di - 1, 4 * di * (p as i64 - 1));
            let mut acc = BigRational::zero();
            for (s, ws) in w.iter().enumerate() {
                acc += ws;
                let s = s as i64;
                assert!(acc <= rat(s * (s + 1), 2 * di) + &extra);
            }
            let g = gap_and_transfer(&predict_theorem1(d, p, 1), d, p, 1);
            assert!(g.within_bound, "d={d} p={p} gap={} bound={}", g.gap, g.bound);
            assert!(above_hodge(&predict_theorem1(d, p, 1).polygon(), d));
        }
    }

    #[test]
    fn theorem2_slopes_in_unit_interval() {
        for (d, p) in valid_pairs().into_iter().filter(|(_, p)| *p < 30) {
            for level in 1..=2 {
                let pred = predict_theorem2(d, p, 1, level);
                let n = pred.slopes.len() as i64;
                assert_eq!(n, p.pow(level - 1) as i64 * d as i64);
                assert!(pred.slopes.iter().all(|s| *s >= rat(0, 1) && *s < rat(1, 1)));
                let total: BigRational = pred.slopes.iter().sum();
                assert_eq!(total, rat(n - 1, 2));
            }
        }
    }

    proptest! {
        #[test]
        fn hull_is_order_independent_and_idempotent(
            vals in proptest::collection::vec((0i64..40, 1i64..6), 2..12),
            seed in 0usize..1000,
        ) {
            let pts: Vec<(i64, ValuationQ)> = vals
                .iter()
                .enumerate()
                .map(|(i, &(n, d))| (i as i64, ValuationQ::Finite(rat(n, d))))
                .collect();
            let np = lower_hull(&pts);
            let mut shuffled = pts.clone();
            shuffled.rotate_left(seed % pts.len());
            shuffled.reverse();
            let np2 = lower_hull(&shuffled);
            prop_assert_eq!(np.slopes(), np2.slopes());
            prop_assert_eq!(np.vertices(), np2.vertices());
            let again: Vec<(i64, ValuationQ)> = np.vertices().iter().map(|(i, v)| (*i, ValuationQ::Finite(v.clone()))).collect();
            let rehull = lower_hull(&again);
            prop_assert_eq!(rehull.vertices(), np.vertices());
            prop_assert_eq!(np.slopes().len() as i64, np.last_index().unwrap() - np.first_index().unwrap());
            for w in np.vertices().windows(3) {
                prop_assert!(slope(&w[0], &w[1]) < slope(&w[1], &w[2]));
            }
            for (i, v) in &pts {
                let val = np.value_at(*i).unwrap();
                prop_assert!(v.finite().unwrap() >= &val);
            }
        }
    }
}
