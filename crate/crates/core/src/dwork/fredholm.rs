//! Fredholm coefficients of the truncated nuclear matrix, Zhu's hypothesis
//! and the leading-term checks on individual entries.

use serde::Serialize;

use super::eisenstein::{EisensteinElt, EisensteinRing, Reading};
use super::matrix::{f_coeff, principal_minor, principal_minor_valuation, DworkMatrix, SplittingData};
use crate::error::{Error, Result};
use crate::exact::{ser, factorial, rat, rat_int, BigRational, ValuationQ};
use crate::lemma::{build_m, LemmaParams};
use crate::parallel::Workers;
use crate::polygons::{lower_hull, NewtonPolygon};

/// Index sets `t_1 < ... < t_s` in `0..n` with `Σ t_i < bound`.
pub fn index_sets(n: usize, s: usize, bound: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, sum: usize, bound: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for t in start..n {
            // smallest completion: t, t+1, ..., t+left-1
            if sum + left * t + left * (left - 1) / 2 >= bound {
                break;
            }
            cur.push(t);
            rec(t + 1, n, left - 1, sum + t, bound, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, s, 0, bound, &mut Vec::with_capacity(s), &mut out);
    out
}

/// Any index set of size `s` that uses a row `>= n` has valuation at least
/// `(n + (s-1)(s-2)/2)/d`; below that the truncation is exact.
pub fn truncation_cutoff(n: usize, s: usize, d: u32) -> BigRational {
    let base = if s >= 2 { (s - 1) * (s - 2) / 2 } else { 0 };
    rat((n + base) as i64, d as i64)
}

/// `v(c_s)` for `s = 1..=upto`, `c_s = (-1)^s Σ det A(t_1..t_s)`. Sets whose
/// row bound `Σ t_i / d` reaches the cutoff are skipped; they cannot move a
/// valuation below it. Values at or above the cutoff come back as
/// [`Reading::AtLeast`].
pub fn fredholm_coeffs(ring: &EisensteinRing, m: &DworkMatrix, d: u32, upto: usize, workers: Workers) -> Result<Vec<Reading>> {
    let n = m.size();
    let mut out = Vec::with_capacity(upto);
    for s in 1..=upto {
        let cutoff = truncation_cutoff(n, s, d).min(ring.limit());
        // Σ t_i / d < cutoff  <=>  Σ t_i < d·cutoff
        let scaled = cutoff.clone() * rat_int(d as i64);
        let bound = scaled.ceil().to_integer().try_into().unwrap_or(usize::MAX);
        let sets = index_sets(n, s, bound);
        let total = workers.map_reduce(
            0..sets.len() as u128,
            |r| {
                let mut acc = ring.zero();
                for i in r {
                    ring.add_assign(&mut acc, &principal_minor(ring, m, &sets[i as usize]));
                }
                acc
            },
            ring.zero(),
            |a, b| ring.add(&a, &b),
        );
        let cs = if s % 2 == 1 { ring.neg(&total) } else { total };
        log::debug!("c_{s}: {} index sets, cutoff {cutoff}", sets.len());
        out.push(ring.reading_below(&cs, &cutoff));
    }
    Ok(out)
}

/// Slopes `< 1` of the Newton polygon of `1 + Σ c_s t^s` in q-adic units
/// (`v_p / h`), provided the bounded readings cannot change them.
pub fn fredholm_slopes_below_one(readings: &[Reading], h: u32) -> Result<(NewtonPolygon, Vec<BigRational>)> {
    let scaled: Vec<Reading> = readings.iter().map(|r| r.scaled_down(h)).collect();
    let mut points = vec![(0i64, ValuationQ::zero())];
    for (i, r) in scaled.iter().enumerate() {
        if let Reading::Exact(v) = r {
            points.push((i as i64 + 1, ValuationQ::Finite(v.clone())));
        }
    }
    let np = lower_hull(&points);
    let one = rat_int(1);
    let slopes = np.slopes_below(&one);
    let x0 = slopes.len() as i64;
    let y0 = np
        .value_at(x0)
        .ok_or_else(|| Error::Truncation("no certified coefficients".into()))?;
    if !np.slopes().iter().any(|s| s >= &one) {
        return Err(Error::Truncation(
            "the polygon never reaches slope 1; raise the Fredholm depth or truncation".into(),
        ));
    }
    for (i, r) in scaled.iter().enumerate() {
        if let Reading::AtLeast(b) = r {
            let s = i as i64 + 1;
            let need = if s <= x0 {
                np.value_at(s).expect("inside the hull")
            } else {
                y0.clone() + rat_int(s - x0)
            };
            if b < &need {
                return Err(Error::Precision(format!(
                    "c_{s} is only known to have valuation >= {b}, which does not certify the slopes below 1"
                )));
            }
        }
    }
    Ok((np, slopes))
}

/// One row of Zhu's test with `β_s = s/d`:
/// `Σ_{s<i} β_s <= v(det A[i]) <= (β_i - β_{i-1})/2 + Σ_{s<i} β_s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZhuRow {
    pub i: usize,
    #[serde(serialize_with = "ser::rational")]
    pub lower: BigRational,
    #[serde(serialize_with = "ser::rational")]
    pub value: BigRational,
    #[serde(serialize_with = "ser::rational")]
    pub upper: BigRational,
    pub pass: bool,
}

pub fn check_zhu_hypothesis(ring: &EisensteinRing, m: &DworkMatrix, d: u32, depth: usize) -> Result<Vec<ZhuRow>> {
    (1..=depth)
        .map(|i| {
            let idx: Vec<usize> = (0..i).collect();
            let value = principal_minor_valuation(ring, m, &idx)?;
            let lower = rat((i * (i - 1) / 2) as i64, d as i64);
            let upper = lower.clone() + rat(1, 2 * d as i64);
            let pass = lower <= value && value <= upper;
            Ok(ZhuRow { i, lower, value, upper, pass })
        })
        .collect()
}

/// `v(det A[s+1])` for `s = 0..upto`.
pub fn leading_minor_valuations(ring: &EisensteinRing, m: &DworkMatrix, upto: usize) -> Result<Vec<BigRational>> {
    (1..=upto)
        .map(|s| principal_minor_valuation(ring, m, &(0..s).collect::<Vec<_>>()))
        .collect()
}

/// Leading-term statements about `F_{pi-j}`, `1 <= i, j <= d-1`, `p = kd - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntryCheck {
    pub i: usize,
    pub j: usize,
    pub statement: String,
    pub observed: String,
    pub pass: bool,
}

fn at_least_check(ring: &EisensteinRing, x: &EisensteinElt, bound: &BigRational) -> Result<(String, bool)> {
    let r = ring.reading(x);
    if let Reading::AtLeast(b) = &r {
        if b < bound {
            return Err(Error::Precision(format!("cannot certify valuation >= {bound}: only >= {b} visible")));
        }
    }
    Ok((r.to_string(), r.at_least(bound)))
}

pub fn entry_leading_terms(ring: &EisensteinRing, data: &SplittingData) -> Result<Vec<EntryCheck>> {
    let d = data.d as usize;
    let p = ring.p() as usize;
    if !(p + 1).is_multiple_of(d) {
        return Err(Error::InvalidInput(format!("need p ≡ -1 mod d, got p = {p}, d = {d}")));
    }
    let k = (p + 1) / d;
    let e = ring.e() as i64;
    let zq = ring.zq();
    // the a = 1 lemma matrix supplies 1/((ki-i-j)! (i+j)!)
    let lemma_m = build_m(&LemmaParams::new(data.d, p as u64, 1, d - 1)?);
    let mut out = Vec::new();
    for i in 1..d {
        for j in 1..d {
            let f = f_coeff(ring, data, p * i - j)?;
            if i + j < d {
                // F = γ^{ki} (a_ij + O(γ)), a_ij = â^{i+j} / ((ki-i-j)! (i+j)!)
                let r = &lemma_m[i - 1][j - 1];
                let a_ij = ring.mul(&ring.from_rational(r)?, &ring.from_zq(&zq.pow(&data.a_hat, (i + j) as u128)));
                let lead = ring.mul(&ring.pow(&data.gamma, (k * i) as u128), &a_ij);
                let bound = rat((k * i) as i64 + 1, e);
                let (observed, pass) = at_least_check(ring, &ring.sub(&f, &lead), &bound)?;
                out.push(EntryCheck { i, j, statement: format!("v(F - γ^{} a_ij) >= {bound}", k * i), observed, pass });
            } else {
                let want = rat((k * i) as i64 - 1, e);
                let r = ring.reading(&f);
                let pass = r == Reading::Exact(want.clone());
                if !pass && matches!(r, Reading::AtLeast(_)) {
                    return Err(Error::Precision(format!("v(F_{}) not visible", p * i - j)));
                }
                out.push(EntryCheck { i, j, statement: format!("v(F) = {want}"), observed: r.to_string(), pass });
                if i + j == d {
                    let fact: i64 = factorial((k * i - 1) as u32).try_into().map_err(|_| Error::Overflow("factorial".into()))?;
                    let diff = ring.sub(&ring.scale_int(&f, fact), &ring.pow(&data.gamma, (k * i - 1) as u128));
                    let bound = rat((k * i) as i64, e);
                    let (observed, pass) = at_least_check(ring, &diff, &bound)?;
                    out.push(EntryCheck {
                        i,
                        j,
                        statement: format!("v({}! F - γ^{}) >= {bound}", k * i - 1, k * i - 1),
                        observed,
                        pass,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_set_enumeration() {
        assert_eq!(index_sets(5, 2, 3), vec![vec![0, 1], vec![0, 2]]);
        assert_eq!(index_sets(4, 1, 10).len(), 4);
        assert!(index_sets(3, 4, 100).is_empty());
        // brute force comparison
        let n = 9;
        for s in 1..5 {
            for bound in 0..20 {
                let mut count = 0;
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() as usize == s {
                        let sum: usize = (0..n).filter(|b| mask & (1 << b) != 0).sum();
                        if sum < bound {
                            count += 1;
                        }
                    }
                }
                assert_eq!(index_sets(n, s, bound).len(), count, "s={s} bound={bound}");
            }
        }
    }

    #[test]
    fn cutoff_formula() {
        assert_eq!(truncation_cutoff(9, 1, 3), rat(3, 1));
        assert_eq!(truncation_cutoff(9, 4, 3), rat(4, 1));
    }

    #[test]
    fn slopes_need_certification() {
        let ex = |n, d| Reading::Exact(rat(n, d));
        let r = vec![ex(0, 1), ex(1, 2), ex(1, 1), ex(2, 1)];
        let (_, slopes) = fredholm_slopes_below_one(&r, 1).unwrap();
        assert_eq!(slopes, vec![rat(0, 1), rat(1, 2), rat(1, 2)]);
        let weak = vec![ex(0, 1), ex(1, 2), ex(1, 1), Reading::AtLeast(rat(3, 2))];
        assert!(fredholm_slopes_below_one(&weak, 1).is_err());
        let strong = vec![ex(0, 1), ex(1, 2), ex(1, 1), ex(2, 1), Reading::AtLeast(rat(3, 1))];
        assert!(fredholm_slopes_below_one(&strong, 1).is_ok());
    }
}
