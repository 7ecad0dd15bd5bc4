use lslopes::dwork::{analyze, DworkOptions, Reading};
use lslopes::exact::rat;
use lslopes::lfunction::CurveConfig;
use lslopes::polygons::predict_theorem1;
use lslopes::BigRational;

fn sums(w: &[BigRational]) -> Vec<BigRational> {
    let mut acc = rat(0, 1);
    w.iter()
        .map(|x| {
            acc = acc.clone() + x;
            acc.clone()
        })
        .collect()
}

#[test]
fn leading_minors_follow_partial_slope_sums() {
    for (d, p) in [(3u32, 5u64), (4, 7), (5, 19)] {
        let cfg = CurveConfig::prime_field(p, d, 1, 1).unwrap();
        let r = analyze(&cfg, &DworkOptions::default()).unwrap();
        let w = predict_theorem1(d, p, 1).slopes;
        assert_eq!(r.minor_valuations, sums(&w), "d={d} p={p}");
        assert!(r.zhu_holds());
        assert!(r.entries_hold(), "{:?}", r.entry_checks);
        assert_eq!(r.slopes, w, "d={d} p={p}");
    }
}

#[test]
fn nineteen_values() {
    let cfg = CurveConfig::prime_field(19, 5, 1, 1).unwrap();
    let r = analyze(&cfg, &DworkOptions::default()).unwrap();
    assert_eq!(r.minor_valuations[1..], [rat(2, 9), rat(6, 9), rat(11, 9), rat(2, 1)]);
}

#[test]
fn other_coefficients_give_the_same_minors() {
    for a in 2..5 {
        let cfg = CurveConfig::prime_field(5, 3, a, 1).unwrap();
        let r = analyze(&cfg, &DworkOptions::default()).unwrap();
        assert_eq!(r.minor_valuations, vec![rat(0, 1), rat(1, 2), rat(1, 1)]);
        assert_eq!(r.fredholm_valuations[0], Reading::Exact(rat(0, 1)));
    }
}

#[test]
fn quadratic_extension_product() {
    let cfg = CurveConfig::new(5, 2, 3, &[0, 1], 1).unwrap();
    let opts = DworkOptions { truncation: Some(15), pi_digits: Some(40), ..DworkOptions::default() };
    let r = analyze(&cfg, &opts).unwrap();
    assert_eq!(r.slopes, vec![rat(0, 1), rat(1, 2), rat(1, 2)]);
}
