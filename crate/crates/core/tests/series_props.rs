use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};
use proptest::prelude::*;

use orbimirror::exact_math::{int, rat, Rational};
use orbimirror::series_engine::{eval_complex, PuiseuxSeries, Roster, Var};

const ORDER: i64 = 6;

fn roster() -> Arc<Roster> {
    Roster::new(vec![Var::exponentiated("x", 2), Var::exponentiated("y", 1)])
}

/// Terms `(i/2, j)` with small rational coefficients, `0 < i/2 + j ≤ ORDER`.
fn series() -> impl Strategy<Value = PuiseuxSeries> {
    prop::collection::vec(((0i64..=8, 0i64..=4), (-6i64..=6, 1i64..=4)), 0..8).prop_map(|terms| {
        let r = roster();
        let mut s = PuiseuxSeries::zero(&r, Some(int(ORDER)));
        for ((i, j), (p, q)) in terms {
            if i + j == 0 {
                continue;
            }
            let m = PuiseuxSeries::monomial(&r, &[rat(i, 2), int(j)], rat(p, q), None).unwrap();
            s = s.add(&m).unwrap();
        }
        s
    })
}

fn well_formed(s: &PuiseuxSeries) -> bool {
    let order = s.order();
    s.terms().iter().all(|(e, c)| {
        let deg = s.degree_of(e).unwrap();
        !c.is_zero() && order.as_ref().map_or(true, |o| deg <= *o)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn products_are_well_formed_and_commutative(a in series(), b in series()) {
        let ab = a.mul(&b).unwrap();
        prop_assert!(well_formed(&ab));
        prop_assert!(ab.agrees_with(&b.mul(&a).unwrap()));
    }

    #[test]
    fn product_is_associative(a in series(), b in series(), c in series()) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(left.agrees_with(&right));
    }

    #[test]
    fn sums_cancel(a in series()) {
        let z = a.sub(&a).unwrap();
        prop_assert!(z.is_zero());
        prop_assert!(well_formed(&a.add(&a).unwrap()));
    }

    #[test]
    fn exp_and_log_are_inverse(a in series()) {
        let e = a.exp().unwrap();
        prop_assert!(well_formed(&e));
        prop_assert!(e.log().unwrap().agrees_with(&a));
        let one_plus = PuiseuxSeries::one(&roster(), None).add(&a).unwrap();
        prop_assert!(one_plus.log().unwrap().exp().unwrap().agrees_with(&one_plus));
    }

    #[test]
    fn rational_powers_compose(a in series(), p in -3i64..=3, q in 1i64..=3) {
        let one_plus = PuiseuxSeries::one(&roster(), None).add(&a).unwrap();
        let root = one_plus.pow_rational(&rat(1, q)).unwrap();
        let mut back = PuiseuxSeries::one(&roster(), None);
        for _ in 0..q {
            back = back.mul(&root).unwrap();
        }
        prop_assert!(back.agrees_with(&one_plus));
        let lhs = one_plus.pow_rational(&rat(p, q)).unwrap();
        let rhs = root.pow_rational(&int(p)).unwrap();
        prop_assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn json_round_trip(a in series()) {
        let text = a.to_json_string();
        let back = PuiseuxSeries::from_json_str(&text).unwrap();
        prop_assert_eq!(back.to_json_string(), text);
        prop_assert!(back.agrees_with(&a));
    }

    #[test]
    fn evaluation_is_finite_and_additive(a in series(), b in series(), x in 0.01f64..0.5, y in 0.01f64..0.5, t in -3.0f64..3.0) {
        let point = [Complex64::from_polar(x, t), Complex64::new(y, 0.0)];
        let va = eval_complex(&a, &point).unwrap().value;
        let vb = eval_complex(&b, &point).unwrap().value;
        let vs = eval_complex(&a.add(&b).unwrap(), &point).unwrap().value;
        prop_assert!(va.re.is_finite() && va.im.is_finite());
        prop_assert!((vs - va - vb).norm() <= 1e-12 * (1.0 + va.norm() + vb.norm()));
    }

    #[test]
    fn truncation_drops_high_degrees(a in series(), k in 1i64..=ORDER) {
        let t = a.truncate(&int(k));
        prop_assert!(t.terms().iter().all(|(e, _)| t.degree_of(e).unwrap() <= int(k)));
        prop_assert!(t.agrees_with(&a));
        prop_assert_eq!(t.order(), Some(int(k)));
    }
}

#[test]
fn log_of_one() {
    let r = roster();
    assert!(PuiseuxSeries::one(&r, None).log().is_err(), "log needs a truncation order");
    let one = PuiseuxSeries::one(&r, Some(int(ORDER)));
    assert_eq!(one.constant_term(), Rational::one());
    assert!(one.log().unwrap().is_zero());
}
