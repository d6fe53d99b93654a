mod common;

use num_traits::{One, Zero};
use proptest::prelude::*;

use orbimirror::exact_math::{frac, int, Rational};
use orbimirror::extended_fan::{build_extended, keff_enumerate, ExtendedError, ExtendedFanData};
use orbimirror::mirror_engine::{extract_open_gw, hori_vafa, i_function, lf_superpotential, mirror_map, Chart, MirrorError};
use orbimirror::stacky_fan::StackyFan;

use common::{directions, labels, planar_fan};

fn extended(d: &[(i64, i64)], c: &[i64]) -> Option<(StackyFan, ExtendedFanData)> {
    let fan = planar_fan(d, c)?;
    match build_extended(&fan) {
        Ok(e) => Some((fan, e)),
        Err(ExtendedError::BasisShapeInfeasible(_)) => None,
        Err(e) => panic!("{e}"),
    }
}

fn as_rational(v: &[num_bigint::BigInt]) -> Vec<Rational> {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn basis_vectors_are_relations(d in directions(), c in labels(2)) {
        let Some((fan, ext)) = extended(&d, &c) else { return Ok(()) };
        for a in 0..ext.r_ext() {
            let mut sum = vec![Rational::zero(); fan.dim()];
            for j in 0..ext.m_ext() {
                let b = as_rational(ext.vector(j).coords());
                let k = Rational::from_integer(ext.d(a, j).clone());
                for (s, x) in sum.iter_mut().zip(b) {
                    *s += &k * x;
                }
            }
            prop_assert!(sum.iter().all(Zero::is_zero), "d_{} is not a relation", a + 1);
        }
    }

    #[test]
    fn twisted_sectors_are_fractional_parts(d in directions(), c in labels(2)) {
        let Some((fan, ext)) = extended(&d, &c) else { return Ok(()) };
        for e in keff_enumerate(&ext, &int(3)) {
            let mut nu = vec![Rational::zero(); fan.dim()];
            for (j, p) in e.pairings.iter().enumerate() {
                let f = frac(&-p);
                for (s, x) in nu.iter_mut().zip(as_rational(ext.vector(j).coords())) {
                    *s += &f * x;
                }
            }
            match &e.nu {
                None => prop_assert!(nu.iter().all(Zero::is_zero)),
                Some(b) => prop_assert_eq!(nu, b.vector.to_rational()),
            }
            prop_assert!(e.weight >= Rational::zero());
        }
    }

    #[test]
    fn i_function_is_normalized(d in directions(), c in labels(2)) {
        let Some((fan, ext)) = extended(&d, &c) else { return Ok(()) };
        let i = i_function(&ext, &int(3), 3);
        let zero = vec![Rational::zero(); ext.r_ext()];
        let base = i.entry(&zero).expect("constant entry");
        prop_assert_eq!(base.coefficients.len(), 1);
        prop_assert!(base.coefficients[&0].terms().values().all(One::is_one));
        for e in &i.entries {
            for poly in e.coefficients.values() {
                prop_assert!(poly.degree().unwrap_or(0) as usize <= fan.dim());
            }
        }
    }

    #[test]
    fn hori_vafa_meets_constraints_in_every_gauge(d in directions(), c in labels(2)) {
        let Some((fan, ext)) = extended(&d, &c) else { return Ok(()) };
        for gauge in fan.max_cones() {
            let w = hori_vafa(&ext, Chart::Original, gauge).unwrap();
            prop_assert_eq!(w.terms.len(), ext.m_ext());
            for j in gauge {
                prop_assert!(w.terms[*j].basic.iter().all(Zero::is_zero));
            }
            for a in 0..ext.r_ext() {
                for b in 0..ext.r_ext() {
                    let s = (0..ext.m_ext()).fold(Rational::zero(), |acc, j| {
                        acc + Rational::from_integer(ext.d(a, j).clone()) * &w.terms[j].basic[b]
                    });
                    prop_assert_eq!(s, if a == b { Rational::one() } else { Rational::zero() });
                }
            }
        }
    }

    #[test]
    fn mirror_map_round_trips_and_basic_entries_are_one(d in prop::collection::vec((-2i64..=2, -2i64..=2), 3..5), c in labels(2)) {
        let Some((fan, ext)) = extended(&d, &c) else { return Ok(()) };
        let mm = match mirror_map(&ext, &int(3)) {
            Ok(mm) => mm,
            Err(MirrorError::MirrorShapeViolation(_)) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        prop_assert!(mm.round_trip_exact().unwrap());
        let w = lf_superpotential(&ext, &int(3), &fan.max_cones()[0]).unwrap();
        prop_assert_eq!(w.terms.len(), ext.m_ext());
        let table = extract_open_gw(&w).unwrap();
        for j in 0..ext.m_ext() {
            let basic = table
                .for_term(j)
                .filter(|e| e.class.iter().all(Zero::is_zero))
                .min_by(|a, b| a.l.iter().sum::<u64>().cmp(&b.l.iter().sum::<u64>()))
                .expect("basic entry");
            prop_assert!(basic.value.is_one(), "term {}: {:?}", j, basic);
        }
    }
}

#[test]
fn fixed_fans_have_mirror_maps() {
    for fan in [common::p2(), common::p112(), common::f2(), common::p1_35()] {
        let ext = build_extended(&fan).unwrap();
        assert!(mirror_map(&ext, &int(5)).unwrap().round_trip_exact().unwrap());
    }
}
