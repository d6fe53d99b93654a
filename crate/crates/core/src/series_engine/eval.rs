//! Numeric evaluation on the principal branch.

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use super::{PuiseuxSeries, SeriesError};
use crate::exact_math::to_f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: Complex64,
    /// Sum of absolute values of the terms in the highest stored degree.
    pub tail_estimate: f64,
}

/// Evaluates `s` at one point per variable. Fractional powers use the principal branch and
/// are undefined on the closed negative real axis.
pub fn eval_complex(s: &PuiseuxSeries, point: &[Complex64]) -> Result<Evaluation, SeriesError> {
    let roster = s.roster();
    if point.len() != roster.len() {
        return Err(SeriesError::RosterMismatch);
    }
    let logs: Vec<Option<Complex64>> = point.iter().map(|z| (!z.is_zero()).then(|| z.ln())).collect();
    let mut value = Complex64::zero();
    let mut top_degree = i64::MIN;
    let mut tail = 0.0;
    for (k, c) in s.raw_terms() {
        let mut term = Complex64::new(to_f64(c), 0.0);
        for (i, &ki) in k.iter().enumerate() {
            if ki == 0 {
                continue;
            }
            let var = &roster.vars()[i];
            let denom = i64::from(var.denom);
            let z = point[i];
            let factor = if ki % denom == 0 {
                let e = ki / denom;
                if z.is_zero() && e < 0 {
                    return Err(SeriesError::Overflow);
                }
                z.powi(i32::try_from(e).map_err(|_| SeriesError::Overflow)?)
            } else {
                if z.im == 0.0 && z.re <= 0.0 {
                    if z.re == 0.0 && ki > 0 {
                        Complex64::zero()
                    } else {
                        return Err(SeriesError::BranchCutViolation(format!(
                            "{} = {} with exponent {}/{}",
                            var.name, z, ki, denom
                        )));
                    }
                } else {
                    let log = logs[i].expect("nonzero point");
                    (log * (ki as f64 / denom as f64)).exp()
                }
            };
            term *= factor;
        }
        if !term.re.is_finite() || !term.im.is_finite() {
            return Err(SeriesError::Overflow);
        }
        let d = roster.degree(k);
        if d > top_degree {
            top_degree = d;
            tail = term.norm();
        } else if d == top_degree {
            tail += term.norm();
        }
        value += term;
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(SeriesError::Overflow);
    }
    Ok(Evaluation { value, tail_estimate: tail })
}

#[cfg(test)]
mod tests {
    use super::super::{Roster, Var};
    use super::*;
    use crate::exact_math::{int, rat};

    #[test]
    fn square_root_on_principal_branch() {
        let r = Roster::new(vec![Var::exponentiated("q", 2)]);
        let s = PuiseuxSeries::monomial(&r, &[rat(1, 2)], int(1), None).unwrap();
        let v = eval_complex(&s, &[Complex64::new(0.0, 4.0)]).unwrap().value;
        assert!((v - Complex64::new(2f64.sqrt(), 2f64.sqrt())).norm() < 1e-14);
        assert!(matches!(
            eval_complex(&s, &[Complex64::new(-1.0, 0.0)]),
            Err(SeriesError::BranchCutViolation(_))
        ));
    }

    #[test]
    fn pole_overflows() {
        let r = Roster::new(vec![Var::exponentiated("q", 1)]);
        let s = PuiseuxSeries::monomial(&r, &[int(-1)], int(1), None).unwrap();
        assert_eq!(eval_complex(&s, &[Complex64::zero()]), Err(SeriesError::Overflow));
    }

    #[test]
    fn integer_powers_of_negative_reals_are_fine() {
        let r = Roster::new(vec![Var::formal("t")]);
        let s = PuiseuxSeries::monomial(&r, &[int(3)], int(2), None).unwrap();
        let e = eval_complex(&s, &[Complex64::new(-1.0, 0.0)]).unwrap();
        assert_eq!(e.value, Complex64::new(-2.0, 0.0));
        assert_eq!(e.tail_estimate, 2.0);
    }
}
