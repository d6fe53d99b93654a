//! Analytic continuation of `log Q_1` for `P(1,…,1,n)` and the resulting change of variables.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use super::gamma::gamma;
use super::{weighted_projective, CrcError};
use crate::exact_math::{factorial, floor_int, fmt_rational, to_f64, Rational};
use crate::extended_fan::build_extended;
use crate::mirror_engine::mirror_map;
use crate::series_engine::{PuiseuxSeries, Roster, Substitution, Var};

/// Truncated power series in one variable with complex coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexSeries {
    pub coeffs: Vec<Complex64>,
}

impl ComplexSeries {
    pub fn zero(len: usize) -> Self {
        ComplexSeries { coeffs: vec![Complex64::zero(); len] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexSeries { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.len().min(other.len());
        ComplexSeries { coeffs: (0..len).map(|k| self.coeffs[k] + other.coeffs[k]).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.len().min(other.len());
        let mut out = vec![Complex64::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                out[i + j] += a * b;
            }
        }
        ComplexSeries { coeffs: out }
    }

    /// `exp(f)` through the same length, from `k f_k = Σ_j j a_j f_{k−j}`.
    pub fn exp(&self) -> Self {
        let len = self.len();
        let mut out = vec![Complex64::zero(); len];
        if len == 0 {
            return ComplexSeries { coeffs: out };
        }
        out[0] = self.coeffs[0].exp();
        for k in 1..len {
            let mut acc = Complex64::zero();
            for j in 1..=k {
                acc += self.coeffs[j] * out[k - j] * j as f64;
            }
            out[k] = acc / k as f64;
        }
        ComplexSeries { coeffs: out }
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::zero(), |acc, c| acc * x + c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// `log Q_1 = c_0 + Σ_{l=1}^{n−1} c_l S_l(η)` with `η = y_1^{−1/n} y_2` and
/// `S_l(η) = Σ_k (−1)^{nk}/(nk+l)! ((l/n)_k)^n η^{nk+l}`.
#[derive(Debug, Clone)]
pub struct ContinuationFormula {
    pub n: u32,
    pub parity: Parity,
    /// Branch constant `c_0`.
    pub constant: Complex64,
    /// `(l, c_l)`.
    pub coefficients: Vec<(u32, Complex64)>,
    /// Exact `S_l` in the variable `eta`.
    pub inner: Vec<PuiseuxSeries>,
    pub order: Rational,
    pub symbolic: Option<String>,
}

impl ContinuationFormula {
    /// Coefficients of `log Q_1` in `η` through the order.
    pub fn log_q1_eta(&self) -> ComplexSeries {
        let len = floor_int(&self.order).to_usize().unwrap_or(0) + 1;
        let mut out = ComplexSeries::zero(len);
        out.coeffs[0] += self.constant;
        for ((_, c), s) in self.coefficients.iter().zip(&self.inner) {
            for (exps, v) in s.terms() {
                let k = exps[0].to_integer().to_usize().expect("integer exponent");
                if k < len {
                    out.coeffs[k] += c * to_f64(&v);
                }
            }
        }
        out
    }

    /// `log Q_1` at a numeric `η`.
    pub fn eval(&self, eta: Complex64) -> Complex64 {
        self.log_q1_eta().eval(eta)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "parity": self.parity,
            "order": fmt_rational(&self.order),
            "constant": self.constant,
            "coefficients": self.coefficients.iter().map(|(l, c)| json!({"l": l, "value": c})).collect::<Vec<_>>(),
            "inner": self.inner.iter().map(PuiseuxSeries::to_json).collect::<Vec<_>>(),
            "log_Q2": "(log y1 - log Q1)/n",
            "symbolic": self.symbolic,
        })
    }
}

fn eta_roster() -> Arc<Roster> {
    Roster::new(vec![Var::formal("eta")])
}

/// The continuation of `log Q_1(U_1)` to small `η`, with Γ values in double precision.
pub fn continuation_wpn(n: u32, order: &Rational) -> Result<ContinuationFormula, CrcError> {
    if n < 2 {
        return Err(CrcError::UnsupportedN(n));
    }
    let parity = if n % 2 == 0 { Parity::Even } else { Parity::Odd };
    let nf = f64::from(n);
    let roster = eta_roster();
    let top = floor_int(order).to_i64().unwrap_or(0);
    let mut coefficients = Vec::new();
    let mut inner = Vec::new();
    for l in 1..n {
        let lf = f64::from(l);
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        let phase = match parity {
            Parity::Even => Complex64::from_polar(1.0, -lf * PI / nf),
            Parity::Odd => Complex64::one(),
        };
        let c = phase * (sign * PI / (gamma(1.0 - lf / nf).powi(n as i32) * (lf * PI / nf).sin()));
        coefficients.push((l, c));

        let mut s = PuiseuxSeries::zero(&roster, Some(order.clone()));
        let base = Rational::new(i64::from(l).into(), i64::from(n).into());
        let mut rising = Rational::one();
        let mut k = 0i64;
        loop {
            let e = i64::from(n) * k + i64::from(l);
            if e > top {
                break;
            }
            let sign = if (i64::from(n) * k) % 2 == 0 { Rational::one() } else { -Rational::one() };
            let mut p = Rational::one();
            for _ in 0..n {
                p *= &rising;
            }
            let coef = sign * p / Rational::from_integer(factorial(e as u64));
            s = s.add(&PuiseuxSeries::monomial(&roster, &[Rational::from_integer(e.into())], coef, None)?)?;
            rising *= &base + Rational::from_integer(k.into());
            k += 1;
        }
        inner.push(s);
    }
    let constant = match parity {
        Parity::Even => Complex64::new(0.0, -PI),
        Parity::Odd => Complex64::zero(),
    };
    let symbolic = (n == 2).then(|| {
        "log Q1 = -i*(pi - g(eta)), log Q2 = (1/2)*log y1 + (i/2)*(pi - g(eta)), eta = y1^(-1/2)*y2".to_string()
    });
    Ok(ContinuationFormula { n, parity, constant, coefficients, inner, order: order.clone(), symbolic })
}

/// `Q(q,τ)`: `log Q_1 = L(τ)` and `Q_2 = q_1^{1/n} e^{−L(τ)/n}`.
#[derive(Debug, Clone)]
pub struct ChangeOfVariables {
    pub n: u32,
    pub order: Rational,
    /// `L(τ)` as a series in `τ_2`.
    pub log_q1: ComplexSeries,
    pub affine: bool,
    pub caveat: Option<String>,
    pub symbolic: Option<String>,
}

impl ChangeOfVariables {
    /// `Q_1` as a series in `τ_2`.
    pub fn q1_series(&self) -> ComplexSeries {
        self.log_q1.exp()
    }

    /// `Q_2 / q_1^{1/n}` as a series in `τ_2`.
    pub fn q2_factor_series(&self) -> ComplexSeries {
        self.log_q1.scale(Complex64::new(-1.0 / f64::from(self.n), 0.0)).exp()
    }

    /// `(Q_1, Q_2)` at a point, principal branch for `q_1^{1/n}`.
    pub fn evaluate(&self, q1: Complex64, tau: Complex64) -> (Complex64, Complex64) {
        let l = self.log_q1.eval(tau);
        let root = if q1.is_zero() { Complex64::zero() } else { (q1.ln() / f64::from(self.n)).exp() };
        (l.exp(), root * (-l / f64::from(self.n)).exp())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "order": fmt_rational(&self.order),
            "log_Q1_in_tau2": self.log_q1.coeffs,
            "Q2": format!("q1^(1/{}) * exp(-log Q1 / {})", self.n, self.n),
            "affine": self.affine,
            "caveat": self.caveat,
            "symbolic": self.symbolic,
            "branch": super::BRANCH,
        })
    }
}

/// Composes the continuation with the inverse mirror map `η = u_2(τ)` of `P(1,…,1,n)`.
pub fn change_of_variables(n: u32, order: &Rational) -> Result<ChangeOfVariables, CrcError> {
    let formula = continuation_wpn(n, order)?;
    let ext = build_extended(&weighted_projective(n as usize))?;
    let mm = mirror_map(&ext, order)?;
    if !mm.inverse.components[0].is_zero() {
        return Err(CrcError::NotWeightedFamily("log y_1 receives corrections".into()));
    }
    let eta = mm.inverse.components[1].clone();
    let target = mm.a_roster.clone();
    let len = floor_int(order).to_usize().unwrap_or(0) + 1;
    let mut log_q1 = ComplexSeries::zero(len);
    log_q1.coeffs[0] = formula.constant;
    let mut known = order.clone();
    for ((_, c), s) in formula.coefficients.iter().zip(&formula.inner) {
        let composed = s.substitute(&[Substitution::Series(eta.clone())], &target)?;
        if let Some(o) = composed.order() {
            known = known.min(o);
        }
        for (exps, v) in composed.terms() {
            if !exps[0].is_zero() {
                return Err(CrcError::NotWeightedFamily("η depends on q_1".into()));
            }
            let k = exps[1].to_integer().to_usize().expect("integer exponent");
            if k < len {
                log_q1.coeffs[k] += c * to_f64(&v);
            }
        }
    }
    let keep = floor_int(&known).to_usize().unwrap_or(0) + 1;
    log_q1.coeffs.truncate(keep);
    let affine = log_q1.coeffs.iter().skip(2).all(|c| c.norm() <= 1e-12);
    let caveat = (!affine).then(|| {
        "flat structures near the large radius limit points are not preserved: Q(q) is not affine in tau".to_string()
    });
    let symbolic = (n == 2).then(|| "Q1 = exp(-i*(pi - tau2)), Q2 = q1^(1/2)*exp(i*(pi - tau2)/2)".to_string());
    Ok(ChangeOfVariables { n, order: known, log_q1, affine, caveat, symbolic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_math::int;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn n2_matches_closed_form() {
        // −i(π − g(η)) with g the mirror-map series of P(1,1,2).
        let f = continuation_wpn(2, &int(10)).unwrap();
        assert_eq!(f.coefficients.len(), 1);
        assert!(close(f.coefficients[0].1, Complex64::i(), 1e-13));
        let ext = build_extended(&weighted_projective(2)).unwrap();
        let mm = mirror_map(&ext, &int(10)).unwrap();
        let g = &mm.forward.components[1];
        let series = f.log_q1_eta();
        assert!(close(series.coeffs[0], Complex64::new(0.0, -PI), 1e-15));
        for k in 1..=10i64 {
            let exact = Complex64::new(0.0, to_f64(&g.coefficient(&[int(0), int(k)])));
            assert!(close(series.coeffs[k as usize], exact, 1e-12), "k = {k}");
        }
    }

    #[test]
    fn n3_leading_coefficients() {
        let f = continuation_wpn(3, &int(8)).unwrap();
        let s3 = 3f64.sqrt();
        let c1 = -2.0 * s3 * PI / (3.0 * 1.354_117_939_426_400_4f64.powi(3));
        let c2 = 2.0 * s3 * PI / (3.0 * 2.678_938_534_707_747_6f64.powi(3));
        assert!(close(f.coefficients[0].1, Complex64::new(c1, 0.0), 1e-12));
        assert!(close(f.coefficients[1].1, Complex64::new(c2, 0.0), 1e-12));
        assert!(f.constant.is_zero());
        // S_2 = η²/2 − (2/3)³ η⁵/5! + …
        assert_eq!(f.inner[1].coefficient(&[int(2)]), crate::exact_math::rat(1, 2));
        assert_eq!(f.inner[1].coefficient(&[int(5)]), crate::exact_math::rat(-8, 27 * 120));
    }

    #[test]
    fn n_below_two_is_rejected() {
        assert_eq!(continuation_wpn(1, &int(4)).unwrap_err(), CrcError::UnsupportedN(1));
    }

    #[test]
    fn n2_change_of_variables_is_affine() {
        let cv = change_of_variables(2, &int(10)).unwrap();
        assert!(cv.affine);
        assert!(close(cv.log_q1.coeffs[0], Complex64::new(0.0, -PI), 1e-15));
        assert!(close(cv.log_q1.coeffs[1], Complex64::i(), 1e-12));
        let (q1, q2) = cv.evaluate(Complex64::new(0.04, 0.0), Complex64::zero());
        assert!(close(q1, Complex64::new(-1.0, 0.0), 1e-15));
        assert!(close(q2, Complex64::new(0.0, 0.2), 1e-15));
        let (q1, _) = cv.evaluate(Complex64::new(0.04, 0.0), Complex64::new(PI, 0.0));
        assert!(close(q1, Complex64::one(), 1e-12));
    }

    #[test]
    fn n3_change_of_variables_is_not_affine() {
        let cv = change_of_variables(3, &int(8)).unwrap();
        assert!(!cv.affine);
        assert!(cv.caveat.is_some());
    }

    #[test]
    fn complex_exp_series() {
        let s = ComplexSeries { coeffs: vec![Complex64::zero(), Complex64::i(), Complex64::zero(), Complex64::zero()] };
        let e = s.exp();
        assert!(close(e.coeffs[2], Complex64::new(-0.5, 0.0), 1e-15));
        assert!(close(e.coeffs[3], Complex64::new(0.0, -1.0 / 6.0), 1e-15));
    }

    fn n2_change() -> &'static ChangeOfVariables {
        static CV: std::sync::OnceLock<ChangeOfVariables> = std::sync::OnceLock::new();
        CV.get_or_init(|| change_of_variables(2, &int(10)).unwrap())
    }

    proptest! {
        #[test]
        fn n2_branch_consistency(tau in -3.1f64..3.1, q in 1e-6f64..0.05) {
            let (q1, q2) = n2_change().evaluate(Complex64::new(q, 0.0), Complex64::new(tau, 0.0));
            prop_assert!((q1.norm() - 1.0).abs() <= 1e-12);
            prop_assert!((q2.norm() - q.sqrt()).abs() <= 1e-12);
        }
    }
}
