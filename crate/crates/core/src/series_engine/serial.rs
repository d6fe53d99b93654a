//! The Series JSON format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{PuiseuxSeries, Roster, SeriesError, Var};
use crate::exact_math::{fmt_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exp: Vec<String>,
    pub coef: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesJson {
    pub vars: Vec<String>,
    pub denoms: Vec<u32>,
    /// Integer, `"p/q"` string, or null for an exact polynomial.
    pub order: Value,
    pub terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub formal: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
}

impl PuiseuxSeries {
    pub fn to_json(&self) -> SeriesJson {
        let vars = self.roster.vars();
        let order = match self.order() {
            None => Value::Null,
            Some(o) if o.is_integer() => Value::from(o.to_integer().to_string().parse::<i64>().unwrap_or(0)),
            Some(o) => Value::String(fmt_rational(&o)),
        };
        let weights_trivial = vars.iter().all(|v| v.weight == Rational::from_integer(1.into()));
        SeriesJson {
            vars: vars.iter().map(|v| v.name.clone()).collect(),
            denoms: vars.iter().map(|v| v.denom).collect(),
            order,
            terms: self
                .terms()
                .into_iter()
                .map(|(e, c)| TermJson { exp: e.iter().map(fmt_rational).collect(), coef: fmt_rational(&c) })
                .collect(),
            formal: vars.iter().filter(|v| v.formal).map(|v| v.name.clone()).collect(),
            weights: (!weights_trivial).then(|| vars.iter().map(|v| fmt_rational(&v.weight)).collect()),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self, SeriesError> {
        let schema = |m: String| SeriesError::Schema(m);
        if j.vars.len() != j.denoms.len() {
            return Err(schema("vars and denoms differ in length".into()));
        }
        if j.denoms.contains(&0) {
            return Err(schema("denominator bound 0".into()));
        }
        let weights: Vec<Rational> = match &j.weights {
            None => vec![Rational::from_integer(1.into()); j.vars.len()],
            Some(w) if w.len() == j.vars.len() => {
                w.iter().map(|s| parse_rational(s).map_err(|e| schema(e.to_string()))).collect::<Result<_, _>>()?
            }
            Some(_) => return Err(schema("weights and vars differ in length".into())),
        };
        if let Some(f) = j.formal.iter().find(|f| !j.vars.contains(f)) {
            return Err(schema(format!("unknown formal variable {f}")));
        }
        let vars: Vec<Var> = j
            .vars
            .iter()
            .zip(&j.denoms)
            .zip(weights)
            .map(|((name, &denom), weight)| Var { name: name.clone(), formal: j.formal.contains(name), denom, weight })
            .collect();
        let roster = Roster::new(vars);
        let order = match &j.order {
            Value::Null => None,
            Value::Number(n) => Some(Rational::from_integer(
                n.as_i64().ok_or_else(|| schema("order must be an integer".into()))?.into(),
            )),
            Value::String(s) => Some(parse_rational(s).map_err(|e| schema(e.to_string()))?),
            _ => return Err(schema("order has the wrong type".into())),
        };
        let mut terms = BTreeMap::new();
        for t in &j.terms {
            let exps: Vec<Rational> =
                t.exp.iter().map(|s| parse_rational(s).map_err(|e| schema(e.to_string()))).collect::<Result<_, _>>()?;
            let k = roster.encode(&exps)?;
            let c = parse_rational(&t.coef).map_err(|e| schema(e.to_string()))?;
            if terms.insert(k, c).is_some() {
                return Err(schema("repeated exponent".into()));
            }
        }
        let order_units = order.map(|o| roster.to_units(&o));
        Ok(PuiseuxSeries::from_parts(roster, order_units, terms))
    }

    pub fn from_json_str(s: &str) -> Result<Self, SeriesError> {
        let j: SeriesJson = serde_json::from_str(s).map_err(|e| SeriesError::Schema(e.to_string()))?;
        Self::from_json(&j)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("series serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_math::{int, rat};

    #[test]
    fn round_trip() {
        let r = Roster::new(vec![Var::exponentiated("q1", 2), Var::formal("t2")]);
        let s = PuiseuxSeries::monomial(&r, &[rat(1, 2), int(3)], rat(-1, 24), Some(int(8)))
            .unwrap()
            .add(&PuiseuxSeries::monomial(&r, &[int(0), int(1)], int(1), None).unwrap())
            .unwrap();
        let text = s.to_json_string();
        assert!(text.contains("\"1/2\""));
        assert!(text.contains("\"formal\""));
        assert_eq!(PuiseuxSeries::from_json_str(&text).unwrap(), s);
    }

    #[test]
    fn denominator_violation_is_reported() {
        let text = r#"{"vars":["q"],"denoms":[2],"order":4,"terms":[{"exp":["1/3"],"coef":"1"}]}"#;
        assert!(matches!(PuiseuxSeries::from_json_str(text), Err(SeriesError::Denominator { .. })));
    }
}
