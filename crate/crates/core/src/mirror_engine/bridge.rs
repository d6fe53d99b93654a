//! Open invariants as closed invariants of the compactification X̄.

use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::mirror_map::mirror_map_from;
use super::{a_roster, b_roster, default_gauge, extract_open_gw, i_function, lf_from_map, MirrorError, OpenGWEntry};
use crate::exact_math::{factorial, fmt_rational, solve_columns, Rational};
use crate::extended_fan::build_extended;
use crate::series_engine::{PuiseuxSeries, Substitution};
use crate::stacky_fan::{
    is_gorenstein, maslov_index_cw, star_subdivide_xbar, wall_curve_classes, DiscClass, FanError, StackyFan, XBar,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BridgeCheck {
    /// Potential term carrying `β`.
    pub term: usize,
    pub open: Vec<OpenGWEntry>,
    pub closed: Vec<OpenGWEntry>,
    pub agree: bool,
    #[serde(serialize_with = "crate::json::ser_rational")]
    pub order: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BridgeReport {
    pub xbar: XBar,
    /// `β̄` as rational ray coefficients on X̄.
    #[serde(serialize_with = "crate::json::ser_rationals")]
    pub beta_bar: Vec<Rational>,
    pub statement: String,
    /// Present when X̄ = X, where both sides come from the same I-function.
    pub check: Option<BridgeCheck>,
}

/// Builds `(X̄, β̄)` for a basic class of Maslov index 2 and, when X̄ = X, compares the open
/// invariants `n_{1,l,β}` with the closed point invariants read from the `1/z²` coefficient.
pub fn open_closed_bridge(fan: &StackyFan, beta: &DiscClass, order: &Rational) -> Result<BridgeReport, MirrorError> {
    if !is_gorenstein(fan)? {
        return Err(MirrorError::NotGorenstein);
    }
    if let Some(w) = wall_curve_classes(fan)?.into_iter().find(|w| w.c1 <= Rational::zero()) {
        return Err(MirrorError::NotFano(format!("wall {:?} has c1 = {}", w.wall, fmt_rational(&w.c1))));
    }
    if !beta.is_basic() {
        return Err(FanError::NonBasicClass.into());
    }
    if maslov_index_cw(beta).chern_weil != Rational::from_integer(2.into()) {
        return Err(FanError::NonBasicClass.into());
    }
    let xbar = star_subdivide_xbar(fan, beta)?;
    let beta_bar = xbar.beta_bar.expanded();
    let insertion = match beta.box_terms.first() {
        Some(t) => format!("1_ν for ν = {}", t.element.vector),
        None => "no orbifold insertion".to_string(),
    };
    let statement = format!(
        "n_{{1,l,β}}([pt]_L; {insertion}, …) = ⟨[pt], …⟩_{{0,l+1,β̄}} on X̄ with β̄ = ({})",
        beta_bar.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
    );
    let same = xbar.fan.rays() == fan.rays() && {
        let mut a = xbar.fan.max_cones().to_vec();
        let mut b = fan.max_cones().to_vec();
        a.sort();
        b.sort();
        a == b
    };
    let check = if same { Some(cross_check(fan, beta, &beta_bar, order)?) } else { None };
    Ok(BridgeReport { xbar, beta_bar, statement, check })
}

fn cross_check(
    fan: &StackyFan,
    beta: &DiscClass,
    beta_bar: &[Rational],
    order: &Rational,
) -> Result<BridgeCheck, MirrorError> {
    let ext = build_extended(fan)?;
    let r = ext.r();
    let i = i_function(&ext, order, 2);
    let mm = mirror_map_from(&ext, &i)?;
    let term = match beta.box_terms.first() {
        None => beta.ray_mult.iter().position(|&k| k == 1).expect("basic ray class"),
        Some(t) => {
            ext.m() + ext.extra.iter().position(|e| e.vector == t.element.vector).ok_or(FanError::NonBasicClass)?
        }
    };
    let cols: Vec<Vec<Rational>> = (0..r).map(|a| ext.basis[a].coords()[..ext.m()].iter().map(|c| Rational::from_integer(c.clone())).collect()).collect();
    let lambda = solve_columns(&cols, beta_bar).ok_or(FanError::NonBasicClass)?;

    // Closed side: H⁰ part of the 1/z² coefficient, restricted to classes over β̄.
    let b = b_roster(&ext);
    let a = a_roster(&ext);
    let mut closed_b = PuiseuxSeries::zero(&b, Some(order.clone()));
    for (el, poly) in i.at_z_power(-2) {
        if !el.is_untwisted() || el.lambda != lambda {
            continue;
        }
        let c = poly.coefficient(&vec![0; r]);
        if c.is_zero() {
            continue;
        }
        let exps: Vec<Rational> = el.lambda.iter().chain(el.mu.iter()).cloned().collect();
        closed_b = closed_b.add(&PuiseuxSeries::monomial(&b, &exps, c, None)?)?;
    }
    let subs: Vec<Substitution> = (0..ext.r_ext())
        .map(|k| {
            if k < r {
                let mut monomial = vec![Rational::zero(); a.len()];
                monomial[k] = Rational::one();
                Substitution::Exponential { monomial, log_factor: mm.inverse.components[k].clone() }
            } else {
                Substitution::Series(mm.inverse.components[k].clone())
            }
        })
        .collect();
    let mut shift: Vec<Rational> = lambda.iter().map(|x| -x.clone()).collect();
    shift.resize(a.len(), Rational::zero());
    let closed_gf = closed_b.substitute(&subs, &a)?.mul_monomial(&shift, &Rational::one())?;

    let w = lf_from_map(&ext, &mm, &default_gauge(fan))?;
    let table = extract_open_gw(&w)?;
    let open: Vec<OpenGWEntry> = table.for_term(term).cloned().collect();
    let known = table.known_through[term].clone().min(closed_gf.order().unwrap_or_else(|| order.clone()));
    let closed: Vec<OpenGWEntry> = closed_gf
        .terms()
        .into_iter()
        .map(|(exps, c)| {
            let vars = a.vars();
            let class: Vec<Rational> = exps.iter().zip(vars).filter(|(_, v)| !v.formal).map(|(e, _)| e.clone()).collect();
            let l: Vec<u64> = exps
                .iter()
                .zip(vars)
                .filter(|(_, v)| v.formal)
                .map(|(e, _)| e.to_integer().to_u64().expect("formal exponent"))
                .collect();
            let lfact = l.iter().fold(Rational::one(), |acc, k| acc * Rational::from_integer(factorial(*k)));
            OpenGWEntry { term, class, l, value: c * lfact }
        })
        .collect();
    let within = |e: &&OpenGWEntry| -> bool {
        let deg = e.class.iter().fold(Rational::zero(), |acc, x| acc + x)
            + e.l.iter().fold(Rational::zero(), |acc, k| acc + Rational::from_integer((*k).into()));
        deg <= known
    };
    let mut lhs: Vec<&OpenGWEntry> = open.iter().filter(within).collect();
    let mut rhs: Vec<&OpenGWEntry> = closed.iter().filter(within).collect();
    lhs.sort_by(|x, y| (&x.class, &x.l).cmp(&(&y.class, &y.l)));
    rhs.sort_by(|x, y| (&x.class, &x.l).cmp(&(&y.class, &y.l)));
    let agree = lhs == rhs;
    Ok(BridgeCheck { term, open, closed, agree, order: known })
}
