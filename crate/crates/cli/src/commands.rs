//! One function per subcommand, each returning every output format at once.

use std::fmt::Write as _;
use std::fs;

use serde_json::{json, Value};

use orbimirror::crc_engine::{
    crc_verify, detect_weighted_family, glue_charts, specialization_check, verify_crepant, ResolutionPair,
};
use orbimirror::exact_math::{fmt_rational, Rational};
use orbimirror::extended_fan::{build_extended, keff_enumerate, ExtendedFanData};
use orbimirror::mirror_engine::{
    default_gauge, extract_open_gw, hori_vafa as hv, lf_superpotential, mirror_map as mm, open_closed_bridge, Chart,
    MirrorError, Potential,
};
use orbimirror::stacky_fan::{
    compute_box, is_gorenstein, star_subdivide_xbar, validate_fan, wall_curve_classes, DiscClass, StackyFan,
};

use crate::output::{CliError, Output};
use crate::{ChartArg, Common, PairArgs};

const SPECIALIZATION_TOL: f64 = 1e-12;
const SPECIALIZATION_Q: [f64; 2] = [0.01, 0.05];

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(input)
}

fn read_fan(path: &std::path::Path) -> Result<StackyFan, CliError> {
    let s = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    StackyFan::from_json_str(&s).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn valid_fan(path: &std::path::Path) -> Result<StackyFan, CliError> {
    let fan = read_fan(path)?;
    let report = validate_fan(&fan);
    if !report.is_valid() {
        return Err(CliError::Input(format!("{}: invalid fan: {}", path.display(), report.errors.join("; "))));
    }
    Ok(fan)
}

fn order(c: &Common) -> Rational {
    Rational::from_integer(c.order.into())
}

fn gauge(c: &Common, fan: &StackyFan) -> Result<Vec<usize>, CliError> {
    match &c.gauge {
        None => Ok(default_gauge(fan)),
        Some(s) => {
            let mut g = s
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::Input(format!("bad gauge index {t:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            g.sort_unstable();
            Ok(g)
        }
    }
}

fn extended(fan: &StackyFan) -> Result<ExtendedFanData, CliError> {
    build_extended(fan).map_err(input)
}

fn join(v: &[Rational]) -> String {
    v.iter().map(fmt_rational).collect::<Vec<_>>().join(";")
}

fn potential_text(w: &Potential) -> String {
    let mut s = format!("gauge {:?}\n", w.gauge);
    if let Some(st) = &w.status {
        let _ = writeln!(s, "status: {st}");
    }
    for t in &w.terms {
        let _ = writeln!(s, "z^{}: {}", t.vector, t.coefficient);
    }
    s
}

pub fn validate(c: &Common) -> Result<Output, CliError> {
    let fan = read_fan(&c.fan)?;
    let r = validate_fan(&fan);
    let json = json!({"valid": r.is_valid(), "simplicial": r.simplicial, "complete": r.complete, "errors": r.errors});
    let mut text = format!("valid: {}\nsimplicial: {}\ncomplete: {}\n", r.is_valid(), r.simplicial, r.complete);
    for e in &r.errors {
        let _ = writeln!(text, "error: {e}");
    }
    Ok(Output::new(json, text).verified(r.is_valid()))
}

pub fn box_elements(c: &Common) -> Result<Output, CliError> {
    let fan = valid_fan(&c.fan)?;
    let boxes = compute_box(&fan).map_err(input)?;
    let mut text = format!("{} Box' elements\n", boxes.len());
    let mut rows = vec![vec!["vector".into(), "cone".into(), "coefficients".into(), "age".into()]];
    for b in &boxes {
        let _ = writeln!(text, "{}  cone {:?}  t = ({})  age {}", b.vector, b.cone, join(&b.coefficients).replace(';', ", "), fmt_rational(&b.age));
        rows.push(vec![
            b.vector.to_string(),
            b.cone.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"),
            join(&b.coefficients),
            fmt_rational(&b.age),
        ]);
    }
    Ok(Output::new(to_json(&boxes)?, text).with_csv(rows))
}

pub fn check(c: &Common) -> Result<Output, CliError> {
    let fan = valid_fan(&c.fan)?;
    let gorenstein = is_gorenstein(&fan).map_err(input)?;
    let walls = wall_curve_classes(&fan).map_err(input)?;
    let mut c1: Vec<Rational> = walls.iter().map(|w| w.c1.clone()).collect();
    c1.sort();
    let semi_fano = c1.iter().all(|x| *x >= Rational::from_integer(0.into()));
    let fano = c1.iter().all(|x| *x > Rational::from_integer(0.into()));
    let json = json!({
        "gorenstein": gorenstein,
        "walls": to_json(&walls)?,
        "c1_multiset": c1.iter().map(fmt_rational).collect::<Vec<_>>(),
        "semi_fano": semi_fano,
        "fano": fano,
    });
    let mut text = format!("gorenstein: {gorenstein}\nsemi-fano: {semi_fano}\nfano: {fano}\n");
    let mut rows = vec![vec!["wall".into(), "cones".into(), "relation".into(), "c1".into()]];
    for w in &walls {
        let _ = writeln!(text, "wall {:?}: relation ({}) c1 = {}", w.wall, join(&w.relation).replace(';', ", "), fmt_rational(&w.c1));
        rows.push(vec![
            w.wall.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"),
            format!("{};{}", w.cones.0, w.cones.1),
            join(&w.relation),
            fmt_rational(&w.c1),
        ]);
    }
    Ok(Output::new(json, text).with_csv(rows))
}

pub fn keff(c: &Common) -> Result<Output, CliError> {
    let fan = valid_fan(&c.fan)?;
    let ext = extended(&fan)?;
    let mut elements = keff_enumerate(&ext, &order(c));
    elements.sort_by(|a, b| (&a.weight, &a.coords).cmp(&(&b.weight, &b.coords)));
    let mut text = format!("{} classes through weight {}\n", elements.len(), c.order);
    let mut rows = vec![vec!["coords".into(), "weight".into(), "w".into(), "sector".into()]];
    for e in &elements {
        let sector = e.nu.as_ref().map_or_else(|| "untwisted".to_string(), |nu| nu.vector.to_string());
        let _ = writeln!(text, "d = ({})  weight {}  w {}  sector {sector}", join(&e.coords).replace(';', ", "), fmt_rational(&e.weight), e.w);
        rows.push(vec![join(&e.coords), fmt_rational(&e.weight), e.w.to_string(), sector]);
    }
    Ok(Output::new(to_json(&elements)?, text).with_csv(rows))
}

pub fn hori_vafa(c: &Common, chart: ChartArg) -> Result<Output, CliError> {
    let fan = valid_fan(&c.fan)?;
    let ext = extended(&fan)?;
    let chart = match chart {
        ChartArg::Original => Chart::Original,
        ChartArg::Adapted => Chart::Adapted,
    };
    let w = hv(&ext, chart, &gauge(c, &fan)?).map_err(input)?;
    Ok(Output::new(to_json(&w.to_json())?, potential_text(&w)))
}

pub fn mirror_map(c: &Common) -> Result<Output, CliError> {
    let fan = valid_fan(&c.fan)?;
    let ext = extended(&fan)?;
    let map = mm(&ext, &order(c)).map_err(input)?;
    let mut text = String::new();
    for (i, s) in map.forward.components.iter().enumerate() {
        let v = &map.a_roster.vars()[i];
        let lhs = if v.formal { v.name.clone() } else { format!("log {} - log y{}", v.name, i + 1) };
        let _ = writeln!(text, "{lhs} = {s}");
    }
    for (i, s) in map.inverse.components.iter().enumerate() {
        let v = &map.b_roster.vars()[i];
        let lhs = if v.formal { v.name.clone() } else { format!("log {} - log q{}", v.name, i + 1) };
        let _ = writeln!(text, "{lhs} = {s}");
    }
    Ok(Output::new(map.to_json(), text))
}

pub fn superpotential(c: &Common) -> Result<Output, CliError> {
    let fan = valid_fan(&c.fan)?;
    let ext = extended(&fan)?;
    let w = lf_superpotential(&ext, &order(c), &gauge(c, &fan)?).map_err(input)?;
    Ok(Output::new(to_json(&w.to_json())?, potential_text(&w)))
}

pub fn open_gw(c: &Common) -> Result<Output, CliError> {
    let fan = valid_fan(&c.fan)?;
    let ext = extended(&fan)?;
    let w = lf_superpotential(&ext, &order(c), &gauge(c, &fan)?).map_err(input)?;
    let table = match extract_open_gw(&w) {
        Ok(t) => t,
        Err(e @ MirrorError::BasicNotOne(_)) => return Err(CliError::Verification(e.to_string())),
        Err(e) => return Err(input(e)),
    };
    let mut json = to_json(&table)?;
    json["status"] = json!(w.status);
    let mut text = format!("status: {}\n", w.status.clone().unwrap_or_default());
    let mut rows = vec![vec!["term".into(), "class".into(), "l".into(), "value".into()]];
    for e in &table.entries {
        let l = e.l.iter().map(ToString::to_string).collect::<Vec<_>>().join(";");
        let _ = writeln!(text, "term {}  d = ({})  l = ({})  n = {}", e.term, join(&e.class).replace(';', ", "), l.replace(';', ", "), fmt_rational(&e.value));
        rows.push(vec![e.term.to_string(), join(&e.class), l, fmt_rational(&e.value)]);
    }
    Ok(Output::new(json, text).with_csv(rows))
}

fn parse_beta(spec: Option<&str>, fan: &StackyFan) -> Result<DiscClass, CliError> {
    let m = fan.num_rays();
    let boxes = compute_box(fan).map_err(input)?;
    let spec = match spec {
        Some(s) => s.to_string(),
        None if !boxes.is_empty() => "box:0".into(),
        None => "ray:0".into(),
    };
    let (kind, idx) = spec.split_once(':').ok_or_else(|| CliError::Input(format!("bad --beta {spec:?}")))?;
    let k: usize = idx.parse().map_err(|_| CliError::Input(format!("bad --beta index {idx:?}")))?;
    match kind {
        "ray" if k < m => Ok(DiscClass::basic_ray(m, k)),
        "box" if k < boxes.len() => Ok(DiscClass::basic_box(m, boxes[k].clone())),
        _ => Err(CliError::Input(format!("--beta {spec:?} is out of range"))),
    }
}

pub fn xbar(c: &Common, beta: Option<&str>) -> Result<Output, CliError> {
    let fan = valid_fan(&c.fan)?;
    let beta = parse_beta(beta, &fan)?;
    match open_closed_bridge(&fan, &beta, &order(c)) {
        Ok(report) => {
            let mut json = to_json(&report)?;
            json["xbar"]["fan"] = to_json(&report.xbar.fan.to_json())?;
            let mut text = format!("{}\n", report.statement);
            let _ = writeln!(text, "X-bar rays: {}", report.xbar.fan.rays().iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
            let verified = match &report.check {
                Some(ch) => {
                    let _ = writeln!(text, "cross-check (term {}): {}", ch.term, if ch.agree { "agree" } else { "DISAGREE" });
                    ch.agree
                }
                None => {
                    let _ = writeln!(text, "cross-check: X-bar differs from X, not computed");
                    true
                }
            };
            Ok(Output::new(json, text).verified(verified))
        }
        Err(e @ (MirrorError::NotGorenstein | MirrorError::NotFano(_))) => {
            let x = star_subdivide_xbar(&fan, &beta).map_err(input)?;
            let mut json = json!({"xbar": to_json(&x)?, "note": format!("no open/closed statement: {e}")});
            json["xbar"]["fan"] = to_json(&x.fan.to_json())?;
            let text = format!("X-bar rays: {}\nno open/closed statement: {e}\n", x.fan.rays().iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
            Ok(Output::new(json, text))
        }
        Err(e) => Err(input(e)),
    }
}

fn load_pair(c: &Common, p: &PairArgs) -> Result<(ResolutionPair, Option<u32>), CliError> {
    let x = valid_fan(&c.fan)?;
    let y = valid_fan(&p.resolution)?;
    let detected = build_extended(&x).ok().and_then(|e| detect_weighted_family(&e));
    if let (Some(n), Some(d)) = (p.wpn, detected) {
        if n != d {
            return Err(CliError::Input(format!("--wpn {n} given but X is P(1,…,1,{d})")));
        }
    }
    if p.wpn.is_some() && detected.is_none() {
        return Err(CliError::Input("--wpn given but X is not of the form P(1,…,1,n)".into()));
    }
    Ok((ResolutionPair::new(x, y), p.wpn.or(detected)))
}

pub fn crc(c: &Common, p: &PairArgs) -> Result<Output, CliError> {
    let (pair, n) = load_pair(c, p)?;
    let crepant = verify_crepant(&pair);
    let mut json = json!({"crepant": to_json(&crepant)?});
    let mut text = format!("crepant: {}\n", crepant.crepant);
    if !crepant.crepant {
        let _ = writeln!(text, "offending cones {:?}, new rays {:?}", crepant.offending_cones, crepant.new_rays.iter().map(|r| r.index).collect::<Vec<_>>());
        return Ok(Output::new(json, text).verified(false));
    }
    let gluing = glue_charts(&pair).map_err(input)?;
    json["gluing"] = gluing.to_json();
    for line in gluing.to_json()["y_in_U"].as_array().into_iter().flatten() {
        let _ = writeln!(text, "{}", line.as_str().unwrap_or_default());
    }
    let Some(n) = n else {
        let o = order(c);
        let wx = lf_superpotential(&extended(&pair.x)?, &o, &default_gauge(&pair.x)).map_err(input)?;
        let wy = lf_superpotential(&extended(&pair.y)?, &o, &default_gauge(&pair.y)).map_err(input)?;
        json["W_X"] = to_json(&wx.to_json())?;
        json["W_Y"] = to_json(&wy.to_json())?;
        json["note"] = json!("continuation not implemented for this family");
        let _ = writeln!(text, "continuation not implemented for this family\nW_X:\n{}W_Y:\n{}", potential_text(&wx), potential_text(&wy));
        return Ok(Output::new(json, text));
    };
    let report = crc_verify(&pair, n, &order(c), p.samples, p.tol).map_err(input)?;
    for ch in &report.checks {
        let _ = writeln!(text, "[{}] {}  max error {:.3e}", ch.status, ch.identity, ch.max_error);
    }
    for note in &report.notes {
        let _ = writeln!(text, "note: {note}");
    }
    let _ = writeln!(text, "status: {}", report.status);
    let ok = report.status == "pass";
    let rows = std::iter::once(vec!["identity".into(), "max_error".into(), "status".into()])
        .chain(report.checks.iter().map(|ch| vec![ch.identity.clone(), format!("{:e}", ch.max_error), ch.status.clone()]))
        .collect();
    json["report"] = to_json(&report)?;
    json["status"] = json!(report.status);
    Ok(Output::new(json, text).with_csv(rows).verified(ok))
}

pub fn specialize(c: &Common, p: &PairArgs) -> Result<Output, CliError> {
    let (pair, n) = load_pair(c, p)?;
    let n = n.ok_or_else(|| CliError::Input("specialize needs X = P(1,…,1,n) (pass --wpn)".into()))?;
    let tol = p.tol.min(SPECIALIZATION_TOL);
    let report = specialization_check(&pair, n, &order(c), &SPECIALIZATION_Q, tol).map_err(input)?;
    let mut text = format!(
        "Q1 at tau2 = 0: {}\nexceptional terms {:?}\nX side vanishes: {}\nexact zero: {}\n",
        report.q1_at_zero.clone().unwrap_or_default(),
        report.exceptional_terms,
        report.x_side_vanishes,
        report.exact_zero.map_or_else(|| "not evaluated".to_string(), |b| b.to_string()),
    );
    for (q, m) in &report.numeric {
        let _ = writeln!(text, "q1 = {q}: |exceptional| = {m:.3e}");
    }
    let _ = writeln!(text, "status: {}", report.status);
    let ok = report.status == "pass";
    Ok(Output::new(to_json(&report)?, text).verified(ok))
}
