//! The manifold description file format.
//!
//! Line-oriented UTF-8 with `#` comments. Sections:
//!
//! ```text
//! [chart]                      # must come first
//! dim = 3
//! coords = t q p
//! domain t = -1 1
//! periodic p = true            # optional, default false
//! orientation = 1              # optional, +1 or -1
//!
//! [metric]                     # component assignments, 0-based indices
//! g 0 0 = 1
//! g 2 2 = exp(2*t)             # g i j also sets g j i
//!
//! [connection nabla]           # Gamma^k_{ij}, k first
//! Gamma 0 1 1 = -2/sigma
//!
//! [tensor theta 1 1]           # r s: contravariant indices first
//! theta 2 1 = 1
//!
//! [form eta 1]                 # degree-k form; an assignment fills the
//! eta 0 = 1                    # whole sign orbit of its index tuple
//!
//! [vector xi]
//! xi 0 = 1
//!
//! [expect]                     # suite outcome declarations
//! duality = pass
//! killing = fail
//! ```
//!
//! Unassigned components default to zero. Duplicate assignments (including
//! through a form's sign orbit or the metric's symmetry) are errors.

use std::collections::BTreeMap;

use crate::chart::{Chart, ChartRef};
use crate::connection::Connection;
use crate::error::GeomError;
use crate::expr::{parse as parse_expr, Expr};
use crate::field::ScalarField;
use crate::manifold::{Expectation, Manifold};
use crate::suites::SUITE_NAMES;
use crate::tensor::{flat_index, Metric, TensorField};

fn err(line: usize, message: impl Into<String>) -> GeomError {
    GeomError::Precondition(format!("spec line {line}: {}", message.into()))
}

struct PendingTensor {
    name: String,
    r: usize,
    s: usize,
    is_form: bool,
    comps: Vec<Option<Expr>>,
    declared_line: usize,
}

enum Section {
    None,
    Chart,
    Metric,
    Connection,
    Tensor(usize),
    Expect,
}

struct ChartBuilder {
    dim: Option<usize>,
    coords: Vec<String>,
    domain: BTreeMap<String, (f64, f64)>,
    periodic: BTreeMap<String, bool>,
    orientation: i8,
}

/// Parse the manifold description text into a `Manifold` named `name`.
pub fn parse(text: &str, name: &str) -> Result<Manifold, GeomError> {
    let mut section = Section::None;
    let mut chart_b = ChartBuilder {
        dim: None,
        coords: Vec::new(),
        domain: BTreeMap::new(),
        periodic: BTreeMap::new(),
        orientation: 1,
    };
    let mut chart: Option<ChartRef> = None;
    let mut metric_comps: Vec<Option<Expr>> = Vec::new();
    let mut metric_line = 0usize;
    let mut connections: Vec<(String, Vec<Option<Expr>>, usize)> = Vec::new();
    let mut tensors: Vec<PendingTensor> = Vec::new();
    let mut expectations: BTreeMap<String, Expectation> = BTreeMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let mut parts = header.split_whitespace();
            let kind = parts.next().unwrap_or("");
            match kind {
                "chart" => {
                    section = Section::Chart;
                }
                "metric" | "connection" | "tensor" | "form" | "vector" | "expect" => {
                    // chart must be complete before any data section
                    if chart.is_none() && kind != "expect" {
                        chart = Some(finish_chart(&chart_b, line_no)?);
                    }
                    let n = chart.as_ref().map(|c| c.dim()).unwrap_or(0);
                    section = match kind {
                        "metric" => {
                            metric_comps = vec![None; n * n];
                            metric_line = line_no;
                            Section::Metric
                        }
                        "connection" => {
                            let cname = parts
                                .next()
                                .ok_or_else(|| err(line_no, "connection needs a name"))?;
                            connections.push((cname.to_string(), vec![None; n * n * n], line_no));
                            Section::Connection
                        }
                        "tensor" => {
                            let tname = parts
                                .next()
                                .ok_or_else(|| err(line_no, "tensor needs a name"))?;
                            let r: usize = parts
                                .next()
                                .and_then(|v| v.parse().ok())
                                .ok_or_else(|| err(line_no, "tensor needs valence `r s`"))?;
                            let s: usize = parts
                                .next()
                                .and_then(|v| v.parse().ok())
                                .ok_or_else(|| err(line_no, "tensor needs valence `r s`"))?;
                            tensors.push(PendingTensor {
                                name: tname.to_string(),
                                r,
                                s,
                                is_form: false,
                                comps: vec![None; n.pow((r + s) as u32)],
                                declared_line: line_no,
                            });
                            Section::Tensor(tensors.len() - 1)
                        }
                        "form" => {
                            let tname = parts
                                .next()
                                .ok_or_else(|| err(line_no, "form needs a name"))?;
                            let k: usize = parts
                                .next()
                                .and_then(|v| v.parse().ok())
                                .ok_or_else(|| err(line_no, "form needs a degree"))?;
                            if k > n {
                                return Err(err(line_no, format!("degree {k} exceeds dimension {n}")));
                            }
                            tensors.push(PendingTensor {
                                name: tname.to_string(),
                                r: 0,
                                s: k,
                                is_form: true,
                                comps: vec![None; n.pow(k as u32)],
                                declared_line: line_no,
                            });
                            Section::Tensor(tensors.len() - 1)
                        }
                        "vector" => {
                            let tname = parts
                                .next()
                                .ok_or_else(|| err(line_no, "vector needs a name"))?;
                            tensors.push(PendingTensor {
                                name: tname.to_string(),
                                r: 1,
                                s: 0,
                                is_form: false,
                                comps: vec![None; n],
                                declared_line: line_no,
                            });
                            Section::Tensor(tensors.len() - 1)
                        }
                        "expect" => Section::Expect,
                        _ => unreachable!(),
                    };
                }
                other => return Err(err(line_no, format!("unknown section `{other}`"))),
            }
            continue;
        }

        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, "expected `key = value`"))?;
        let lhs = lhs.trim();
        let rhs = rhs.trim();

        match &section {
            Section::None => return Err(err(line_no, "content before any section")),
            Section::Chart => {
                let mut words = lhs.split_whitespace();
                match words.next() {
                    Some("dim") => {
                        chart_b.dim =
                            Some(rhs.parse().map_err(|_| err(line_no, "bad dimension"))?);
                    }
                    Some("coords") => {
                        chart_b.coords = rhs.split_whitespace().map(|s| s.to_string()).collect();
                    }
                    Some("domain") => {
                        let coord = words
                            .next()
                            .ok_or_else(|| err(line_no, "domain needs a coordinate name"))?;
                        let mut vals = rhs.split_whitespace();
                        let a: f64 = vals
                            .next()
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| err(line_no, "domain needs two numbers"))?;
                        let b: f64 = vals
                            .next()
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| err(line_no, "domain needs two numbers"))?;
                        chart_b.domain.insert(coord.to_string(), (a, b));
                    }
                    Some("periodic") => {
                        let coord = words
                            .next()
                            .ok_or_else(|| err(line_no, "periodic needs a coordinate name"))?;
                        let flag = match rhs {
                            "true" => true,
                            "false" => false,
                            _ => return Err(err(line_no, "periodic must be true or false")),
                        };
                        chart_b.periodic.insert(coord.to_string(), flag);
                    }
                    Some("orientation") => {
                        chart_b.orientation = match rhs {
                            "1" | "+1" => 1,
                            "-1" => -1,
                            _ => return Err(err(line_no, "orientation must be +1 or -1")),
                        };
                    }
                    other => {
                        return Err(err(line_no, format!("unknown chart key {other:?}")));
                    }
                }
            }
            Section::Metric => {
                let c = chart.as_ref().unwrap();
                let n = c.dim();
                let idx = parse_indexed(lhs, "g", 2, n, line_no)?;
                let expr = parse_expr(rhs, c.coords()).map_err(|e| err(line_no, e.to_string()))?;
                let (i, j) = (idx[0], idx[1]);
                if metric_comps[i * n + j].is_some() {
                    return Err(err(line_no, format!("duplicate assignment g {i} {j}")));
                }
                metric_comps[i * n + j] = Some(expr.clone());
                if i != j {
                    // symmetry fill
                    metric_comps[j * n + i] = Some(expr);
                }
            }
            Section::Connection => {
                let c = chart.as_ref().unwrap();
                let n = c.dim();
                let idx = parse_indexed(lhs, "Gamma", 3, n, line_no)?;
                let expr = parse_expr(rhs, c.coords()).map_err(|e| err(line_no, e.to_string()))?;
                let (_, comps, _) = connections.last_mut().unwrap();
                let flat = (idx[0] * n + idx[1]) * n + idx[2];
                if comps[flat].is_some() {
                    return Err(err(line_no, "duplicate Christoffel assignment"));
                }
                comps[flat] = Some(expr);
            }
            Section::Tensor(ti) => {
                let c = chart.as_ref().unwrap();
                let n = c.dim();
                let t = &mut tensors[*ti];
                let rank = t.r + t.s;
                let idx = parse_indexed(lhs, &t.name, rank, n, line_no)?;
                let expr = parse_expr(rhs, c.coords()).map_err(|e| err(line_no, e.to_string()))?;
                if t.is_form && rank >= 2 {
                    let sign = crate::tensor::permutation_sign(&idx);
                    if sign == 0 {
                        return Err(err(line_no, "repeated index on a form component"));
                    }
                    // fill the whole sign orbit of the tuple
                    for (perm, psign) in permutations_signed(&idx) {
                        let flat = flat_index(n, &perm);
                        if t.comps[flat].is_some() {
                            return Err(err(
                                line_no,
                                format!("duplicate assignment {} {perm:?}", t.name),
                            ));
                        }
                        let signed = if psign == sign {
                            expr.clone()
                        } else {
                            Expr::neg(expr.clone())
                        };
                        t.comps[flat] = Some(signed);
                    }
                } else {
                    let flat = flat_index(n, &idx);
                    if t.comps[flat].is_some() {
                        return Err(err(
                            line_no,
                            format!("duplicate assignment {} {idx:?}", t.name),
                        ));
                    }
                    t.comps[flat] = Some(expr);
                }
            }
            Section::Expect => {
                if !SUITE_NAMES.contains(&lhs) {
                    return Err(err(
                        line_no,
                        format!("unknown suite `{lhs}` (known: {SUITE_NAMES:?})"),
                    ));
                }
                let outcome = match rhs {
                    "pass" => Expectation::Pass,
                    "fail" => Expectation::Fail,
                    _ => return Err(err(line_no, "expectation must be pass or fail")),
                };
                expectations.insert(lhs.to_string(), outcome);
            }
        }
    }

    let chart = match chart {
        Some(c) => c,
        None => finish_chart(&chart_b, text.lines().count())?,
    };
    let mut m = Manifold::new(name, chart.clone());
    m.expectations = expectations;

    if !metric_comps.is_empty() {
        let comps: Vec<Expr> = metric_comps
            .into_iter()
            .map(|c| c.unwrap_or_else(Expr::zero))
            .collect();
        m.metric = Some(
            Metric::new(chart.clone(), comps)
                .map_err(|e| err(metric_line, format!("invalid metric: {e}")))?,
        );
    }

    for (cname, comps, line) in connections {
        let fields: Vec<ScalarField> = comps
            .into_iter()
            .map(|c| ScalarField::from(c.unwrap_or_else(Expr::zero)))
            .collect();
        // certify vanishing torsion when it holds; keep the connection
        // (flagged) otherwise
        let conn = match Connection::new(chart.clone(), fields.clone(), true) {
            Ok(c) => c,
            Err(GeomError::SymmetryViolation { .. }) => {
                Connection::new(chart.clone(), fields, false)
                    .map_err(|e| err(line, format!("invalid connection: {e}")))?
            }
            Err(e) => return Err(err(line, format!("invalid connection: {e}"))),
        };
        m.connections.insert(cname, conn);
    }

    for t in tensors {
        let comps: Vec<ScalarField> = t
            .comps
            .into_iter()
            .map(|c| ScalarField::from(c.unwrap_or_else(Expr::zero)))
            .collect();
        let field = if t.is_form && t.s >= 2 {
            TensorField::form(chart.clone(), t.s, comps)
        } else {
            TensorField::new(chart.clone(), t.r, t.s, comps)
        }
        .map_err(|e| err(t.declared_line, format!("invalid field `{}`: {e}", t.name)))?;
        m.tensors.insert(t.name, field);
    }

    Ok(m)
}

fn finish_chart(b: &ChartBuilder, line: usize) -> Result<ChartRef, GeomError> {
    if b.coords.is_empty() {
        return Err(err(line, "chart section missing or empty (needs coords)"));
    }
    if let Some(d) = b.dim {
        if d != b.coords.len() {
            return Err(err(
                line,
                format!("dim = {d} but {} coordinates listed", b.coords.len()),
            ));
        }
    }
    let mut domain = Vec::new();
    let mut periodic = Vec::new();
    for c in &b.coords {
        domain.push(*b.domain.get(c).unwrap_or(&(-1.0, 1.0)));
        periodic.push(*b.periodic.get(c).unwrap_or(&false));
    }
    for key in b.domain.keys().chain(b.periodic.keys()) {
        if !b.coords.contains(key) {
            return Err(err(line, format!("`{key}` is not a chart coordinate")));
        }
    }
    Chart::new(
        b.coords.iter().map(|s| s.as_str()).collect(),
        domain,
        periodic,
        b.orientation,
    )
}

fn parse_indexed(
    lhs: &str,
    expect_name: &str,
    rank: usize,
    dim: usize,
    line: usize,
) -> Result<Vec<usize>, GeomError> {
    let mut words = lhs.split_whitespace();
    let name = words.next().unwrap_or("");
    if name != expect_name {
        return Err(err(
            line,
            format!("expected component of `{expect_name}`, got `{name}`"),
        ));
    }
    let idx: Vec<usize> = words
        .map(|w| w.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| err(line, "indices must be non-negative integers"))?;
    if idx.len() != rank {
        return Err(err(
            line,
            format!("expected {rank} indices, got {}", idx.len()),
        ));
    }
    for &i in &idx {
        if i >= dim {
            return Err(GeomError::IndexOutOfRange { index: i, dim });
        }
    }
    Ok(idx)
}

fn permutations_signed(idx: &[usize]) -> Vec<(Vec<usize>, i32)> {
    fn rec(items: &[usize]) -> Vec<Vec<usize>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let x = rest.remove(i);
            for mut tail in rec(&rest) {
                tail.insert(0, x);
                out.push(tail);
            }
        }
        out
    }
    rec(idx)
        .into_iter()
        .map(|p| {
            let s = crate::tensor::permutation_sign(&p);
            (p, s)
        })
        .collect()
}

/// Render a manifold back into the spec format. Fails when a component is
/// not closed-form (pointwise-solved fields have no expression to print).
pub fn export(m: &Manifold) -> Result<String, GeomError> {
    let chart = &m.chart;
    let n = chart.dim();
    let mut out = String::new();
    out.push_str("[chart]\n");
    out.push_str(&format!("dim = {n}\n"));
    out.push_str(&format!(
        "coords = {}\n",
        chart
            .coords()
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    ));
    for i in 0..n {
        let (a, b) = chart.domain()[i];
        out.push_str(&format!("domain {} = {a:?} {b:?}\n", chart.coord_name(i)));
        if chart.is_periodic(i) {
            out.push_str(&format!("periodic {} = true\n", chart.coord_name(i)));
        }
    }
    out.push_str(&format!("orientation = {}\n", chart.orientation()));

    if let Some(g) = &m.metric {
        out.push_str("\n[metric]\n");
        for i in 0..n {
            for j in i..n {
                let e = g.entry(i, j);
                if !e.is_zero() {
                    out.push_str(&format!("g {i} {j} = {e}\n"));
                }
            }
        }
    }

    for (name, conn) in &m.connections {
        out.push_str(&format!("\n[connection {name}]\n"));
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let f = conn.gamma(k, i, j);
                    if f.is_zero() {
                        continue;
                    }
                    let e = f
                        .as_closed()
                        .ok_or_else(|| GeomError::NotClosedForm(name.clone()))?;
                    out.push_str(&format!("Gamma {k} {i} {j} = {e}\n"));
                }
            }
        }
    }

    for (name, t) in &m.tensors {
        let (r, s) = t.valence();
        let header = if t.is_alternating() && r == 0 && s >= 1 {
            format!("\n[form {name} {s}]\n")
        } else if (r, s) == (1, 0) {
            format!("\n[vector {name}]\n")
        } else {
            format!("\n[tensor {name} {r} {s}]\n")
        };
        out.push_str(&header);
        let increasing_only = t.is_alternating() && r == 0 && s >= 2;
        for idx in crate::tensor::multi_indices(n, r + s) {
            if increasing_only && !idx.windows(2).all(|w| w[0] < w[1]) {
                continue;
            }
            let f = t.comp(&idx);
            if f.is_zero() {
                continue;
            }
            let e = f
                .as_closed()
                .ok_or_else(|| GeomError::NotClosedForm(name.clone()))?;
            let idx_str = idx
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            out.push_str(&format!("{name} {idx_str} = {e}\n"));
        }
    }

    if !m.expectations.is_empty() {
        out.push_str("\n[expect]\n");
        for (suite, outcome) in &m.expectations {
            out.push_str(&format!(
                "{suite} = {}\n",
                match outcome {
                    Expectation::Pass => "pass",
                    Expectation::Fail => "fail",
                }
            ));
        }
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::EvalCtx;

    const SAMPLE: &str = "\
# warped witness
[chart]
dim = 3
coords = t q p
domain t = -1 1
domain q = -1 1
domain p = -1 1

[metric]
g 0 0 = 1
g 1 1 = 1
g 2 2 = exp(2*t)

[form eta 1]
eta 0 = 1

[form omega 2]
omega 1 2 = 1

[vector xi]
xi 0 = 1

[expect]
duality = pass
killing = fail
";

    #[test]
    fn parses_sample() {
        let m = parse(SAMPLE, "sample").unwrap();
        assert_eq!(m.dim(), 3);
        assert!(m.metric.is_some());
        assert_eq!(m.expectations.len(), 2);
        let omega = m.omega().unwrap();
        let pt = [0.0, 0.0, 0.0];
        let ctx = EvalCtx::new(&m.chart, &pt);
        assert_eq!(omega.comp(&[1, 2]).eval(&ctx).unwrap(), 1.0);
        assert_eq!(omega.comp(&[2, 1]).eval(&ctx).unwrap(), -1.0);
    }

    #[test]
    fn reports_parse_errors_with_line() {
        let bad = "[chart]\ncoords = x y\n[metric]\ng 0 5 = 1\n";
        let e = parse(bad, "bad").unwrap_err();
        assert!(matches!(e, GeomError::IndexOutOfRange { .. }), "{e}");

        let bad2 = "[chart]\ncoords = x y\n[metric]\ng 0 0 = 1 +\n";
        let msg = parse(bad2, "bad2").unwrap_err().to_string();
        assert!(msg.contains("line 4"), "{msg}");
    }

    #[test]
    fn rejects_duplicate_and_unknown() {
        let dup = "[chart]\ncoords = x y\n[form w 2]\nw 0 1 = 1\nw 1 0 = 2\n";
        assert!(parse(dup, "d").is_err());
        let unknown = "[chart]\ncoords = x y\n[expect]\nnope = pass\n";
        assert!(parse(unknown, "u").is_err());
    }

    #[test]
    fn connection_with_torsion_is_accepted_but_flagged() {
        let text = "[chart]\ncoords = x y\n[metric]\ng 0 0 = 1\ng 1 1 = 1\n[connection nabla]\nGamma 0 0 1 = 1\n";
        let m = parse(text, "twisted").unwrap();
        let conn = m.nabla().unwrap();
        assert!(!conn.is_torsion_free());
    }

    #[test]
    fn zoo_entries_round_trip() {
        for name in crate::zoo::ZOO_NAMES {
            let m = crate::zoo::by_name(name).unwrap();
            let text = export(&m).unwrap();
            let back = parse(&text, name).unwrap();
            assert_eq!(back.dim(), m.dim(), "{name}");
            assert_eq!(back.expectations, m.expectations, "{name}");
            // all fields agree pointwise
            let pts = m.chart.seeded_points(10, 5);
            for (tname, t) in &m.tensors {
                let u = back.tensors.get(tname).expect("tensor survives");
                assert_eq!(u.valence(), t.valence());
                for pt in &pts {
                    let ctx = EvalCtx::new(&m.chart, pt);
                    let ctx2 = EvalCtx::new(&back.chart, pt);
                    let a = t.eval_all(&ctx).unwrap();
                    let b = u.eval_all(&ctx2).unwrap();
                    for (x, y) in a.iter().zip(&b) {
                        assert_eq!(x.to_bits(), y.to_bits(), "{name}/{tname}");
                    }
                }
            }
            for (cname, c) in &m.connections {
                let u = back.connections.get(cname).expect("connection survives");
                assert!(c.max_gamma_difference(u, &pts).unwrap() == 0.0);
            }
        }
    }
}
