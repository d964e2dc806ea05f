//! Finite-difference oracle for the symbolic differentiator.
//!
//! Seeded random expressions over the chart coordinates, exercising every
//! builtin function and polynomials up to degree four, are differentiated
//! symbolically and compared against central differences with step 1e-5.
//! Geometry suites are only trusted once this gate passes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chart::ChartRef;
use crate::error::GeomError;
use crate::expr::{Env, Expr, Func};
use crate::report::{CheckReport, Sweep};

pub const FD_STEP: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-5;

const FUNCS: [Func; 9] = [
    Func::Sin,
    Func::Cos,
    Func::Tan,
    Func::Exp,
    Func::Log,
    Func::Sqrt,
    Func::Sinh,
    Func::Cosh,
    Func::Tanh,
];

/// Random polynomial of degree <= 4 in the given variables.
fn random_poly(rng: &mut ChaCha8Rng, vars: &[std::sync::Arc<str>]) -> Expr {
    let terms = rng.gen_range(1..=4);
    let mut acc = Expr::num(rng.gen_range(-1.5..1.5));
    for _ in 0..terms {
        let mut mono = Expr::num(rng.gen_range(-1.5..1.5));
        let mut degree_left = 4usize;
        let factors = rng.gen_range(1..=2);
        for _ in 0..factors {
            if degree_left == 0 {
                break;
            }
            let v = &vars[rng.gen_range(0..vars.len())];
            let d = rng.gen_range(1..=degree_left.min(3));
            degree_left -= d;
            mono = Expr::mul(mono, Expr::pow(Expr::var(v.clone()), Expr::num(d as f64)));
        }
        acc = Expr::add(acc, mono);
    }
    acc
}

/// Wrap an inner polynomial so the builtin stays smooth and in-domain on
/// the sampled box (poles of tan avoided, log/sqrt arguments kept >= 1).
fn wrapped_call(f: Func, inner: Expr) -> Expr {
    match f {
        Func::Log | Func::Sqrt => Expr::call(
            f,
            Expr::add(Expr::num(2.0), Expr::mul(Expr::num(0.1), Expr::mul(inner.clone(), inner))),
        ),
        Func::Tan => Expr::call(f, Expr::mul(Expr::num(0.15), inner)),
        Func::Exp => Expr::call(f, Expr::mul(Expr::num(0.3), inner)),
        _ => Expr::call(f, Expr::mul(Expr::num(0.5), inner)),
    }
}

/// The i-th seeded test expression.
pub fn seeded_expression(chart: &ChartRef, seed: u64, index: usize) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1)));
    let vars = chart.coords();
    let poly = random_poly(&mut rng, vars);
    let func = FUNCS[(index / 3) % FUNCS.len()];
    match index % 3 {
        0 => poly,
        1 => wrapped_call(func, poly),
        _ => Expr::add(
            wrapped_call(func, poly.clone()),
            Expr::mul(random_poly(&mut rng, vars), poly),
        ),
    }
}

/// Central finite difference of `e` along `var` at `point`.
pub fn central_difference(
    e: &Expr,
    chart: &ChartRef,
    var_index: usize,
    point: &[f64],
    h: f64,
) -> Result<f64, GeomError> {
    let mut hi = point.to_vec();
    let mut lo = point.to_vec();
    hi[var_index] += h;
    lo[var_index] -= h;
    let f_hi = e.eval(Env::new(chart.coords(), &hi))?;
    let f_lo = e.eval(Env::new(chart.coords(), &lo))?;
    Ok((f_hi - f_lo) / (2.0 * h))
}

/// Gate check: relative deviation between symbolic and finite-difference
/// derivatives over `count` seeded expressions.
pub fn expr_oracle_check(
    chart: &ChartRef,
    suite: &str,
    seed: u64,
    count: usize,
) -> Result<CheckReport, GeomError> {
    let mut sw = Sweep::new();
    // sampled on a fixed bounded box: the gate tests the expression
    // language, not the chart geometry, and growing builtins overflow on
    // wide domains
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xFD);
    let points: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..chart.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    for index in 0..count {
        let e = seeded_expression(chart, seed, index);
        for pt in &points {
            sw.bump_points();
            for k in 0..chart.dim() {
                let sym = e.diff(chart.coord_name(k)).eval(Env::new(chart.coords(), pt))?;
                let fd = central_difference(&e, chart, k, pt, FD_STEP)?;
                let rel = (sym - fd).abs() / (1.0 + sym.abs());
                sw.record_scale(sym);
                sw.record(pt, rel, || format!("expression {index}, d/d{}", chart.coord_name(k)));
            }
        }
    }
    Ok(sw.finish(
        suite,
        "expr-diff-fd",
        "symbolic derivative matches central difference (h = 1e-5)",
        REL_TOL,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;

    #[test]
    fn oracle_gate_passes_on_hundred_expressions() {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let report = expr_oracle_check(&chart, "expr-oracle", 42, 100).unwrap();
        assert!(report.passed(), "{report:#?}");
    }

    #[test]
    fn every_builtin_is_exercised() {
        let chart = Chart::euclidean(vec!["x"]);
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..100 {
            let e = seeded_expression(&chart, 42, i);
            let text = e.to_string();
            for f in FUNCS {
                // match `name(` so sin does not shadow sinh
                if text.contains(&format!("{}(", f.name())) {
                    seen.insert(f.name());
                }
            }
        }
        assert_eq!(seen.len(), FUNCS.len(), "missing builtins: {seen:?}");
    }
}
