//! Scalar component functions on a chart.
//!
//! A `ScalarField` is either a closed-form expression, an inverse-metric
//! entry (evaluated by a pointwise linear solve, never by symbolic matrix
//! inversion), an opaque pointwise numeric map, or an arithmetic composite
//! of those. Differentiation is exact everywhere except on opaque numeric
//! leaves, which fall back to central finite differences:
//!
//!   d(g^{ij})/dx^k = -g^{ia} (d g_{ab}/dx^k) g^{bj}
//!
//! keeps derivatives of inverse-metric entries closed under composition, so
//! Christoffel symbols, their curvature and Hodge duals of computed forms
//! all evaluate to solver precision rather than finite-difference precision.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::chart::{Chart, ChartRef};
use crate::error::GeomError;
use crate::expr::{Env, Expr};

const FD_STEP: f64 = 1e-5;

static NEXT_METRIC_ID: AtomicU64 = AtomicU64::new(1);

/// Closed-form symmetric metric component data. Higher-level code wraps
/// this in `Metric`; fields reference it for inverse-entry leaves.
#[derive(Debug)]
pub struct MetricCore {
    pub chart: ChartRef,
    /// n*n entries, row-major, symmetric.
    pub comps: Vec<Expr>,
    id: u64,
}

impl MetricCore {
    pub fn new(chart: ChartRef, comps: Vec<Expr>) -> Arc<MetricCore> {
        debug_assert_eq!(comps.len(), chart.dim() * chart.dim());
        Arc::new(MetricCore {
            chart,
            comps,
            id: NEXT_METRIC_ID.fetch_add(1, Ordering::Relaxed),
        })
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.comps[i * self.chart.dim() + j]
    }

    pub fn matrix_at(&self, ctx: &EvalCtx<'_>) -> Result<DMatrix<f64>, GeomError> {
        let n = self.chart.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.entry(i, j).eval(ctx.env())?;
            }
        }
        Ok(m)
    }

    /// Inverse at the context point, memoized per evaluation context.
    pub fn inverse_at(&self, ctx: &EvalCtx<'_>) -> Result<Arc<DMatrix<f64>>, GeomError> {
        if let Some(hit) = ctx.inv_cache.borrow().get(&self.id) {
            return Ok(hit.clone());
        }
        let m = self.matrix_at(ctx)?;
        let chol = nalgebra::Cholesky::new(m).ok_or_else(|| GeomError::DegenerateMetric {
            point: ctx.vals.to_vec(),
        })?;
        let inv = Arc::new(chol.inverse());
        ctx.inv_cache.borrow_mut().insert(self.id, inv.clone());
        Ok(inv)
    }

    /// Symbolic determinant, expanded over permutations. Zero folding keeps
    /// this small for the diagonal metrics that dominate in practice.
    pub fn det_expr(&self) -> Expr {
        let n = self.chart.dim();
        let mut total = Expr::zero();
        let mut perm: Vec<usize> = (0..n).collect();
        permute_det(&mut perm, 0, &mut total, self, n);
        total
    }
}

fn permute_det(perm: &mut Vec<usize>, k: usize, total: &mut Expr, g: &MetricCore, n: usize) {
    if k == n {
        let mut sign = 1.0;
        for i in 0..n {
            for j in (i + 1)..n {
                if perm[i] > perm[j] {
                    sign = -sign;
                }
            }
        }
        let mut prod = Expr::num(sign);
        for (i, &p) in perm.iter().enumerate() {
            prod = Expr::mul(prod, g.entry(i, p).clone());
        }
        *total = Expr::add(total.clone(), prod);
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute_det(perm, k + 1, total, g, n);
        perm.swap(k, i);
    }
}

/// Per-point evaluation context. Holds the point and a memo of metric
/// inverses computed at it; create one per sample point.
pub struct EvalCtx<'a> {
    pub chart: &'a Chart,
    pub vals: &'a [f64],
    inv_cache: RefCell<HashMap<u64, Arc<DMatrix<f64>>>>,
}

impl<'a> EvalCtx<'a> {
    pub fn new(chart: &'a Chart, vals: &'a [f64]) -> Self {
        debug_assert_eq!(chart.dim(), vals.len());
        EvalCtx {
            chart,
            vals,
            inv_cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn env(&self) -> Env<'_> {
        Env::new(self.chart.coords(), self.vals)
    }
}

pub type PointFn = dyn Fn(&Chart, &[f64]) -> Result<f64, GeomError> + Send + Sync;

/// Opaque pointwise numeric map (linear solves, polar factors, ...).
pub struct NumericField {
    pub name: String,
    pub f: Arc<PointFn>,
}

impl std::fmt::Debug for NumericField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NumericField({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum ScalarField {
    Closed(Expr),
    InvMetric {
        metric: Arc<MetricCore>,
        i: usize,
        j: usize,
    },
    Numeric(Arc<NumericField>),
    Add(Arc<ScalarField>, Arc<ScalarField>),
    Sub(Arc<ScalarField>, Arc<ScalarField>),
    Mul(Arc<ScalarField>, Arc<ScalarField>),
    Div(Arc<ScalarField>, Arc<ScalarField>),
    Neg(Arc<ScalarField>),
    Sqrt(Arc<ScalarField>),
}

impl From<Expr> for ScalarField {
    fn from(e: Expr) -> Self {
        ScalarField::Closed(e)
    }
}

impl ScalarField {
    pub fn zero() -> ScalarField {
        ScalarField::Closed(Expr::zero())
    }

    pub fn constant(v: f64) -> ScalarField {
        ScalarField::Closed(Expr::num(v))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarField::Closed(e) if e.is_zero())
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            ScalarField::Closed(e) => e.as_const(),
            _ => None,
        }
    }

    /// Closed-form payload, if the field is a pure expression.
    pub fn as_closed(&self) -> Option<&Expr> {
        match self {
            ScalarField::Closed(e) => Some(e),
            _ => None,
        }
    }

    pub fn numeric(
        name: impl Into<String>,
        f: impl Fn(&Chart, &[f64]) -> Result<f64, GeomError> + Send + Sync + 'static,
    ) -> ScalarField {
        ScalarField::Numeric(Arc::new(NumericField {
            name: name.into(),
            f: Arc::new(f),
        }))
    }

    pub fn add(a: ScalarField, b: ScalarField) -> ScalarField {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (ScalarField::Closed(x), ScalarField::Closed(y)) = (&a, &b) {
            return ScalarField::Closed(Expr::add(x.clone(), y.clone()));
        }
        ScalarField::Add(Arc::new(a), Arc::new(b))
    }

    pub fn sub(a: ScalarField, b: ScalarField) -> ScalarField {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return ScalarField::neg(b);
        }
        if let (ScalarField::Closed(x), ScalarField::Closed(y)) = (&a, &b) {
            return ScalarField::Closed(Expr::sub(x.clone(), y.clone()));
        }
        ScalarField::Sub(Arc::new(a), Arc::new(b))
    }

    pub fn mul(a: ScalarField, b: ScalarField) -> ScalarField {
        if a.is_zero() || b.is_zero() {
            return ScalarField::zero();
        }
        if a.as_const() == Some(1.0) {
            return b;
        }
        if b.as_const() == Some(1.0) {
            return a;
        }
        if let (ScalarField::Closed(x), ScalarField::Closed(y)) = (&a, &b) {
            return ScalarField::Closed(Expr::mul(x.clone(), y.clone()));
        }
        ScalarField::Mul(Arc::new(a), Arc::new(b))
    }

    pub fn div(a: ScalarField, b: ScalarField) -> ScalarField {
        if a.is_zero() {
            return ScalarField::zero();
        }
        if b.as_const() == Some(1.0) {
            return a;
        }
        if let (ScalarField::Closed(x), ScalarField::Closed(y)) = (&a, &b) {
            return ScalarField::Closed(Expr::div(x.clone(), y.clone()));
        }
        ScalarField::Div(Arc::new(a), Arc::new(b))
    }

    pub fn neg(a: ScalarField) -> ScalarField {
        if a.is_zero() {
            return a;
        }
        if let ScalarField::Closed(x) = &a {
            return ScalarField::Closed(Expr::neg(x.clone()));
        }
        ScalarField::Neg(Arc::new(a))
    }

    pub fn sqrt(a: ScalarField) -> ScalarField {
        if let ScalarField::Closed(x) = &a {
            return ScalarField::Closed(Expr::call(crate::expr::Func::Sqrt, x.clone()));
        }
        ScalarField::Sqrt(Arc::new(a))
    }

    pub fn scale(factor: f64, a: ScalarField) -> ScalarField {
        ScalarField::mul(ScalarField::constant(factor), a)
    }

    pub fn eval(&self, ctx: &EvalCtx<'_>) -> Result<f64, GeomError> {
        match self {
            ScalarField::Closed(e) => Ok(e.eval(ctx.env())?),
            ScalarField::InvMetric { metric, i, j } => {
                let inv = metric.inverse_at(ctx)?;
                Ok(inv[(*i, *j)])
            }
            ScalarField::Numeric(n) => (n.f)(ctx.chart, ctx.vals),
            ScalarField::Add(a, b) => Ok(a.eval(ctx)? + b.eval(ctx)?),
            ScalarField::Sub(a, b) => Ok(a.eval(ctx)? - b.eval(ctx)?),
            ScalarField::Mul(a, b) => Ok(a.eval(ctx)? * b.eval(ctx)?),
            ScalarField::Div(a, b) => {
                let den = b.eval(ctx)?;
                if den.abs() < 1e-300 {
                    return Err(GeomError::SingularMap {
                        point: ctx.vals.to_vec(),
                        cond: f64::INFINITY,
                    });
                }
                Ok(a.eval(ctx)? / den)
            }
            ScalarField::Neg(a) => Ok(-a.eval(ctx)?),
            ScalarField::Sqrt(a) => {
                let v = a.eval(ctx)?;
                if v < 0.0 {
                    return Err(GeomError::Eval(crate::expr::EvalError::SqrtDomain(
                        "composite field".into(),
                    )));
                }
                Ok(v.sqrt())
            }
        }
    }

    /// Convenience: evaluate at a bare point.
    pub fn eval_at(&self, chart: &Chart, vals: &[f64]) -> Result<f64, GeomError> {
        self.eval(&EvalCtx::new(chart, vals))
    }

    /// Partial derivative along coordinate `k`. Exact except across
    /// `Numeric` leaves, which use a central difference with step 1e-5.
    pub fn diff(&self, chart: &Chart, k: usize) -> ScalarField {
        match self {
            ScalarField::Closed(e) => ScalarField::Closed(e.diff(chart.coord_name(k))),
            ScalarField::InvMetric { metric, i, j } => {
                let n = chart.dim();
                let mut sum = ScalarField::zero();
                for a in 0..n {
                    for b in 0..n {
                        let dg = metric.entry(a, b).diff(chart.coord_name(k));
                        if dg.is_zero() {
                            continue;
                        }
                        let term = ScalarField::mul(
                            ScalarField::mul(
                                ScalarField::InvMetric {
                                    metric: metric.clone(),
                                    i: *i,
                                    j: a,
                                },
                                ScalarField::Closed(dg),
                            ),
                            ScalarField::InvMetric {
                                metric: metric.clone(),
                                i: b,
                                j: *j,
                            },
                        );
                        sum = ScalarField::add(sum, term);
                    }
                }
                ScalarField::neg(sum)
            }
            ScalarField::Numeric(nf) => {
                let inner = nf.clone();
                ScalarField::numeric(format!("d{}[{}]", k, nf.name), move |chart, vals| {
                    let h = FD_STEP * (1.0 + vals[k].abs());
                    let mut hi = vals.to_vec();
                    let mut lo = vals.to_vec();
                    hi[k] += h;
                    lo[k] -= h;
                    let f_hi = (inner.f)(chart, &hi)?;
                    let f_lo = (inner.f)(chart, &lo)?;
                    Ok((f_hi - f_lo) / (2.0 * h))
                })
            }
            ScalarField::Add(a, b) => ScalarField::add(a.diff(chart, k), b.diff(chart, k)),
            ScalarField::Sub(a, b) => ScalarField::sub(a.diff(chart, k), b.diff(chart, k)),
            ScalarField::Mul(a, b) => ScalarField::add(
                ScalarField::mul(a.diff(chart, k), (**b).clone()),
                ScalarField::mul((**a).clone(), b.diff(chart, k)),
            ),
            ScalarField::Div(a, b) => ScalarField::div(
                ScalarField::sub(
                    ScalarField::mul(a.diff(chart, k), (**b).clone()),
                    ScalarField::mul((**a).clone(), b.diff(chart, k)),
                ),
                ScalarField::mul((**b).clone(), (**b).clone()),
            ),
            ScalarField::Neg(a) => ScalarField::neg(a.diff(chart, k)),
            ScalarField::Sqrt(a) => ScalarField::div(
                a.diff(chart, k),
                ScalarField::scale(2.0, ScalarField::sqrt((**a).clone())),
            ),
        }
    }

    /// True when the tree contains no `Numeric` leaf, i.e. derivatives of
    /// any order stay exact.
    pub fn is_exact(&self) -> bool {
        match self {
            ScalarField::Closed(_) | ScalarField::InvMetric { .. } => true,
            ScalarField::Numeric(_) => false,
            ScalarField::Add(a, b)
            | ScalarField::Sub(a, b)
            | ScalarField::Mul(a, b)
            | ScalarField::Div(a, b) => a.is_exact() && b.is_exact(),
            ScalarField::Neg(a) | ScalarField::Sqrt(a) => a.is_exact(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::expr::parse;

    #[test]
    fn inverse_metric_entry_and_derivative() {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let e = |s: &str| parse(s, chart.coords()).unwrap();
        // g = diag(1, 1, e^{2t})
        let mut comps = vec![Expr::zero(); 9];
        comps[0] = e("1");
        comps[4] = e("1");
        comps[8] = e("exp(2*t)");
        let core = MetricCore::new(chart.clone(), comps);
        let inv_pp = ScalarField::InvMetric {
            metric: core.clone(),
            i: 2,
            j: 2,
        };
        let pt = [0.4, 0.0, 0.0];
        let ctx = EvalCtx::new(&chart, &pt);
        let got = inv_pp.eval(&ctx).unwrap();
        assert!((got - (-0.8f64).exp()).abs() < 1e-14);

        // d/dt g^{pp} = -2 e^{-2t}, computed exactly through the solve
        let d = inv_pp.diff(&chart, 0);
        let got_d = d.eval(&ctx).unwrap();
        assert!((got_d - (-2.0 * (-0.8f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn numeric_leaf_falls_back_to_finite_differences() {
        let chart = Chart::euclidean(vec!["x"]);
        let f = ScalarField::numeric("x_cubed", |_, vals| Ok(vals[0].powi(3)));
        let d = f.diff(&chart, 0);
        let pt = [0.7];
        let got = d.eval_at(&chart, &pt).unwrap();
        assert!((got - 3.0 * 0.49).abs() < 1e-8);
        assert!(!f.is_exact());
    }

    #[test]
    fn det_expr_diagonal() {
        let chart = Chart::euclidean(vec!["t", "q"]);
        let e = |s: &str| parse(s, chart.coords()).unwrap();
        let comps = vec![e("1"), Expr::zero(), Expr::zero(), e("exp(2*t)")];
        let core = MetricCore::new(chart.clone(), comps);
        let det = core.det_expr();
        let ctx = EvalCtx::new(&chart, &[0.25, 0.0]);
        assert!((det.eval(ctx.env()).unwrap() - 0.5f64.exp()).abs() < 1e-15);
    }
}
