//! Dense tensor fields over a chart and the metric specialization.
//!
//! Components are stored row-major with contravariant indices first. A
//! valence-2 field may carry a symmetry tag which is certified numerically
//! at 20 seeded points when the field is constructed from user data.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::chart::{same_chart, ChartRef};
use crate::error::GeomError;
use crate::expr::Expr;
use crate::field::{EvalCtx, MetricCore, ScalarField};

pub const SYMMETRY_CERT_POINTS: usize = 20;
pub const SYMMETRY_CERT_SEED: u64 = 0x5EED_CE27;
pub const SYMMETRY_CERT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    None,
    Sym2,
    Skew2,
}

#[derive(Debug, Clone)]
pub struct TensorField {
    chart: ChartRef,
    r: usize,
    s: usize,
    comps: Vec<ScalarField>,
    symmetry: Symmetry,
    /// Fully antisymmetric covariant field (differential form of degree s).
    alternating: bool,
}

/// All index tuples of the given rank in row-major order.
pub fn multi_indices(dim: usize, rank: usize) -> Vec<Vec<usize>> {
    let total = dim.pow(rank as u32);
    let mut out = Vec::with_capacity(total);
    for mut flat in 0..total {
        let mut idx = vec![0usize; rank];
        for slot in (0..rank).rev() {
            idx[slot] = flat % dim;
            flat /= dim;
        }
        out.push(idx);
    }
    out
}

/// Strictly increasing index tuples, the independent components of an
/// alternating field.
pub fn increasing_indices(dim: usize, rank: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx = Vec::with_capacity(rank);
    fn rec(start: usize, dim: usize, rank: usize, idx: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if idx.len() == rank {
            out.push(idx.clone());
            return;
        }
        for i in start..dim {
            idx.push(i);
            rec(i + 1, dim, rank, idx, out);
            idx.pop();
        }
    }
    rec(0, dim, rank, &mut idx, &mut out);
    out
}

fn permutations_of(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut tail in permutations_of(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

pub fn flat_index(dim: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Sign of the permutation sorting `idx`; zero if any index repeats.
pub fn permutation_sign(idx: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..idx.len() {
        for j in (i + 1)..idx.len() {
            if idx[i] == idx[j] {
                return 0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

impl TensorField {
    pub fn new(
        chart: ChartRef,
        r: usize,
        s: usize,
        comps: Vec<ScalarField>,
    ) -> Result<TensorField, GeomError> {
        let expected = chart.dim().pow((r + s) as u32);
        if comps.len() != expected {
            return Err(GeomError::BadShape {
                expected,
                got: comps.len(),
            });
        }
        Ok(TensorField {
            chart,
            r,
            s,
            comps,
            symmetry: Symmetry::None,
            alternating: s <= 1 && r == 0,
        })
    }

    pub fn zeros(chart: ChartRef, r: usize, s: usize) -> TensorField {
        let count = chart.dim().pow((r + s) as u32);
        TensorField {
            chart,
            r,
            s,
            comps: vec![ScalarField::zero(); count],
            symmetry: Symmetry::None,
            alternating: s <= 1 && r == 0,
        }
    }

    pub fn scalar(chart: ChartRef, f: ScalarField) -> TensorField {
        TensorField {
            chart,
            r: 0,
            s: 0,
            comps: vec![f],
            symmetry: Symmetry::None,
            alternating: true,
        }
    }

    pub fn vector(chart: ChartRef, comps: Vec<ScalarField>) -> Result<TensorField, GeomError> {
        TensorField::new(chart, 1, 0, comps)
    }

    pub fn one_form(chart: ChartRef, comps: Vec<ScalarField>) -> Result<TensorField, GeomError> {
        TensorField::new(chart, 0, 1, comps)
    }

    /// Degree-k differential form from dense components; antisymmetry is
    /// certified at seeded points for k >= 2.
    pub fn form(chart: ChartRef, k: usize, comps: Vec<ScalarField>) -> Result<TensorField, GeomError> {
        if k > chart.dim() {
            return Err(GeomError::DegreeOverflow {
                degree: k,
                dim: chart.dim(),
            });
        }
        let mut t = TensorField::new(chart, 0, k, comps)?;
        t.alternating = true;
        if k == 2 {
            t.symmetry = Symmetry::Skew2;
        }
        if k >= 2 {
            t.certify_alternating()?;
        }
        Ok(t)
    }

    /// Valence-2 covariant field with a declared symmetry, certified at
    /// seeded points.
    pub fn with_symmetry(mut self, tag: Symmetry) -> Result<TensorField, GeomError> {
        if self.r + self.s != 2 {
            return Err(GeomError::UnsupportedValence { r: self.r, s: self.s });
        }
        self.symmetry = tag;
        if tag != Symmetry::None {
            self.certify_symmetry(tag)?;
        }
        if tag == Symmetry::Skew2 && self.r == 0 {
            self.alternating = true;
        }
        Ok(self)
    }

    /// Build an alternating field of the given valence from a closure that
    /// only supplies components on strictly increasing index tuples; the
    /// remaining slots share the closure's output through its sign orbit.
    pub(crate) fn alternating_from_increasing(
        chart: ChartRef,
        r: usize,
        s: usize,
        mut f: impl FnMut(&[usize]) -> ScalarField,
    ) -> TensorField {
        let rank = r + s;
        let n = chart.dim();
        let mut comps = vec![ScalarField::zero(); n.pow(rank as u32)];
        for idx in increasing_indices(n, rank) {
            let base = f(&idx);
            if base.is_zero() {
                continue;
            }
            for perm in permutations_of(&idx) {
                let sign = permutation_sign(&perm);
                let flat = flat_index(n, &perm);
                comps[flat] = if sign >= 0 {
                    base.clone()
                } else {
                    ScalarField::neg(base.clone())
                };
            }
        }
        let mut t = TensorField::new(chart, r, s, comps).unwrap();
        t.alternating = true;
        if rank == 2 {
            t.symmetry = Symmetry::Skew2;
        }
        t
    }

    /// Index tuples to sweep in residual checks: the independent increasing
    /// tuples for alternating fields, everything otherwise.
    pub fn sweep_indices(&self) -> Vec<Vec<usize>> {
        if self.alternating && self.rank() >= 2 {
            increasing_indices(self.dim(), self.rank())
        } else {
            multi_indices(self.dim(), self.rank())
        }
    }

    /// Mark a computed covariant field as alternating without the seeded
    /// certificate; reserved for constructors whose output is antisymmetric
    /// by the shape of the formula (wedge, exterior derivative, interior).
    pub(crate) fn assume_alternating(mut self) -> TensorField {
        debug_assert_eq!(self.r, 0);
        self.alternating = true;
        if self.s == 2 {
            self.symmetry = Symmetry::Skew2;
        }
        self
    }

    fn certify_symmetry(&self, tag: Symmetry) -> Result<(), GeomError> {
        let sign = match tag {
            Symmetry::Sym2 => 1.0,
            Symmetry::Skew2 => -1.0,
            Symmetry::None => return Ok(()),
        };
        let n = self.dim();
        for pt in self.chart.seeded_points(SYMMETRY_CERT_POINTS, SYMMETRY_CERT_SEED) {
            let ctx = EvalCtx::new(&self.chart, &pt);
            for i in 0..n {
                for j in 0..n {
                    let a = self.comps[i * n + j].eval(&ctx)?;
                    let b = self.comps[j * n + i].eval(&ctx)?;
                    let res = (a - sign * b).abs();
                    if res > SYMMETRY_CERT_TOL {
                        return Err(GeomError::SymmetryViolation {
                            tag: if sign > 0.0 { "sym2" } else { "skew2" },
                            residual: res,
                            point: pt,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn certify_alternating(&self) -> Result<(), GeomError> {
        let n = self.dim();
        let k = self.s;
        for pt in self.chart.seeded_points(SYMMETRY_CERT_POINTS / 4 + 1, SYMMETRY_CERT_SEED) {
            let ctx = EvalCtx::new(&self.chart, &pt);
            for idx in multi_indices(n, k) {
                let sign = permutation_sign(&idx);
                let here = self.comps[flat_index(n, &idx)].eval(&ctx)?;
                if sign == 0 {
                    if here.abs() > SYMMETRY_CERT_TOL {
                        return Err(GeomError::SymmetryViolation {
                            tag: "alternating",
                            residual: here.abs(),
                            point: pt,
                        });
                    }
                    continue;
                }
                let mut sorted = idx.clone();
                sorted.sort_unstable();
                let base = self.comps[flat_index(n, &sorted)].eval(&ctx)?;
                let res = (here - sign as f64 * base).abs();
                if res > SYMMETRY_CERT_TOL {
                    return Err(GeomError::SymmetryViolation {
                        tag: "alternating",
                        residual: res,
                        point: pt,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn valence(&self) -> (usize, usize) {
        (self.r, self.s)
    }

    pub fn rank(&self) -> usize {
        self.r + self.s
    }

    pub fn is_alternating(&self) -> bool {
        self.alternating
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn degree(&self) -> usize {
        debug_assert!(self.alternating && self.r == 0);
        self.s
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn comp(&self, idx: &[usize]) -> &ScalarField {
        debug_assert_eq!(idx.len(), self.rank());
        &self.comps[flat_index(self.dim(), idx)]
    }

    pub fn comp_mut(&mut self, idx: &[usize]) -> &mut ScalarField {
        let flat = flat_index(self.dim(), idx);
        &mut self.comps[flat]
    }

    /// All components evaluated at the context point, row-major.
    pub fn eval_all(&self, ctx: &EvalCtx<'_>) -> Result<Vec<f64>, GeomError> {
        self.comps.iter().map(|c| c.eval(ctx)).collect()
    }

    /// Valence-1 field as a vector of values.
    pub fn eval_vector(&self, ctx: &EvalCtx<'_>) -> Result<DVector<f64>, GeomError> {
        debug_assert_eq!(self.rank(), 1);
        Ok(DVector::from_vec(self.eval_all(ctx)?))
    }

    /// Valence-2 field as a matrix; for (1,1) fields rows are the
    /// contravariant index, so the matrix acts on coordinate components.
    pub fn eval_matrix(&self, ctx: &EvalCtx<'_>) -> Result<DMatrix<f64>, GeomError> {
        debug_assert_eq!(self.rank(), 2);
        let n = self.dim();
        let vals = self.eval_all(ctx)?;
        Ok(DMatrix::from_fn(n, n, |i, j| vals[i * n + j]))
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> TensorField {
        TensorField {
            chart: self.chart.clone(),
            r: self.r,
            s: self.s,
            comps: self.comps.iter().map(f).collect(),
            symmetry: self.symmetry,
            alternating: self.alternating,
        }
    }

    pub fn add(&self, other: &TensorField) -> Result<TensorField, GeomError> {
        same_chart(&self.chart, &other.chart)?;
        if self.valence() != other.valence() {
            return Err(GeomError::UnsupportedValence {
                r: other.r,
                s: other.s,
            });
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| ScalarField::add(a.clone(), b.clone()))
            .collect();
        Ok(TensorField {
            chart: self.chart.clone(),
            r: self.r,
            s: self.s,
            comps,
            symmetry: if self.symmetry == other.symmetry {
                self.symmetry
            } else {
                Symmetry::None
            },
            alternating: self.alternating && other.alternating,
        })
    }

    pub fn sub(&self, other: &TensorField) -> Result<TensorField, GeomError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> TensorField {
        self.map(|c| ScalarField::scale(factor, c.clone()))
    }

    /// Worst absolute component over the given points (independent
    /// components only, for alternating fields).
    pub fn max_abs_on(&self, points: &[Vec<f64>]) -> Result<f64, GeomError> {
        let idxs = self.sweep_indices();
        let mut worst: f64 = 0.0;
        for pt in points {
            let ctx = EvalCtx::new(&self.chart, pt);
            for idx in &idxs {
                worst = worst.max(self.comp(idx).eval(&ctx)?.abs());
            }
        }
        Ok(worst)
    }
}

/// Riemannian metric: symmetric (0,2) field with closed-form components,
/// positive definite on the sampled domain. Inverse entries are served as
/// fields: closed-form for diagonal or constant metrics, pointwise linear
/// solves otherwise.
#[derive(Debug, Clone)]
pub struct Metric {
    field: TensorField,
    core: Arc<MetricCore>,
    det: Expr,
    diagonal: bool,
    const_inverse: Option<Vec<f64>>,
}

impl Metric {
    pub fn new(chart: ChartRef, comps: Vec<Expr>) -> Result<Metric, GeomError> {
        let n = chart.dim();
        if comps.len() != n * n {
            return Err(GeomError::BadShape {
                expected: n * n,
                got: comps.len(),
            });
        }
        let field = TensorField::new(
            chart.clone(),
            0,
            2,
            comps.iter().cloned().map(ScalarField::from).collect(),
        )?
        .with_symmetry(Symmetry::Sym2)?;

        let core = MetricCore::new(chart.clone(), comps.clone());
        let det = core.det_expr();
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || comps[i * n + j].is_zero()));
        let all_const = comps.iter().all(|c| c.as_const().is_some());

        let metric = Metric {
            field,
            core,
            det,
            diagonal,
            const_inverse: None,
        };

        // positive definiteness certificate at seeded points
        for pt in chart.seeded_points(SYMMETRY_CERT_POINTS, SYMMETRY_CERT_SEED) {
            let ctx = EvalCtx::new(&chart, &pt);
            metric.core.inverse_at(&ctx)?;
        }

        let const_inverse = if all_const {
            let pt = vec![0.0; n];
            let probe: Vec<f64> = chart
                .domain()
                .iter()
                .map(|&(a, b)| 0.5 * (a + b))
                .collect();
            let _ = pt;
            let ctx = EvalCtx::new(&chart, &probe);
            let inv = metric.core.inverse_at(&ctx)?;
            Some(inv.iter().cloned().collect())
        } else {
            None
        };

        Ok(Metric {
            const_inverse,
            ..metric
        })
    }

    /// Identity metric on the chart.
    pub fn identity(chart: ChartRef) -> Metric {
        let n = chart.dim();
        let mut comps = vec![Expr::zero(); n * n];
        for i in 0..n {
            comps[i * n + i] = Expr::one();
        }
        Metric::new(chart, comps).expect("identity metric is valid")
    }

    pub fn chart(&self) -> &ChartRef {
        self.field.chart()
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn as_tensor(&self) -> &TensorField {
        &self.field
    }

    pub fn core(&self) -> &Arc<MetricCore> {
        &self.core
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        self.core.entry(i, j)
    }

    pub fn entry_field(&self, i: usize, j: usize) -> ScalarField {
        ScalarField::from(self.core.entry(i, j).clone())
    }

    /// Determinant as a closed-form expression.
    pub fn det_expr(&self) -> &Expr {
        &self.det
    }

    /// Inverse-metric entry as a field.
    pub fn inv_entry(&self, i: usize, j: usize) -> ScalarField {
        if let Some(inv) = &self.const_inverse {
            return ScalarField::constant(inv[i * self.dim() + j]);
        }
        if self.diagonal {
            if i != j {
                return ScalarField::zero();
            }
            return ScalarField::Closed(Expr::div(Expr::one(), self.core.entry(i, i).clone()));
        }
        ScalarField::InvMetric {
            metric: self.core.clone(),
            i,
            j,
        }
    }

    pub fn matrix_at(&self, ctx: &EvalCtx<'_>) -> Result<DMatrix<f64>, GeomError> {
        self.core.matrix_at(ctx)
    }

    pub fn inverse_at(&self, ctx: &EvalCtx<'_>) -> Result<Arc<DMatrix<f64>>, GeomError> {
        self.core.inverse_at(ctx)
    }

    /// Index lowering: `(flat v)_i = g_{ij} v^j`.
    pub fn flat(&self, v: &TensorField) -> Result<TensorField, GeomError> {
        same_chart(self.chart(), v.chart())?;
        if v.valence() != (1, 0) {
            let (r, s) = v.valence();
            return Err(GeomError::UnsupportedValence { r, s });
        }
        let n = self.dim();
        let mut comps = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = ScalarField::zero();
            for j in 0..n {
                acc = ScalarField::add(
                    acc,
                    ScalarField::mul(self.entry_field(i, j), v.comps()[j].clone()),
                );
            }
            comps.push(acc);
        }
        TensorField::one_form(self.chart().clone(), comps)
    }

    /// Index raising: exact inverse of `flat` through the inverse metric.
    pub fn sharp(&self, alpha: &TensorField) -> Result<TensorField, GeomError> {
        same_chart(self.chart(), alpha.chart())?;
        if alpha.valence() != (0, 1) {
            let (r, s) = alpha.valence();
            return Err(GeomError::UnsupportedValence { r, s });
        }
        let n = self.dim();
        let mut comps = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = ScalarField::zero();
            for j in 0..n {
                acc = ScalarField::add(
                    acc,
                    ScalarField::mul(self.inv_entry(i, j), alpha.comps()[j].clone()),
                );
            }
            comps.push(acc);
        }
        TensorField::vector(self.chart().clone(), comps)
    }

    /// g(u, v) as a field for two vector fields.
    pub fn pairing(&self, u: &TensorField, v: &TensorField) -> Result<ScalarField, GeomError> {
        same_chart(self.chart(), u.chart())?;
        same_chart(self.chart(), v.chart())?;
        let n = self.dim();
        let mut acc = ScalarField::zero();
        for i in 0..n {
            for j in 0..n {
                acc = ScalarField::add(
                    acc,
                    ScalarField::mul(
                        self.entry_field(i, j),
                        ScalarField::mul(u.comps()[i].clone(), v.comps()[j].clone()),
                    ),
                );
            }
        }
        Ok(acc)
    }

    /// Squared g-norm of a one-form: `g^{ij} a_i a_j`.
    pub fn coform_norm_sq(&self, alpha: &TensorField) -> Result<ScalarField, GeomError> {
        same_chart(self.chart(), alpha.chart())?;
        let n = self.dim();
        let mut acc = ScalarField::zero();
        for i in 0..n {
            for j in 0..n {
                acc = ScalarField::add(
                    acc,
                    ScalarField::mul(
                        self.inv_entry(i, j),
                        ScalarField::mul(alpha.comps()[i].clone(), alpha.comps()[j].clone()),
                    ),
                );
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::expr::parse;

    fn warped() -> (ChartRef, Metric) {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let e = |s: &str| parse(s, chart.coords()).unwrap();
        let mut comps = vec![Expr::zero(); 9];
        comps[0] = e("1");
        comps[4] = e("1");
        comps[8] = e("exp(2*t)");
        let g = Metric::new(chart.clone(), comps).unwrap();
        (chart, g)
    }

    #[test]
    fn flat_of_coordinate_field_identity_metric() {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let g = Metric::identity(chart.clone());
        let dt = g
            .flat(&TensorField::vector(
                chart.clone(),
                vec![
                    ScalarField::constant(1.0),
                    ScalarField::zero(),
                    ScalarField::zero(),
                ],
            )
            .unwrap())
            .unwrap();
        let ctx_pt = [0.1, 0.2, 0.3];
        let ctx = EvalCtx::new(&chart, &ctx_pt);
        assert_eq!(dt.eval_all(&ctx).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn sharp_inverts_flat_on_warped_metric() {
        let (chart, g) = warped();
        let e = |s: &str| parse(s, chart.coords()).unwrap();
        let v = TensorField::vector(
            chart.clone(),
            vec![
                ScalarField::from(e("q^2+1")),
                ScalarField::from(e("sin(t)")),
                ScalarField::from(e("p*t")),
            ],
        )
        .unwrap();
        let back = g.sharp(&g.flat(&v).unwrap()).unwrap();
        for pt in chart.seeded_points(100, 7) {
            let ctx = EvalCtx::new(&chart, &pt);
            let a = v.eval_all(&ctx).unwrap();
            let b = back.eval_all(&ctx).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetry_certificate_rejects_asymmetric_metric() {
        let chart = Chart::euclidean(vec!["x", "y"]);
        let e = |s: &str| parse(s, chart.coords()).unwrap();
        let comps = vec![e("1"), e("x"), e("0"), e("1")];
        assert!(matches!(
            Metric::new(chart, comps),
            Err(GeomError::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn degenerate_metric_detected() {
        let chart = Chart::euclidean(vec!["x", "y"]);
        let e = |s: &str| parse(s, chart.coords()).unwrap();
        // x ranges over [-1,1] so x*Id is indefinite
        let comps = vec![e("x"), e("0"), e("0"), e("x")];
        assert!(matches!(
            Metric::new(chart, comps),
            Err(GeomError::DegenerateMetric { .. })
        ));
    }
}
