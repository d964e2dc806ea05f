//! The gauge equation `nabla*_X (theta Y) = theta nabla_X Y` for a
//! (1,1)-field theta and a dual pair of connections: residual computation in
//! its three equivalent forms, the adjoint map, the 2-form `p_theta` with its
//! parallel/closed/coclosed/harmonic checks, the pointwise spectral normal
//! form, and curvature commutation checks.

use nalgebra::{DMatrix, DVector};

use crate::chart::same_chart;
use crate::connection::{
    duality_residual, Connection, ConnectionRef, CONNECTION_CERT_POINTS, CONNECTION_CERT_SEED,
    DUALITY_CERT_TOL,
};
use crate::error::GeomError;
use crate::exterior;
use crate::field::{EvalCtx, ScalarField};
use crate::linalg::{self, SkewNormalForm};
use crate::report::{agreement_report, CheckReport, Sweep};
use crate::tensor::{Metric, TensorField};

/// A metric, a dual pair certified against it, and a candidate theta.
pub struct GaugeProblem {
    pub g: Metric,
    pub nabla: ConnectionRef,
    pub nabla_star: ConnectionRef,
    pub theta: TensorField,
}

impl GaugeProblem {
    /// When `nabla_star` is omitted it is computed from `nabla`; either way
    /// the duality relation is certified at seeded points on construction.
    pub fn new(
        g: Metric,
        nabla: ConnectionRef,
        nabla_star: Option<ConnectionRef>,
        theta: TensorField,
    ) -> Result<GaugeProblem, GeomError> {
        same_chart(g.chart(), nabla.chart())?;
        same_chart(g.chart(), theta.chart())?;
        if theta.valence() != (1, 1) {
            let (r, s) = theta.valence();
            return Err(GeomError::UnsupportedValence { r, s });
        }
        let star = match nabla_star {
            Some(s) => s,
            None => nabla.dual(&g)?,
        };
        let pts = g
            .chart()
            .seeded_points(CONNECTION_CERT_POINTS, CONNECTION_CERT_SEED);
        let res = duality_residual(&nabla, &star, &g, &pts)?;
        if res > DUALITY_CERT_TOL {
            return Err(GeomError::Precondition(format!(
                "nabla* dual to nabla (duality residual {res:.3e})"
            )));
        }
        Ok(GaugeProblem {
            g,
            nabla,
            nabla_star: star,
            theta,
        })
    }

    pub fn with_theta(&self, theta: TensorField) -> GaugeProblem {
        GaugeProblem {
            g: self.g.clone(),
            nabla: self.nabla.clone(),
            nabla_star: self.nabla_star.clone(),
            theta,
        }
    }

    /// Direct residual `R^j_{ki} = d_k theta^j_i + Gamma*^j_{ka} theta^a_i
    /// - Gamma^a_{ki} theta^j_a`, zero iff theta solves the gauge equation.
    pub fn residual(&self) -> Result<TensorField, GeomError> {
        self.residual_with(&self.theta)
    }

    pub fn residual_with(&self, theta: &TensorField) -> Result<TensorField, GeomError> {
        let chart = self.g.chart().clone();
        let n = chart.dim();
        let mut comps = vec![ScalarField::zero(); n * n * n];
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    let mut acc = theta.comp(&[j, i]).diff(&chart, k);
                    for a in 0..n {
                        acc = ScalarField::add(
                            acc,
                            ScalarField::mul(
                                self.nabla_star.gamma(j, k, a).clone(),
                                theta.comp(&[a, i]).clone(),
                            ),
                        );
                        acc = ScalarField::sub(
                            acc,
                            ScalarField::mul(
                                self.nabla.gamma(a, k, i).clone(),
                                theta.comp(&[j, a]).clone(),
                            ),
                        );
                    }
                    comps[(j * n + k) * n + i] = acc;
                }
            }
        }
        TensorField::new(chart, 1, 2, comps)
    }

    /// Equivalent form `(nabla* theta)(X,Y) + theta D(X,Y)`.
    pub fn residual_dual_form(&self) -> Result<TensorField, GeomError> {
        let n = self.g.dim();
        let grad = self.nabla_star.covariant_derivative(&self.theta)?; // [j][k][i]
        let d = self.nabla.difference_tensor(&self.nabla_star)?;
        let mut comps = vec![ScalarField::zero(); n * n * n];
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    let mut acc = grad.comp(&[j, k, i]).clone();
                    for a in 0..n {
                        acc = ScalarField::add(
                            acc,
                            ScalarField::mul(
                                self.theta.comp(&[j, a]).clone(),
                                d.comp(&[a, k, i]).clone(),
                            ),
                        );
                    }
                    comps[(j * n + k) * n + i] = acc;
                }
            }
        }
        TensorField::new(self.g.chart().clone(), 1, 2, comps)
    }

    /// Equivalent form `(nabla theta)(X,Y) + D(X, theta Y)`.
    pub fn residual_primal_form(&self) -> Result<TensorField, GeomError> {
        let n = self.g.dim();
        let grad = self.nabla.covariant_derivative(&self.theta)?;
        let d = self.nabla.difference_tensor(&self.nabla_star)?;
        let mut comps = vec![ScalarField::zero(); n * n * n];
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    let mut acc = grad.comp(&[j, k, i]).clone();
                    for a in 0..n {
                        acc = ScalarField::add(
                            acc,
                            ScalarField::mul(
                                d.comp(&[j, k, a]).clone(),
                                self.theta.comp(&[a, i]).clone(),
                            ),
                        );
                    }
                    comps[(j * n + k) * n + i] = acc;
                }
            }
        }
        TensorField::new(self.g.chart().clone(), 1, 2, comps)
    }

    /// Worst absolute residual entry over the points.
    pub fn max_residual_on(&self, points: &[Vec<f64>]) -> Result<f64, GeomError> {
        self.residual()?.max_abs_on(points)
    }
}

/// Metric adjoint: `<theta X, Y> = <X, theta* Y>`, i.e.
/// `(theta*)^i_j = g^{ik} theta^l_k g_{lj}`.
pub fn adjoint(theta: &TensorField, g: &Metric) -> Result<TensorField, GeomError> {
    same_chart(theta.chart(), g.chart())?;
    let n = g.dim();
    let mut comps = vec![ScalarField::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = ScalarField::zero();
            for k in 0..n {
                for l in 0..n {
                    acc = ScalarField::add(
                        acc,
                        ScalarField::mul(
                            g.inv_entry(i, k),
                            ScalarField::mul(
                                theta.comp(&[l, k]).clone(),
                                g.entry_field(l, j),
                            ),
                        ),
                    );
                }
            }
            comps[i * n + j] = acc;
        }
    }
    TensorField::new(g.chart().clone(), 1, 1, comps)
}

/// Max of `|theta + theta*|` entries over the points: zero iff theta is
/// skew-adjoint with respect to g.
pub fn skew_adjoint_defect(
    theta: &TensorField,
    g: &Metric,
    points: &[Vec<f64>],
) -> Result<f64, GeomError> {
    let sum = theta.add(&adjoint(theta, g)?)?;
    sum.max_abs_on(points)
}

/// `p_theta(X,Y) = <theta X, Y>`; requires theta skew-adjoint so the result
/// is a 2-form.
pub fn p_form(theta: &TensorField, g: &Metric, tol: f64) -> Result<TensorField, GeomError> {
    let pts = g
        .chart()
        .seeded_points(CONNECTION_CERT_POINTS, CONNECTION_CERT_SEED);
    let defect = skew_adjoint_defect(theta, g, &pts)?;
    if defect > tol {
        return Err(GeomError::Precondition(format!(
            "skew-adjoint theta (|theta + theta*| = {defect:.3e})"
        )));
    }
    Ok(p_form_unchecked(theta, g))
}

pub fn p_form_unchecked(theta: &TensorField, g: &Metric) -> TensorField {
    let n = g.dim();
    let mut comps = vec![ScalarField::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = ScalarField::zero();
            for a in 0..n {
                acc = ScalarField::add(
                    acc,
                    ScalarField::mul(theta.comp(&[a, i]).clone(), g.entry_field(a, j)),
                );
            }
            comps[i * n + j] = acc;
        }
    }
    TensorField::new(g.chart().clone(), 0, 2, comps)
        .unwrap()
        .assume_alternating()
}

/// Residual reports for the parallel/closed/coclosed/harmonic properties of
/// `p_theta`: (a) `nabla p = 0`, (b) `d p = 0`, (c) `delta^nabla p = 0`,
/// (d) `Delta p = d delta p + delta d p = 0` when `nabla` is the
/// Levi-Civita connection (skipped otherwise).
pub fn check_p_properties(
    problem: &GaugeProblem,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<CheckReport>, GeomError> {
    let g = &problem.g;
    let p = p_form(&problem.theta, g, tol.max(1e-8))?;
    let mut out = Vec::new();

    let grad = problem.nabla.covariant_derivative(&p)?;
    out.push(sweep_tensor(
        &grad,
        points,
        suite,
        "p-parallel",
        "nabla p_theta = 0",
        tol,
        Some(&p),
    )?);

    // a top-degree form is closed identically
    let dp = if p.degree() < g.dim() {
        Some(exterior::exterior_derivative(&p)?)
    } else {
        None
    };
    match &dp {
        Some(dp) => out.push(sweep_tensor(
            dp,
            points,
            suite,
            "p-closed",
            "d p_theta = 0",
            tol,
            Some(&p),
        )?),
        None => {
            let mut sw = Sweep::new();
            for pt in points {
                sw.bump_points();
                sw.record(pt, 0.0, || "top-degree form".into());
            }
            out.push(sw.finish(suite, "p-closed", "d p_theta = 0 (top degree)", tol));
        }
    }

    let cod = problem.nabla.codifferential(&p, g)?;
    out.push(sweep_tensor(
        &cod,
        points,
        suite,
        "p-coclosed",
        "delta^nabla p_theta = 0",
        tol,
        Some(&p),
    )?);

    // harmonicity is a Levi-Civita statement
    let lc = Connection::levi_civita(g)?;
    let lc_gap = problem.nabla.max_gamma_difference(&lc, points)?;
    if lc_gap <= tol.max(1e-9) {
        let d_cod = exterior::exterior_derivative(&cod)?;
        let laplacian = match &dp {
            Some(dp) => d_cod.add(&problem.nabla.codifferential(dp, g)?)?,
            None => d_cod,
        };
        out.push(sweep_tensor(
            &laplacian,
            points,
            suite,
            "p-harmonic",
            "Delta p_theta = d delta p + delta d p = 0",
            tol,
            Some(&p),
        )?);
    } else {
        out.push(CheckReport::skip(
            suite,
            "p-harmonic",
            "Delta p_theta = 0",
            format!("nabla is not Levi-Civita (|Gamma - Gamma_lc| = {lc_gap:.3e})"),
        ));
    }
    Ok(out)
}

/// `|nabla theta| ~ 0  <=>  |nabla g| ~ 0` for gauge solutions.
pub fn metric_connection_equivalence(
    problem: &GaugeProblem,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport, GeomError> {
    let check = "metric-connection-equivalence";
    let identity = "nabla theta = 0 <=> nabla g = 0";
    let residual = problem.max_residual_on(points)?;
    if residual > tol {
        return Ok(CheckReport::skip(
            suite,
            check,
            identity,
            format!("theta is not a gauge solution (residual {residual:.3e})"),
        ));
    }
    let n_theta = problem
        .nabla
        .covariant_derivative(&problem.theta)?
        .max_abs_on(points)?;
    let n_g = problem
        .nabla
        .covariant_derivative(problem.g.as_tensor())?
        .max_abs_on(points)?;
    let agree = (n_theta <= tol) == (n_g <= tol);
    Ok(agreement_report(
        suite,
        check,
        identity,
        agree,
        format!("|nabla theta| = {n_theta:.3e}, |nabla g| = {n_g:.3e}"),
    ))
}

/// Pointwise spectral normal form of theta in a g-orthonormal frame.
#[derive(Debug, Clone)]
pub struct SpectralForm {
    pub point: Vec<f64>,
    /// Orthonormal basis w.r.t. g, coordinate components as columns.
    pub basis: DMatrix<f64>,
    pub lambdas: Vec<f64>,
    pub kernel_dim: usize,
}

pub fn spectral_form(
    theta: &TensorField,
    g: &Metric,
    point: &[f64],
    tol: f64,
) -> Result<SpectralForm, GeomError> {
    let ctx = EvalCtx::new(g.chart(), point);
    let theta_mat = theta.eval_matrix(&ctx)?;
    let g_mat = g.matrix_at(&ctx)?;

    // skew-adjointness: theta^T g + g theta = 0
    let defect = (theta_mat.transpose() * &g_mat + &g_mat * &theta_mat)
        .iter()
        .cloned()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = theta_mat.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
    if defect > tol * (1.0 + scale) {
        return Err(GeomError::Precondition(format!(
            "skew-adjoint theta at point (defect {defect:.3e})"
        )));
    }

    let frame = linalg::frame_from_metric(&g_mat, point)?; // columns E_i
    let frame_inv = frame
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::DegenerateMetric { point: point.to_vec() })?;
    let theta_frame = &frame_inv * &theta_mat * &frame;
    let nf: SkewNormalForm = linalg::skew_normal_form(&theta_frame, tol.max(1e-9))?;
    Ok(SpectralForm {
        point: point.to_vec(),
        basis: &frame * &nf.basis,
        lambdas: nf.lambdas,
        kernel_dim: nf.kernel_dim,
    })
}

impl SpectralForm {
    /// Worst deviation from `theta Z_{2k-1} = l_k Z_{2k}`,
    /// `theta Z_{2k} = -l_k Z_{2k-1}`, `theta Z = 0` on the kernel block,
    /// in coordinate components.
    pub fn reconstruction_residual(&self, theta_mat: &DMatrix<f64>) -> f64 {
        let m = self.lambdas.len();
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let u = self.basis.column(2 * k);
            let v = self.basis.column(2 * k + 1);
            let lam = self.lambdas[k];
            worst = worst.max((theta_mat * u - lam * v).norm());
            worst = worst.max((theta_mat * v + lam * u).norm());
        }
        for k in 0..self.kernel_dim {
            worst = worst.max((theta_mat * self.basis.column(2 * m + k)).norm());
        }
        worst
    }

    /// Worst deviation of the basis from g-orthonormality.
    pub fn gram_residual(&self, g_mat: &DMatrix<f64>) -> f64 {
        let gram = self.basis.transpose() * g_mat * &self.basis;
        let n = self.basis.ncols();
        let id = DMatrix::identity(n, n);
        (gram - id).iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Curvature commutation and block structure for a Levi-Civita-parallel
/// theta: (a) `[R(U,V), theta] = 0`, (b) R preserves each spectral 2-plane
/// with the +/- coefficient pattern, (c) Ricci pairs equally on each plane.
pub fn curvature_commutation_checks(
    g: &Metric,
    theta: &TensorField,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<CheckReport>, GeomError> {
    let lc = Connection::levi_civita(g)?;
    let grad = lc.covariant_derivative(theta)?;
    let hyp = grad.max_abs_on(points)?;
    let names: [(&str, &str); 3] = [
        ("curvature-commutation", "[R(U,V), theta] = 0"),
        (
            "curvature-blocks",
            "R(Z_2k, Z_2k-1) rotates each spectral plane by mu_kj",
        ),
        (
            "ricci-pairing",
            "Ric(Z_2k, Z_2k) = Ric(Z_2k-1, Z_2k-1)",
        ),
    ];
    if hyp > tol {
        return Ok(names
            .iter()
            .map(|(c, i)| {
                CheckReport::skip(
                    suite,
                    c,
                    i,
                    format!("hypothesis nabla_lc theta = 0 fails (|nabla theta| = {hyp:.3e})"),
                )
            })
            .collect());
    }

    let n = g.dim();
    let r = lc.curvature();
    let ric = lc.ricci();
    let mut sw_comm = Sweep::new();
    let mut sw_block = Sweep::new();
    let mut sw_ric = Sweep::new();

    for pt in points {
        let ctx = EvalCtx::new(g.chart(), pt);
        let theta_mat = theta.eval_matrix(&ctx)?;
        let g_mat = g.matrix_at(&ctx)?;
        let r_vals = r.eval_all(&ctx)?;
        let ric_mat = ric.eval_matrix(&ctx)?;
        sw_comm.bump_points();
        sw_block.bump_points();
        sw_ric.bump_points();

        // R(d_i, d_j) as a matrix acting on coordinate components
        let r_mat = |i: usize, j: usize| {
            DMatrix::from_fn(n, n, |l, k| r_vals[((l * n + k) * n + i) * n + j])
        };

        // (a) commutators on coordinate pairs
        for i in 0..n {
            for j in (i + 1)..n {
                let m = r_mat(i, j);
                sw_comm.record_scale(m.iter().cloned().fold(0.0f64, |a, v| a.max(v.abs())));
                let comm = &m * &theta_mat - &theta_mat * &m;
                for (idx, v) in comm.iter().enumerate() {
                    sw_comm.record(pt, *v, || format!("[R(d{i},d{j}),theta] entry {idx}"));
                }
            }
        }

        // (b)+(c) spectral-basis structure
        let sf = spectral_form(theta, g, pt, tol.max(1e-9))?;
        let m_blocks = sf.lambdas.len();
        let r_on = |a: &DVector<f64>, b: &DVector<f64>| -> DMatrix<f64> {
            let mut acc = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if a[i] == 0.0 || b[j] == 0.0 {
                        continue;
                    }
                    acc += r_mat(i, j) * (a[i] * b[j]);
                }
            }
            acc
        };
        let g_pair = |x: &DVector<f64>, y: &DVector<f64>| (x.transpose() * &g_mat * y)[(0, 0)];

        for k in 0..m_blocks {
            let u_k: DVector<f64> = sf.basis.column(2 * k).into();
            let v_k: DVector<f64> = sf.basis.column(2 * k + 1).into();
            let a = r_on(&v_k, &u_k); // R(Z_{2k}, Z_{2k-1})
            for j in 0..m_blocks {
                let u_j: DVector<f64> = sf.basis.column(2 * j).into();
                let v_j: DVector<f64> = sf.basis.column(2 * j + 1).into();
                let mu = g_pair(&(&a * &u_j), &v_j);
                sw_block.record_scale(mu);
                let r1 = (&a * &u_j - mu * &v_j).norm();
                let r2 = (&a * &v_j + mu * &u_j).norm();
                sw_block.record(pt, r1, || format!("R(v{k},u{k}) u{j} - mu v{j}"));
                sw_block.record(pt, r2, || format!("R(v{k},u{k}) v{j} + mu u{j}"));
            }
            for w in 0..sf.kernel_dim {
                let z: DVector<f64> = sf.basis.column(2 * m_blocks + w).into();
                sw_block.record(pt, (&a * &z).norm(), || format!("R(v{k},u{k}) kernel_{w}"));
            }
        }
        // cross-pair arguments must act as zero
        for a_i in 0..n {
            for b_i in (a_i + 1)..n {
                let same_block =
                    a_i / 2 == b_i / 2 && b_i < 2 * m_blocks && a_i % 2 == 0 && b_i % 2 == 1;
                if same_block {
                    continue;
                }
                let za: DVector<f64> = sf.basis.column(a_i).into();
                let zb: DVector<f64> = sf.basis.column(b_i).into();
                let m = r_on(&za, &zb);
                let norm = m.iter().cloned().fold(0.0f64, |acc, v| acc.max(v.abs()));
                sw_block.record(pt, norm, || format!("R(Z{a_i},Z{b_i}) != 0 off-pair"));
            }
        }

        for k in 0..m_blocks {
            let u_k: DVector<f64> = sf.basis.column(2 * k).into();
            let v_k: DVector<f64> = sf.basis.column(2 * k + 1).into();
            let ric_u = (u_k.transpose() * &ric_mat * &u_k)[(0, 0)];
            let ric_v = (v_k.transpose() * &ric_mat * &v_k)[(0, 0)];
            sw_ric.record_scale(ric_u);
            sw_ric.record(pt, ric_u - ric_v, || format!("Ric gap on plane {k}"));
        }
    }

    Ok(vec![
        sw_comm.finish(suite, names[0].0, names[0].1, tol),
        sw_block.finish(suite, names[1].0, names[1].1, tol),
        sw_ric.finish(suite, names[2].0, names[2].1, tol),
    ])
}

/// Sweep all components of a tensor field over the points and report
/// against `tol`; `scale_of` feeds the relative-residual figure.
pub fn sweep_tensor(
    t: &TensorField,
    points: &[Vec<f64>],
    suite: &str,
    check: &str,
    identity: &str,
    tol: f64,
    scale_of: Option<&TensorField>,
) -> Result<CheckReport, GeomError> {
    let idxs = t.sweep_indices();
    let scale_idxs = scale_of.map(|s| s.sweep_indices());
    let mut sw = Sweep::new();
    for pt in points {
        let ctx = EvalCtx::new(t.chart(), pt);
        sw.bump_points();
        for idx in &idxs {
            let v = t.comp(idx).eval(&ctx)?;
            sw.record(pt, v, || format!("component {idx:?}"));
        }
        if let (Some(s), Some(sidx)) = (scale_of, &scale_idxs) {
            for idx in sidx {
                sw.record_scale(s.comp(idx).eval(&ctx)?);
            }
        }
    }
    Ok(sw.finish(suite, check, identity, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::expr::parse;
    use crate::expr::Expr;
    use crate::tensor::Metric;

    fn darboux_theta(chart: &crate::chart::ChartRef) -> TensorField {
        // coords (t, q, p): theta dq = dp-dual vector, theta dp = -dq, theta dt = 0
        let mut comps = vec![ScalarField::zero(); 9];
        comps[2 * 3 + 1] = ScalarField::constant(1.0); // theta^p_q
        comps[1 * 3 + 2] = ScalarField::constant(-1.0); // theta^q_p
        TensorField::new(chart.clone(), 1, 1, comps).unwrap()
    }

    #[test]
    fn darboux_theta_solves_flat_gauge_equation() {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let g = Metric::identity(chart.clone());
        let lc = Connection::levi_civita(&g).unwrap();
        let problem = GaugeProblem::new(g, lc, None, darboux_theta(&chart)).unwrap();
        let pts = chart.grid(4);
        assert!(problem.max_residual_on(&pts).unwrap() <= 1e-12);
    }

    #[test]
    fn constant_theta_fails_on_warped_metric() {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let e = |s: &str| parse(s, chart.coords()).unwrap();
        let mut comps = vec![Expr::zero(); 9];
        comps[0] = e("1");
        comps[4] = e("1");
        comps[8] = e("exp(2*t)");
        let g = Metric::new(chart.clone(), comps).unwrap();
        let lc = Connection::levi_civita(&g).unwrap();
        let problem = GaugeProblem::new(g, lc, None, darboux_theta(&chart)).unwrap();
        // non-solution witness, including at t = 0
        let res = problem.residual().unwrap();
        let ctx_pt = [0.0, 0.0, 0.0];
        let ctx = EvalCtx::new(&chart, &ctx_pt);
        let worst = res
            .eval_all(&ctx)
            .unwrap()
            .into_iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst > 0.1, "worst residual {worst}");
    }

    #[test]
    fn residual_forms_agree() {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let e = |s: &str| parse(s, chart.coords()).unwrap();
        let mut comps = vec![Expr::zero(); 9];
        comps[0] = e("1");
        comps[4] = e("1+q^2");
        comps[8] = e("exp(2*t)");
        let g = Metric::new(chart.clone(), comps).unwrap();
        let lc = Connection::levi_civita(&g).unwrap();
        // arbitrary non-solution theta exercises all terms
        let mut tc = vec![ScalarField::zero(); 9];
        tc[1] = ScalarField::from(e("sin(t)"));
        tc[3] = ScalarField::from(e("q*p"));
        tc[8] = ScalarField::from(e("exp(t)"));
        let theta = TensorField::new(chart.clone(), 1, 1, tc).unwrap();
        let problem = GaugeProblem::new(g, lc, None, theta).unwrap();
        let a = problem.residual().unwrap();
        let b = problem.residual_dual_form().unwrap();
        let c = problem.residual_primal_form().unwrap();
        for pt in chart.seeded_points(30, 11) {
            let ctx = EvalCtx::new(&chart, &pt);
            let va = a.eval_all(&ctx).unwrap();
            let vb = b.eval_all(&ctx).unwrap();
            let vc = c.eval_all(&ctx).unwrap();
            for i in 0..va.len() {
                assert!((va[i] - vb[i]).abs() < 1e-9, "dual form mismatch");
                assert!((va[i] - vc[i]).abs() < 1e-9, "primal form mismatch");
            }
        }
    }

    #[test]
    fn adjoint_under_identity_metric_is_transpose() {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let g = Metric::identity(chart.clone());
        let theta = darboux_theta(&chart);
        let adj = adjoint(&theta, &g).unwrap();
        let sum = theta.add(&adj).unwrap();
        assert!(sum.max_abs_on(&chart.grid(3)).unwrap() < 1e-14);

        // symmetric diag(1,2,3) is self-adjoint
        let mut comps = vec![ScalarField::zero(); 9];
        comps[0] = ScalarField::constant(1.0);
        comps[4] = ScalarField::constant(2.0);
        comps[8] = ScalarField::constant(3.0);
        let sym = TensorField::new(chart.clone(), 1, 1, comps).unwrap();
        let adj = adjoint(&sym, &g).unwrap();
        assert!(sym.sub(&adj).unwrap().max_abs_on(&chart.grid(3)).unwrap() < 1e-14);
    }

    #[test]
    fn p_form_of_darboux_theta_is_dq_wedge_dp() {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let g = Metric::identity(chart.clone());
        let p = p_form(&darboux_theta(&chart), &g, 1e-10).unwrap();
        let pt = [0.0, 0.0, 0.0];
        let ctx = EvalCtx::new(&chart, &pt);
        assert_eq!(p.comp(&[1, 2]).eval(&ctx).unwrap(), 1.0);
        assert_eq!(p.comp(&[2, 1]).eval(&ctx).unwrap(), -1.0);
        assert_eq!(p.comp(&[0, 1]).eval(&ctx).unwrap(), 0.0);
    }

    #[test]
    fn spectral_form_of_darboux_theta() {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let g = Metric::identity(chart.clone());
        let theta = darboux_theta(&chart);
        let sf = spectral_form(&theta, &g, &[0.2, -0.4, 0.6], 1e-9).unwrap();
        assert_eq!(sf.lambdas.len(), 1);
        assert!((sf.lambdas[0] - 1.0).abs() < 1e-12);
        assert_eq!(sf.kernel_dim, 1);
        // kernel spanned by the Reeb direction d/dt
        let z = sf.basis.column(2);
        assert!((z[0].abs() - 1.0).abs() < 1e-12 && z[1].abs() < 1e-12 && z[2].abs() < 1e-12);
        let ctx_pt = sf.point.clone();
        let ctx = EvalCtx::new(&chart, &ctx_pt);
        let tm = theta.eval_matrix(&ctx).unwrap();
        let gm = g.matrix_at(&ctx).unwrap();
        assert!(sf.reconstruction_residual(&tm) < 1e-12);
        assert!(sf.gram_residual(&gm) < 1e-12);
    }
}
