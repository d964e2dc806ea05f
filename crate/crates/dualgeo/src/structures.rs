//! Verifiers and constructors for the odd- and even-dimensional structures:
//! almost contact (metric) data, almost cosymplectic and cosymplectic pairs,
//! Reeb fields through the flat isomorphism, the structure constructed from
//! a skew gauge solution, the closed-defining-form proxy for the modular
//! class, Nijenhuis normality, coKaehler and K-cosymplectic checks, and the
//! pointwise polarization that recovers a complex structure from a
//! nondegenerate 2-form on the horizontal distribution.
//!
//! Sign convention, fixed globally: the fundamental 2-form of an almost
//! contact metric structure is `Omega(X,Y) = g(phi X, Y)`; texts that use
//! `g(X, phi Y)` differ from ours by one overall sign.

use nalgebra::{DMatrix, DVector};

use crate::chart::same_chart;
use crate::connection::{Connection, ConnectionRef};
use crate::error::GeomError;
use crate::exterior;
use crate::field::{EvalCtx, ScalarField};
use crate::gauge::{self, GaugeProblem};
use crate::linalg;
use crate::report::{agreement_report, nondegeneracy_report, CheckReport, Sweep};
use crate::tensor::{Metric, TensorField};

/// Threshold for frame determinants in transversality and volume checks.
pub const TRANSVERSALITY_THRESHOLD: f64 = 1e-6;

/// Almost contact data `(phi, xi, eta)` with an optional adapted metric.
pub struct AlmostContactData {
    pub phi: TensorField,
    pub xi: TensorField,
    pub eta: TensorField,
    pub metric: Option<Metric>,
}

/// Almost cosymplectic pair `(eta, omega)`; `full` additionally demands
/// both forms closed.
pub struct CosymplecticData {
    pub eta: TensorField,
    pub omega: TensorField,
    pub full: bool,
}

fn odd_dim(chart: &crate::chart::ChartRef) -> Result<usize, GeomError> {
    let n = chart.dim();
    if n % 2 == 0 {
        return Err(GeomError::Precondition(format!(
            "odd-dimensional chart (got dimension {n})"
        )));
    }
    Ok((n - 1) / 2)
}

/// Residuals for the defining identities of an almost contact structure and
/// the derived ones: `eta(xi) = 1`, `phi^2 = -Id + eta (x) xi`, `phi xi = 0`,
/// `eta o phi = 0`, `rank phi = dim - 1`.
pub fn verify_almost_contact(
    d: &AlmostContactData,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<CheckReport>, GeomError> {
    let chart = d.phi.chart().clone();
    odd_dim(&chart)?;
    same_chart(&chart, d.xi.chart())?;
    same_chart(&chart, d.eta.chart())?;
    let n = chart.dim();
    let mut out = Vec::new();

    let mut sw_unit = Sweep::new();
    let mut sw_square = Sweep::new();
    let mut sw_kernel = Sweep::new();
    let mut sw_etaphi = Sweep::new();
    let mut sw_rank = Sweep::new();

    for pt in points {
        let ctx = EvalCtx::new(&chart, pt);
        let phi = d.phi.eval_matrix(&ctx)?;
        let xi = d.xi.eval_vector(&ctx)?;
        let eta = d.eta.eval_vector(&ctx)?;
        sw_unit.bump_points();
        sw_square.bump_points();
        sw_kernel.bump_points();
        sw_etaphi.bump_points();
        sw_rank.bump_points();

        sw_unit.record_scale(1.0);
        sw_unit.record(pt, eta.dot(&xi) - 1.0, || "eta(xi) - 1".into());

        let square = &phi * &phi + DMatrix::identity(n, n) - &xi * eta.transpose();
        for (idx, v) in square.iter().enumerate() {
            sw_square.record(pt, *v, || format!("entry {idx}"));
        }
        sw_square.record_scale(1.0);

        let pk = &phi * &xi;
        for (i, v) in pk.iter().enumerate() {
            sw_kernel.record(pt, *v, || format!("(phi xi)^{i}"));
        }
        let ep = eta.transpose() * &phi;
        for (i, v) in ep.iter().enumerate() {
            sw_etaphi.record(pt, *v, || format!("(eta phi)_{i}"));
        }
        let rank = linalg::numerical_rank(&phi, linalg::DEFAULT_RANK_TOL);
        sw_rank.record(pt, rank as f64 - (n - 1) as f64, || {
            format!("rank {rank}, expected {}", n - 1)
        });
    }

    out.push(sw_unit.finish(suite, "contact-unit", "eta(xi) = 1", tol));
    out.push(sw_square.finish(
        suite,
        "contact-phi-square",
        "phi^2 = -Id + eta (x) xi",
        tol,
    ));
    out.push(sw_kernel.finish(suite, "contact-phi-kernel", "phi xi = 0", 10.0 * tol));
    out.push(sw_etaphi.finish(suite, "contact-eta-phi", "eta o phi = 0", 10.0 * tol));
    out.push(sw_rank.finish(suite, "contact-rank", "rank phi = dim - 1", 0.0));
    Ok(out)
}

/// Residuals for the adapted-metric identities; also returns the
/// fundamental 2-form `Omega(X,Y) = g(phi X, Y)`.
pub fn verify_adapted_metric(
    d: &AlmostContactData,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<(Vec<CheckReport>, TensorField), GeomError> {
    let g = d
        .metric
        .as_ref()
        .ok_or_else(|| GeomError::Precondition("an adapted metric".into()))?;
    let chart = d.phi.chart().clone();
    let n = chart.dim();
    let mut out = Vec::new();

    let mut sw_compat = Sweep::new();
    let mut sw_dual = Sweep::new();
    let mut sw_iso = Sweep::new();
    let mut sw_skew = Sweep::new();

    for pt in points {
        let ctx = EvalCtx::new(&chart, pt);
        let phi = d.phi.eval_matrix(&ctx)?;
        let xi = d.xi.eval_vector(&ctx)?;
        let eta = d.eta.eval_vector(&ctx)?;
        let gm = g.matrix_at(&ctx)?;
        sw_compat.bump_points();
        sw_dual.bump_points();
        sw_iso.bump_points();
        sw_skew.bump_points();

        let compat = phi.transpose() * &gm * &phi - &gm + &eta * eta.transpose();
        for (idx, v) in compat.iter().enumerate() {
            sw_compat.record(pt, *v, || format!("entry {idx}"));
        }
        sw_compat.record_scale(gm.iter().cloned().fold(0.0, |a: f64, v| a.max(v.abs())));

        let dual_gap = &eta - &gm * &xi;
        for (i, v) in dual_gap.iter().enumerate() {
            sw_dual.record(pt, *v, || format!("component {i}"));
        }

        let iso = phi.transpose() * &gm * &xi;
        for (i, v) in iso.iter().enumerate() {
            sw_iso.record(pt, *v, || format!("g(phi d{i}, xi)"));
        }

        let skew = phi.transpose() * &gm + &gm * &phi;
        for (idx, v) in skew.iter().enumerate() {
            sw_skew.record(pt, *v, || format!("entry {idx}"));
        }
        let _ = n;
    }

    out.push(sw_compat.finish(
        suite,
        "adapted-compat",
        "g(phi X, phi Y) = g(X,Y) - eta(X) eta(Y)",
        tol,
    ));
    out.push(sw_dual.finish(suite, "adapted-eta-dual", "eta(X) = g(X, xi)", tol));
    out.push(sw_iso.finish(suite, "adapted-phi-isotropy", "g(phi X, xi) = 0", tol));
    out.push(sw_skew.finish(
        suite,
        "adapted-skew",
        "g(X, phi Y) = -g(phi X, Y)",
        tol,
    ));

    let omega = gauge::p_form_unchecked(&d.phi, g);
    Ok((out, omega))
}

/// The flat isomorphism `X -> i_X omega + eta(X) eta` as a pointwise
/// matrix, with `M[i][j]` the j-th component of the image of `d_i`.
pub fn flat_iso_matrix(
    eta: &TensorField,
    omega: &TensorField,
    ctx: &EvalCtx<'_>,
) -> Result<DMatrix<f64>, GeomError> {
    let n = eta.dim();
    let w = omega.eval_matrix(ctx)?;
    let e = eta.eval_vector(ctx)?;
    Ok(DMatrix::from_fn(n, n, |i, j| w[(i, j)] + e[i] * e[j]))
}

/// Reeb field `xi = flat^{-1}(eta)` as a pointwise-solved vector field;
/// singular flat maps surface as errors naming the point and condition.
pub fn reeb_field(eta: &TensorField, omega: &TensorField) -> Result<TensorField, GeomError> {
    same_chart(eta.chart(), omega.chart())?;
    let chart = eta.chart().clone();
    let n = chart.dim();
    let eta_c = eta.clone();
    let omega_c = omega.clone();
    let solve = move |chart: &crate::chart::Chart, vals: &[f64]| -> Result<DVector<f64>, GeomError> {
        let ctx = EvalCtx::new(chart, vals);
        let m = flat_iso_matrix(&eta_c, &omega_c, &ctx)?;
        let e = eta_c.eval_vector(&ctx)?;
        let svals = linalg::singular_values(&m);
        let cond = if *svals.last().unwrap() > 0.0 {
            svals[0] / svals.last().unwrap()
        } else {
            f64::INFINITY
        };
        if !cond.is_finite() || cond > 1e12 {
            return Err(GeomError::SingularMap {
                point: vals.to_vec(),
                cond,
            });
        }
        // xi^i M_{ij} = eta_j  <=>  M^T xi = eta
        m.transpose()
            .lu()
            .solve(&e)
            .ok_or_else(|| GeomError::SingularMap {
                point: vals.to_vec(),
                cond,
            })
    };
    let solve = std::sync::Arc::new(solve);
    let comps: Vec<ScalarField> = (0..n)
        .map(|i| {
            let f = solve.clone();
            ScalarField::numeric(format!("reeb^{i}"), move |chart, vals| {
                Ok(f(chart, vals)?[i])
            })
        })
        .collect();
    TensorField::vector(chart, comps)
}

/// Checks for (almost) cosymplectic data: volume non-degeneracy and, for
/// the full structure, closedness of both forms. Also verifies the Reeb
/// characterization through the flat isomorphism.
pub fn verify_cosymplectic(
    d: &CosymplecticData,
    declared_xi: Option<&TensorField>,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<CheckReport>, GeomError> {
    let chart = d.eta.chart().clone();
    let half = odd_dim(&chart)?;
    let mut out = Vec::new();

    let deta = exterior::exterior_derivative(&d.eta)?;
    out.push(gauge::sweep_tensor(
        &deta,
        points,
        suite,
        "cosym-eta-closed",
        "d eta = 0",
        tol,
        Some(&d.eta),
    )?);
    let domega = exterior::exterior_derivative(&d.omega)?;
    out.push(gauge::sweep_tensor(
        &domega,
        points,
        suite,
        "cosym-omega-closed",
        "d omega = 0",
        tol,
        Some(&d.omega),
    )?);

    // omega^n ^ eta is a volume form
    let mut power = d.omega.clone();
    for _ in 1..half.max(1) {
        power = exterior::wedge(&power, &d.omega)?;
    }
    let vol = exterior::wedge(&power, &d.eta)?;
    let top: Vec<usize> = (0..chart.dim()).collect();
    let mut min_coeff = f64::INFINITY;
    let mut worst_pt = Vec::new();
    for pt in points {
        let ctx = EvalCtx::new(&chart, pt);
        let v = vol.comp(&top).eval(&ctx)?.abs();
        if v < min_coeff {
            min_coeff = v;
            worst_pt = pt.clone();
        }
    }
    out.push(nondegeneracy_report(
        suite,
        "cosym-volume",
        "omega^n ^ eta is a volume form",
        min_coeff,
        TRANSVERSALITY_THRESHOLD,
        worst_pt,
    ));

    // Reeb characterization i_xi omega = 0, eta(xi) = 1
    match reeb_field(&d.eta, &d.omega) {
        Ok(xi) => {
            let ixo = exterior::interior_product(&xi, &d.omega)?;
            out.push(gauge::sweep_tensor(
                &ixo,
                points,
                suite,
                "reeb-contraction",
                "i_xi omega = 0",
                10.0 * tol,
                Some(&d.omega),
            )?);
            let mut sw = Sweep::new();
            for pt in points {
                let ctx = EvalCtx::new(&chart, pt);
                let e = d.eta.eval_vector(&ctx)?;
                let x = xi.eval_vector(&ctx)?;
                sw.bump_points();
                sw.record_scale(1.0);
                sw.record(pt, e.dot(&x) - 1.0, || "eta(xi) - 1".into());
                if let Some(dec) = declared_xi {
                    let xd = dec.eval_vector(&ctx)?;
                    for i in 0..chart.dim() {
                        sw.record(pt, x[i] - xd[i], || format!("xi^{i} vs declared"));
                    }
                }
            }
            out.push(sw.finish(
                suite,
                "reeb-characterization",
                "eta(xi) = 1 and xi matches declared field",
                10.0 * tol,
            ));
        }
        Err(GeomError::SingularMap { point, cond }) => {
            out.push(CheckReport {
                worst_point: point.clone(),
                ..CheckReport::skip(
                    suite,
                    "reeb-characterization",
                    "flat iso invertible",
                    format!("flat map singular at {point:?} (condition {cond:.3e}): pair is not almost cosymplectic"),
                )
            });
            // singular flat map means the volume check above failed too
        }
        Err(e) => return Err(e),
    }

    Ok(out)
}

/// Output of the structure construction from a skew gauge solution.
pub struct ConstructedStructure {
    pub p: TensorField,
    pub eta: TensorField,
    pub xi: TensorField,
    pub reports: Vec<CheckReport>,
}

/// From a skew-adjoint full-rank (= dim-1) gauge solution theta, build
/// `p = p_theta`, the unit-normalized `eta_theta = *(p^n) / |*(p^n)|_g`
/// (so `eta_theta(xi) = 1` on the unit kernel section) and `xi_theta =
/// sharp(eta_theta)`; certify the volume form and the splitting
/// `TM = ker p (+) ker eta`.
pub fn structure_from_gauge_solution(
    theta: &TensorField,
    g: &Metric,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<ConstructedStructure, GeomError> {
    let chart = g.chart().clone();
    let half = odd_dim(&chart)?;
    let n = chart.dim();

    // rank precondition
    for pt in points {
        let rank = exterior::pointwise_rank(theta, pt, linalg::DEFAULT_RANK_TOL)?;
        if rank != n - 1 {
            return Err(GeomError::Precondition(format!(
                "rank theta = dim - 1 everywhere (rank {rank} at {pt:?})"
            )));
        }
    }

    let p = gauge::p_form(theta, g, tol.max(1e-8))?;
    let mut power = p.clone();
    for _ in 1..half.max(1) {
        power = exterior::wedge(&power, &p)?;
    }
    let eta_raw = exterior::hodge_star(&power, g)?;
    let norm = ScalarField::sqrt(g.coform_norm_sq(&eta_raw)?);
    let eta = eta_raw.map(|c| ScalarField::div(c.clone(), norm.clone()));
    let xi = g.sharp(&eta)?;

    let mut reports = Vec::new();

    // p^n ^ eta_theta nonvanishing
    let vol = exterior::wedge(&power, &eta)?;
    let top: Vec<usize> = (0..n).collect();
    let mut min_coeff = f64::INFINITY;
    let mut worst_pt = Vec::new();
    for pt in points {
        let ctx = EvalCtx::new(&chart, pt);
        let v = vol.comp(&top).eval(&ctx)?.abs();
        if v < min_coeff {
            min_coeff = v;
            worst_pt = pt.clone();
        }
    }
    reports.push(nondegeneracy_report(
        suite,
        "structure-volume",
        "p_theta^n ^ eta_theta != 0",
        min_coeff,
        TRANSVERSALITY_THRESHOLD,
        worst_pt,
    ));

    // kernel section: i_xi p = 0, eta(xi) = 1
    let ixp = exterior::interior_product(&xi, &p)?;
    reports.push(gauge::sweep_tensor(
        &ixp,
        points,
        suite,
        "structure-kernel",
        "i_xi_theta p_theta = 0",
        10.0 * tol,
        Some(&p),
    )?);
    let mut sw = Sweep::new();
    for pt in points {
        let ctx = EvalCtx::new(&chart, pt);
        let e = eta.eval_vector(&ctx)?;
        let x = xi.eval_vector(&ctx)?;
        sw.bump_points();
        sw.record_scale(1.0);
        sw.record(pt, e.dot(&x) - 1.0, || "eta_theta(xi_theta) - 1".into());
    }
    reports.push(sw.finish(
        suite,
        "structure-normalization",
        "eta_theta(xi_theta) = 1 on the unit kernel section",
        10.0 * tol,
    ));

    // transversality of the splitting: |det [xi | unit basis of ker eta]|
    let mut min_det = f64::INFINITY;
    let mut worst_pt = Vec::new();
    for pt in points {
        let ctx = EvalCtx::new(&chart, pt);
        let e = eta.eval_vector(&ctx)?;
        let x = xi.eval_vector(&ctx)?;
        let ker = linalg::nullspace(&DMatrix::from_rows(&[e.transpose()]), 1e-10);
        if ker.ncols() != n - 1 {
            min_det = 0.0;
            worst_pt = pt.clone();
            break;
        }
        let mut cols = vec![x.normalize()];
        for c in 0..ker.ncols() {
            cols.push(ker.column(c).into());
        }
        let frame = DMatrix::from_columns(&cols);
        let det = frame.determinant().abs();
        if det < min_det {
            min_det = det;
            worst_pt = pt.clone();
        }
    }
    reports.push(nondegeneracy_report(
        suite,
        "structure-transversality",
        "TM = ker p_theta (+) ker eta_theta",
        min_det,
        TRANSVERSALITY_THRESHOLD,
        worst_pt,
    ));

    Ok(ConstructedStructure {
        p,
        eta,
        xi,
        reports,
    })
}

/// Closed-proxy for the modular class plus the parallelism statements:
/// `d eta_theta = 0` certifies a closed defining form for the foliation
/// `im theta`; additionally `im theta = ker eta_theta` pointwise, `ker p`
/// is nabla-parallel and `ker eta` is nabla*-parallel.
pub fn modular_proxy_checks(
    problem: &GaugeProblem,
    built: &ConstructedStructure,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<CheckReport>, GeomError> {
    let chart = problem.g.chart().clone();
    let n = chart.dim();
    let mut out = Vec::new();

    let deta = exterior::exterior_derivative(&built.eta)?;
    out.push(gauge::sweep_tensor(
        &deta,
        points,
        suite,
        "modular-proxy",
        "d eta_theta = 0 (closed defining form exists)",
        tol,
        Some(&built.eta),
    )?);

    // im(theta) = ker(eta_theta) as subspaces, pointwise
    let mut sw = Sweep::new();
    for pt in points {
        let ctx = EvalCtx::new(&chart, pt);
        let tm = problem.theta.eval_matrix(&ctx)?;
        let e = built.eta.eval_vector(&ctx)?;
        let image = linalg::column_space(&tm, linalg::DEFAULT_RANK_TOL);
        let kernel = linalg::nullspace(&DMatrix::from_rows(&[e.transpose()]), 1e-10);
        sw.bump_points();
        sw.record_scale(1.0);
        let angle = linalg::max_principal_angle(&image, &kernel);
        sw.record(pt, angle, || {
            format!("principal angle, dim im = {}", image.ncols())
        });
    }
    out.push(sw.finish(
        suite,
        "modular-image",
        "im theta = ker eta_theta (subspace angle)",
        tol,
    ));

    // nabla preserves ker p (spanned by xi_theta)
    let nxi = problem.nabla.covariant_derivative(&built.xi)?; // [k][dir]
    let mut sw = Sweep::new();
    for pt in points {
        let ctx = EvalCtx::new(&chart, pt);
        let pm = built.p.eval_matrix(&ctx)?;
        sw.bump_points();
        for dir in 0..n {
            let v = DVector::from_fn(n, |k, _| {
                nxi.comp(&[k, dir]).eval(&ctx).unwrap_or(f64::NAN)
            });
            let contracted = pm.transpose() * &v; // p(v, .)_j = v^a p_{aj}
            for (j, val) in contracted.iter().enumerate() {
                sw.record(pt, *val, || format!("p(nabla_d{dir} xi, d{j})"));
            }
        }
        sw.record_scale(pm.iter().cloned().fold(0.0, |a: f64, v| a.max(v.abs())));
    }
    out.push(sw.finish(
        suite,
        "adapted-kernel-inclusion",
        "nabla Gamma(ker p_theta) in Gamma(ker p_theta)",
        tol,
    ));

    // nabla* preserves ker eta: project coordinate fields into ker eta
    let mut sw = Sweep::new();
    let mut projected = Vec::with_capacity(n);
    for b in 0..n {
        let mut comps = vec![ScalarField::zero(); n];
        for (k, comp) in comps.iter_mut().enumerate() {
            let delta = if k == b {
                ScalarField::constant(1.0)
            } else {
                ScalarField::zero()
            };
            *comp = ScalarField::sub(
                delta,
                ScalarField::mul(
                    built.eta.comps()[b].clone(),
                    built.xi.comps()[k].clone(),
                ),
            );
        }
        projected.push(TensorField::vector(chart.clone(), comps)?);
    }
    for (b, w) in projected.iter().enumerate() {
        let nw = problem.nabla_star.covariant_derivative(w)?;
        for pt in points {
            let ctx = EvalCtx::new(&chart, pt);
            let e = built.eta.eval_vector(&ctx)?;
            if b == 0 {
                sw.bump_points();
            }
            for dir in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += e[k] * nw.comp(&[k, dir]).eval(&ctx)?;
                }
                sw.record(pt, acc, || format!("eta(nabla*_d{dir} w_{b})"));
            }
        }
    }
    out.push(sw.finish(
        suite,
        "adapted-image-inclusion",
        "nabla* Gamma(ker eta_theta) in Gamma(ker eta_theta)",
        tol,
    ));

    Ok(out)
}

/// Nijenhuis torsion of a (1,1)-field on coordinate fields.
pub fn nijenhuis(theta: &TensorField) -> Result<TensorField, GeomError> {
    if theta.valence() != (1, 1) {
        let (r, s) = theta.valence();
        return Err(GeomError::UnsupportedValence { r, s });
    }
    let chart = theta.chart().clone();
    let n = chart.dim();
    let mut comps = vec![ScalarField::zero(); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = ScalarField::zero();
                for a in 0..n {
                    // - theta^k_a (d_i theta^a_j - d_j theta^a_i)
                    acc = ScalarField::sub(
                        acc,
                        ScalarField::mul(
                            theta.comp(&[k, a]).clone(),
                            ScalarField::sub(
                                theta.comp(&[a, j]).diff(&chart, i),
                                theta.comp(&[a, i]).diff(&chart, j),
                            ),
                        ),
                    );
                    // + theta^a_i d_a theta^k_j - theta^a_j d_a theta^k_i
                    acc = ScalarField::add(
                        acc,
                        ScalarField::sub(
                            ScalarField::mul(
                                theta.comp(&[a, i]).clone(),
                                theta.comp(&[k, j]).diff(&chart, a),
                            ),
                            ScalarField::mul(
                                theta.comp(&[a, j]).clone(),
                                theta.comp(&[k, i]).diff(&chart, a),
                            ),
                        ),
                    );
                }
                comps[(k * n + i) * n + j] = acc;
            }
        }
    }
    TensorField::new(chart, 1, 2, comps)
}

/// Normality: `N_phi + d eta (x) xi = 0`.
pub fn normality_check(
    phi: &TensorField,
    xi: &TensorField,
    eta: &TensorField,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport, GeomError> {
    let n = phi.dim();
    let nij = nijenhuis(phi)?;
    let deta = exterior::exterior_derivative(eta)?;
    let chart = phi.chart().clone();
    let mut comps = vec![ScalarField::zero(); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                comps[(k * n + i) * n + j] = ScalarField::add(
                    nij.comp(&[k, i, j]).clone(),
                    ScalarField::mul(deta.comp(&[i, j]).clone(), xi.comps()[k].clone()),
                );
            }
        }
    }
    let total = TensorField::new(chart, 1, 2, comps)?;
    gauge::sweep_tensor(
        &total,
        points,
        suite,
        "normality",
        "N_phi + d eta (x) xi = 0",
        tol,
        Some(phi),
    )
}

/// coKaehler-specific checks: Levi-Civita parallelism of phi and the
/// biconditional with parallelism of eta and the fundamental form.
pub fn cokahler_checks(
    d: &AlmostContactData,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<CheckReport>, GeomError> {
    let g = d
        .metric
        .as_ref()
        .ok_or_else(|| GeomError::Precondition("an adapted metric".into()))?;
    let lc = Connection::levi_civita(g)?;
    let mut out = Vec::new();

    let grad_phi = lc.covariant_derivative(&d.phi)?;
    out.push(gauge::sweep_tensor(
        &grad_phi,
        points,
        suite,
        "cokahler-phi-parallel",
        "nabla_lc phi = 0",
        tol,
        Some(&d.phi),
    )?);

    let omega = gauge::p_form_unchecked(&d.phi, g);
    let n_phi = grad_phi.max_abs_on(points)?;
    let n_eta = lc.covariant_derivative(&d.eta)?.max_abs_on(points)?;
    let n_omega = lc.covariant_derivative(&omega)?.max_abs_on(points)?;
    let agree = (n_phi <= tol) == (n_eta <= tol && n_omega <= tol);
    out.push(agreement_report(
        suite,
        "cokahler-biconditional",
        "nabla_lc phi = 0 <=> (nabla_lc eta = 0 and nabla_lc Omega = 0)",
        agree,
        format!(
            "|nabla phi| = {n_phi:.3e}, |nabla eta| = {n_eta:.3e}, |nabla Omega| = {n_omega:.3e}"
        ),
    ));

    out.push(normality_check(&d.phi, &d.xi, &d.eta, suite, points, tol)?);
    Ok(out)
}

/// Killing, geodesic-flow and mean-curvature checks for a Reeb candidate.
pub fn killing_and_geodesic_checks(
    xi: &TensorField,
    g: &Metric,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<CheckReport>, GeomError> {
    same_chart(xi.chart(), g.chart())?;
    let chart = g.chart().clone();
    let n = chart.dim();

    // nonvanishing precondition
    for pt in points {
        let ctx = EvalCtx::new(&chart, pt);
        let x = xi.eval_vector(&ctx)?;
        let gm = g.matrix_at(&ctx)?;
        let norm = (x.transpose() * &gm * &x)[(0, 0)];
        if norm < 1e-12 {
            return Err(GeomError::Precondition(format!(
                "nonvanishing xi (|xi|^2 = {norm:.3e} at {pt:?})"
            )));
        }
    }

    let mut out = Vec::new();

    let lie = exterior::lie_derivative(xi, g.as_tensor())?;
    out.push(gauge::sweep_tensor(
        &lie,
        points,
        suite,
        "killing-field",
        "L_xi g = 0",
        tol,
        Some(g.as_tensor()),
    )?);

    // unit field and its geodesic defect
    let lc = Connection::levi_civita(g)?;
    let norm = ScalarField::sqrt(g.pairing(xi, xi)?);
    let unit = xi.map(|c| ScalarField::div(c.clone(), norm.clone()));
    let acc = lc.directional_derivative(&unit, &unit)?;
    out.push(gauge::sweep_tensor(
        &acc,
        points,
        suite,
        "geodesic-flow",
        "nabla_lc_xihat xihat = 0",
        tol,
        None,
    )?);

    // mean curvature identity d eta_hat (xihat, X) = <H, X> with
    // eta_hat = flat(xihat) and H the normal part of the acceleration
    let eta_hat = g.flat(&unit)?;
    let deta = exterior::exterior_derivative(&eta_hat)?;
    let mut sw = Sweep::new();
    for pt in points {
        let ctx = EvalCtx::new(&chart, pt);
        let gm = g.matrix_at(&ctx)?;
        let u = unit.eval_vector(&ctx)?;
        let a = acc.eval_vector(&ctx)?;
        let normal = &a - &u * (u.transpose() * &gm * &a)[(0, 0)];
        let d = deta.eval_matrix(&ctx)?;
        sw.bump_points();
        for j in 0..n {
            // d eta(xihat, d_j) = sum_i u^i d_{ij}
            let lhs = (0..n).map(|i| u[i] * d[(i, j)]).sum::<f64>();
            let rhs = (0..n).map(|i| gm[(j, i)] * normal[i]).sum::<f64>();
            sw.record_scale(rhs);
            sw.record(pt, lhs - rhs, || format!("direction d{j}"));
        }
    }
    out.push(sw.finish(
        suite,
        "mean-curvature-identity",
        "d eta(xihat, X) = <H, X>",
        10.0 * tol,
    ));

    Ok(out)
}

/// Pseudo-Kaehler checks in even dimension: the 2-form is Levi-Civita
/// parallel and of maximal rank, equivalently the associated (1,1)-field is
/// parallel; both routes are evaluated.
pub fn pseudo_kahler_checks(
    g: &Metric,
    omega: &TensorField,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<CheckReport>, GeomError> {
    let chart = g.chart().clone();
    let n = chart.dim();
    if n % 2 == 1 {
        return Err(GeomError::Precondition(format!(
            "even-dimensional chart (got dimension {n})"
        )));
    }
    let lc = Connection::levi_civita(g)?;
    let mut out = Vec::new();

    let grad_omega = lc.covariant_derivative(omega)?;
    out.push(gauge::sweep_tensor(
        &grad_omega,
        points,
        suite,
        "pk-parallel-form",
        "nabla_lc Omega = 0",
        tol,
        Some(omega),
    )?);

    let mut sw = Sweep::new();
    for pt in points {
        let rank = exterior::pointwise_rank(omega, pt, linalg::DEFAULT_RANK_TOL)?;
        sw.bump_points();
        sw.record(pt, rank as f64 - n as f64, || {
            format!("rank {rank}, expected {n}")
        });
    }
    out.push(sw.finish(suite, "pk-rank", "rank Omega = dim everywhere", 0.0));

    // theta with Omega(X,Y) = g(theta X, Y): theta^a_i = Omega_{ij} g^{ja}
    let mut comps = vec![ScalarField::zero(); n * n];
    for a in 0..n {
        for i in 0..n {
            let mut acc = ScalarField::zero();
            for j in 0..n {
                acc = ScalarField::add(
                    acc,
                    ScalarField::mul(omega.comp(&[i, j]).clone(), g.inv_entry(j, a)),
                );
            }
            comps[a * n + i] = acc;
        }
    }
    let theta = TensorField::new(chart, 1, 1, comps)?;
    let n_theta = lc.covariant_derivative(&theta)?.max_abs_on(points)?;
    let n_omega = grad_omega.max_abs_on(points)?;
    out.push(agreement_report(
        suite,
        "pk-theta-equivalence",
        "nabla_lc Omega = 0 <=> nabla_lc theta = 0",
        (n_theta <= tol) == (n_omega <= tol),
        format!("|nabla Omega| = {n_omega:.3e}, |nabla theta| = {n_theta:.3e}"),
    ));

    Ok(out)
}

/// Auditable biconditionals between parallelism of phi, xi, eta, g under a
/// dual pair, plus the musical identity `(nabla_X xi)^flat = nabla_X eta`
/// for self-dual pairs.
pub fn contact_identity_checks(
    d: &AlmostContactData,
    nabla: &ConnectionRef,
    nabla_star: &ConnectionRef,
    suite: &str,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<CheckReport>, GeomError> {
    let g = d
        .metric
        .as_ref()
        .ok_or_else(|| GeomError::Precondition("a metric".into()))?;
    let chart = d.phi.chart().clone();
    let n = chart.dim();
    let mut out = Vec::new();

    let n_phi = nabla.covariant_derivative(&d.phi)?.max_abs_on(points)?;
    let n_xi = nabla.covariant_derivative(&d.xi)?.max_abs_on(points)?;
    let n_eta = nabla.covariant_derivative(&d.eta)?.max_abs_on(points)?;

    if n_phi <= tol {
        out.push(agreement_report(
            suite,
            "contact-parallel-transfer",
            "(nabla phi = 0, nabla xi = 0) <=> (nabla phi = 0, nabla eta = 0)",
            (n_xi <= tol) == (n_eta <= tol),
            format!("|nabla phi| = {n_phi:.3e}, |nabla xi| = {n_xi:.3e}, |nabla eta| = {n_eta:.3e}"),
        ));
    } else {
        out.push(CheckReport::skip(
            suite,
            "contact-parallel-transfer",
            "(nabla phi, nabla xi) <=> (nabla phi, nabla eta)",
            format!("hypothesis nabla phi = 0 fails (|nabla phi| = {n_phi:.3e})"),
        ));
    }

    // musical identity holds for self-dual pairs
    let self_dual_gap = nabla.max_gamma_difference(nabla_star, points)?;
    if self_dual_gap <= tol.max(1e-9) {
        let grad_xi = nabla.covariant_derivative(&d.xi)?; // [k][dir]
        let grad_eta = nabla.covariant_derivative(&d.eta)?; // [dir][i]
        let mut sw = Sweep::new();
        for pt in points {
            let ctx = EvalCtx::new(&chart, pt);
            let gm = g.matrix_at(&ctx)?;
            sw.bump_points();
            for dir in 0..n {
                for i in 0..n {
                    let mut lowered = 0.0;
                    for k in 0..n {
                        lowered += gm[(i, k)] * grad_xi.comp(&[k, dir]).eval(&ctx)?;
                    }
                    let rhs = grad_eta.comp(&[dir, i]).eval(&ctx)?;
                    sw.record_scale(rhs);
                    sw.record(pt, lowered - rhs, || format!("dir {dir}, comp {i}"));
                }
            }
        }
        out.push(sw.finish(
            suite,
            "contact-musical",
            "(nabla_X xi)^flat = nabla_X eta",
            tol,
        ));
    } else {
        out.push(CheckReport::skip(
            suite,
            "contact-musical",
            "(nabla_X xi)^flat = nabla_X eta",
            format!("pair is not self-dual (|Gamma - Gamma*| = {self_dual_gap:.3e})"),
        ));
    }

    Ok(out)
}

/// Pointwise polarization of omega on `ker eta`: the g-compatible complex
/// structure of the horizontal distribution, extended by zero along the
/// Reeb direction. Assumes `ker eta` is g-orthogonal to the Reeb field, as
/// it is for adapted metrics. Components are opaque numeric fields, so
/// derivatives of the result fall back to finite differences.
pub fn polarized_theta(
    eta: &TensorField,
    omega: &TensorField,
    g: &Metric,
) -> Result<TensorField, GeomError> {
    same_chart(eta.chart(), omega.chart())?;
    same_chart(eta.chart(), g.chart())?;
    let chart = g.chart().clone();
    let n = chart.dim();
    let eta_c = eta.clone();
    let omega_c = omega.clone();
    let g_c = g.clone();
    let reeb = reeb_field(eta, omega)?;
    // every component (and each finite-difference shift) revisits the same
    // point; memoize the pointwise factorization by exact coordinates
    let memo: std::sync::Mutex<std::collections::HashMap<Vec<u64>, DMatrix<f64>>> =
        std::sync::Mutex::new(std::collections::HashMap::new());

    let inner = move |chart: &crate::chart::Chart, vals: &[f64]| -> Result<DMatrix<f64>, GeomError> {
        let ctx = EvalCtx::new(chart, vals);
        let e = eta_c.eval_vector(&ctx)?;
        let w = omega_c.eval_matrix(&ctx)?;
        let gm = g_c.matrix_at(&ctx)?;
        let xi = reeb.eval_vector(&ctx)?;

        // horizontal basis: drop the coordinate with the largest |eta_i|
        let pivot = (0..n)
            .max_by(|&a, &b| e[a].abs().partial_cmp(&e[b].abs()).unwrap())
            .unwrap();
        if e[pivot].abs() < 1e-12 {
            return Err(GeomError::SingularMap {
                point: vals.to_vec(),
                cond: f64::INFINITY,
            });
        }
        let mut raw: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
        for i in 0..n {
            if i == pivot {
                continue;
            }
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            v[pivot] = -e[i] / e[pivot];
            raw.push(v);
        }
        // g-orthonormalize
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
        for mut v in raw {
            for b in &basis {
                let c = (b.transpose() * &gm * &v)[(0, 0)];
                v -= b * c;
            }
            let norm = (v.transpose() * &gm * &v)[(0, 0)].sqrt();
            if norm < 1e-12 {
                return Err(GeomError::SingularMap {
                    point: vals.to_vec(),
                    cond: f64::INFINITY,
                });
            }
            basis.push(v / norm);
        }
        let q = DMatrix::from_columns(&basis); // n x (n-1)

        // omega restricted to the horizontal space in the g-orthonormal basis
        let a = q.transpose() * &w * &q; // A_{ab} = omega(Q_a, Q_b)
        // operator O with g(O X, Y) = omega(X,Y): matrix O = A^T in basis Q
        let o = a.transpose();
        let j_h = linalg::polar_rotation(&o).map_err(|_| GeomError::SingularMap {
            point: vals.to_vec(),
            cond: f64::INFINITY,
        })?;

        // theta = Q J_h Q^T G pi  with pi = I - xi eta^T
        let pi = DMatrix::identity(n, n) - &xi * e.transpose();
        Ok(&q * j_h * q.transpose() * &gm * pi)
    };
    let build = move |chart: &crate::chart::Chart, vals: &[f64]| -> Result<DMatrix<f64>, GeomError> {
        let key: Vec<u64> = vals.iter().map(|v| v.to_bits()).collect();
        if let Some(hit) = memo.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let m = inner(chart, vals)?;
        memo.lock().unwrap().insert(key, m.clone());
        Ok(m)
    };
    let build = std::sync::Arc::new(build);
    let mut comps = vec![ScalarField::zero(); n * n];
    for k in 0..n {
        for i in 0..n {
            let f = build.clone();
            comps[k * n + i] = ScalarField::numeric(
                format!("polarized_theta^{k}_{i}"),
                move |chart, vals| Ok(f(chart, vals)?[(k, i)]),
            );
        }
    }
    TensorField::new(chart, 1, 1, comps)
}
